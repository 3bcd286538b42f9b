#ifndef PLASIM_INTERPOLATION_HPP
#define PLASIM_INTERPOLATION_HPP

#include "plasim/cluster.hpp"
#include "plasim/types.hpp"

namespace plasim {

/// Tensorized Chebyshev interpolation of order d per axis on a box (d^3 nodes).
struct InterpolationScheme {
  int order = 5;

  int rank() const { return order * order * order; }
};

/// Chebyshev (first-kind root) nodes mapped to [a, b].
std::vector<double> chebyshev_nodes(int d, double a, double b);

/// Per-box tensor interpolation grid with barycentric Lagrange evaluation.
class TensorGrid {
public:
  TensorGrid(const Box& box, int order);

  int order() const { return d_; }
  int rank() const { return d_ * d_ * d_; }

  /// Interpolation node of flat index alpha (alpha = (a2*d + a1)*d + a0,
  /// axis 0 fastest).
  Vec3 node(int alpha) const;

  /// All d^3 tensor Lagrange values at x, written into row (size d^3).
  void lagrange_row(const Vec3& x, double* row) const;

private:
  int d_;
  std::array<std::vector<double>, 3> nodes_;
  std::array<std::vector<double>, 3> weights_;  // barycentric

  void lagrange_1d(int axis, double x, double* vals) const;
};

} // namespace plasim

#endif

#ifndef PLASIM_QUADRATURE_HPP
#define PLASIM_QUADRATURE_HPP

#include "plasim/types.hpp"

#include <array>
#include <functional>

namespace plasim {

/// Gauss-Legendre nodes/weights on [0, 1].
struct GaussRule {
  std::vector<double> x, w;
};
GaussRule gauss_legendre_01(int n);

struct QuadratureConfig {
  int singular_order = 4;  // Gauss points per dimension of the 4D transforms
  int regular_order = 7;   // points of the symmetric triangle rule (fixed rule)
};

enum class PairKind { Disjoint, SharedVertex, SharedEdge, Identical };

using PanelKernel = std::function<double(const Vec3& x, const Vec3& y)>;

/// Galerkin integral of a kernel with P1 basis products over a triangle pair:
///   I[a][b] = int_{tx} int_{ty} k(x, y) lambda_a(x) lambda_b(y) ds_y ds_x.
///
/// Vertex ordering contract: SharedVertex expects the common vertex at local
/// index 0 of both triangles; SharedEdge the common edge as local (0, 1) in
/// the same direction; Identical the same ordering for both. Singular kinds
/// use relative-coordinate Duffy transforms that remove the 1/r singularity.
Eigen::Matrix3d integrate_panel_pair(const std::array<Vec3, 3>& tx,
                                     const std::array<Vec3, 3>& ty, PairKind kind,
                                     const PanelKernel& kernel,
                                     const QuadratureConfig& cfg);

/// Symmetric 7-point rule applied to int_t k(x) lambda_a(x) ds (per basis).
Eigen::Vector3d integrate_panel(const std::array<Vec3, 3>& t, const std::function<double(const Vec3&)>& f);

} // namespace plasim

#endif

#include "plasim/interpolation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace plasim {

std::vector<double> chebyshev_nodes(int d, double a, double b) {
  std::vector<double> x(d);
  for (int i = 0; i < d; ++i) {
    const double t = std::cos(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * d));
    x[i] = 0.5 * (a + b) + 0.5 * (b - a) * t;
  }
  return x;
}

TensorGrid::TensorGrid(const Box& box, int order) : d_(order) {
  if (order < 1) throw std::invalid_argument("interpolation order must be >= 1");
  for (int axis = 0; axis < 3; ++axis) {
    double a = box.lo[axis], b = box.hi[axis];
    if (b - a < 1e-300) {  // degenerate axis: widen so barycentric weights exist
      const double w = std::max(1e-12, 1e-12 * std::abs(a));
      a -= w;
      b += w;
    }
    nodes_[axis] = chebyshev_nodes(d_, a, b);
    weights_[axis].resize(d_);
    for (int i = 0; i < d_; ++i) {
      double w = 1.0;
      for (int j = 0; j < d_; ++j)
        if (j != i) w /= nodes_[axis][i] - nodes_[axis][j];
      weights_[axis][i] = w;
    }
  }
}

Vec3 TensorGrid::node(int alpha) const {
  const int a0 = alpha % d_, a1 = (alpha / d_) % d_, a2 = alpha / (d_ * d_);
  return {nodes_[0][a0], nodes_[1][a1], nodes_[2][a2]};
}

void TensorGrid::lagrange_1d(int axis, double x, double* vals) const {
  // barycentric form; exact cardinality at the nodes
  for (int i = 0; i < d_; ++i) {
    if (x == nodes_[axis][i]) {
      for (int j = 0; j < d_; ++j) vals[j] = (i == j) ? 1.0 : 0.0;
      return;
    }
  }
  double denom = 0.0;
  for (int i = 0; i < d_; ++i) {
    vals[i] = weights_[axis][i] / (x - nodes_[axis][i]);
    denom += vals[i];
  }
  for (int i = 0; i < d_; ++i) vals[i] /= denom;
}

void TensorGrid::lagrange_row(const Vec3& x, double* row) const {
  std::vector<double> l0(d_), l1(d_), l2(d_);
  lagrange_1d(0, x.x(), l0.data());
  lagrange_1d(1, x.y(), l1.data());
  lagrange_1d(2, x.z(), l2.data());
  int alpha = 0;
  for (int a2 = 0; a2 < d_; ++a2)
    for (int a1 = 0; a1 < d_; ++a1)
      for (int a0 = 0; a0 < d_; ++a0) row[alpha++] = l0[a0] * l1[a1] * l2[a2];
}

} // namespace plasim

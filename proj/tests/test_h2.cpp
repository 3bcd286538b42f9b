#include <doctest.h>

#include "plasim/h2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace plasim;

namespace {

std::vector<Vec3> random_points(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return pts;
}

}  // namespace

TEST_CASE("chebyshev nodes") {
  const auto n1 = chebyshev_nodes(1, -1.0, 1.0);
  REQUIRE(n1.size() == 1);
  CHECK(n1[0] == doctest::Approx(0.0).epsilon(1e-15));
  auto n3 = chebyshev_nodes(3, 0.0, 2.0);
  std::sort(n3.begin(), n3.end());
  // roots of T_3 are cos((2k+1)pi/6) = {±sqrt(3)/2, 0}, mapped to [0, 2]
  const double s = std::sqrt(3.0) / 2.0;
  CHECK(n3[0] == doctest::Approx(1.0 - s));
  CHECK(n3[1] == doctest::Approx(1.0));
  CHECK(n3[2] == doctest::Approx(1.0 + s));
}

TEST_CASE("tensor grid: cardinality and partition of unity") {
  Box box;
  box.expand({-1, 0, 2});
  box.expand({1, 3, 5});
  TensorGrid g(box, 4);
  REQUIRE(g.rank() == 64);
  std::vector<double> row(64);
  for (int alpha = 0; alpha < 64; ++alpha) {
    g.lagrange_row(g.node(alpha), row.data());
    for (int beta = 0; beta < 64; ++beta)
      CHECK(row[beta] == doctest::Approx(alpha == beta ? 1.0 : 0.0).epsilon(1e-12));
  }
  // Lagrange rows sum to 1 anywhere
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vec3 x = box.lo + (box.hi - box.lo).cwiseProduct(Vec3(u(rng), u(rng), u(rng)));
    g.lagrange_row(x, row.data());
    double s = 0;
    for (double v : row) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("tensor grid: polynomial exactness") {
  Box box;
  box.expand({0, 0, 0});
  box.expand({1, 2, 3});
  TensorGrid g(box, 4);  // exact for degree <= 3 per axis
  auto f = [](const Vec3& x) {
    return 1.0 + x[0] * x[0] * x[0] - 2.0 * x[1] * x[2] * x[2] + x[0] * x[1] * x[2];
  };
  std::vector<double> row(g.rank());
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 x = box.lo + (box.hi - box.lo).cwiseProduct(Vec3(u(rng), u(rng), u(rng)));
    g.lagrange_row(x, row.data());
    double interp = 0;
    for (int alpha = 0; alpha < g.rank(); ++alpha) interp += row[alpha] * f(g.node(alpha));
    CHECK(interp == doctest::Approx(f(x)).epsilon(1e-12));
  }
}

TEST_CASE("tensor grid: degenerate axis") {
  Box box;
  box.expand({0, 0, 0});
  box.expand({1, 1, 0});  // flat in z
  TensorGrid g(box, 3);
  std::vector<double> row(27);
  g.lagrange_row({0.3, 0.7, 0.0}, row.data());
  double s = 0;
  for (double v : row) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("kernel values") {
  KernelSpec k;
  double v;
  eval_kernel(k, {1, 0, 0}, {0, 0, 0}, &v);
  CHECK(v == doctest::Approx(1.0 / (4.0 * std::numbers::pi)));
  k.scale = 2.0;
  eval_kernel(k, {2, 0, 0}, {0, 0, 0}, &v);
  CHECK(v == doctest::Approx(2.0 / (8.0 * std::numbers::pi)));

  // regularization clamps the potential and zeroes the gradient inside delta
  KernelSpec reg = regularize(KernelSpec{}, 1e-3);
  eval_kernel(reg, {1e-4, 0, 0}, {0, 0, 0}, &v);
  CHECK(v == doctest::Approx(1.0 / (4.0 * std::numbers::pi * 1e-3)));
  eval_kernel(reg, {0, 0, 0}, {0, 0, 0}, &v);
  CHECK(v == doctest::Approx(1.0 / (4.0 * std::numbers::pi * 1e-3)));

  KernelSpec grad = regularize({KernelSpec::Kind::Gradient, 1.0, 0.0}, 1e-3);
  double g3[3];
  eval_kernel(grad, {1, 0, 0}, {0, 0, 0}, g3);
  CHECK(g3[0] == doctest::Approx(1.0 / (4.0 * std::numbers::pi)));
  CHECK(g3[1] == 0.0);
  CHECK(g3[2] == 0.0);
  eval_kernel(grad, {1e-4, 0, 0}, {0, 0, 0}, g3);
  CHECK(g3[0] == 0.0);
}

TEST_CASE("rep-gradient kernel matches finite differences of the potential") {
  KernelSpec rep{KernelSpec::Kind::RepGradient, 1.0, 0.0};
  const Vec3 x(0.3, -0.2, 0.9), y(-0.5, 0.4, 0.1);
  double vals[12];
  eval_kernel(rep, x, y, vals);  // column-major 3 x 4
  const double h = 1e-6;
  KernelSpec pot;  // single layer U(x, y)
  // column 0: -grad_x U ... applied against single-layer weights
  for (int kk = 0; kk < 3; ++kk) {
    Vec3 xp = x, xm = x;
    xp[kk] += h;
    xm[kk] -= h;
    double up, um;
    eval_kernel(pot, xp, y, &up);
    eval_kernel(pot, xm, y, &um);
    CHECK(vals[kk] == doctest::Approx(-(up - um) / (2 * h)).epsilon(1e-6));
  }
  // columns 1..3: grad_x of grad_y U components = -grad_x grad_x U
  for (int c = 0; c < 3; ++c)
    for (int kk = 0; kk < 3; ++kk) {
      Vec3 xp = x, xm = x;
      xp[kk] += h;
      xm[kk] -= h;
      double gp[3], gm[3];
      KernelSpec grad{KernelSpec::Kind::Gradient, 1.0, 0.0};
      eval_kernel(grad, xp, y, gp);
      eval_kernel(grad, xm, y, gm);
      // d/dx_k of the x-gradient component c equals the Hessian entry
      CHECK(vals[3 * (1 + c) + kk] ==
            doctest::Approx((gp[c] - gm[c]) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("cluster basis: materialized leaf equals direct rows") {
  const auto pts = random_points(300, 5);
  ClusterTree t(pts, 30);
  ClusterBasis basis(t, {3});
  for (std::size_t ni = 0; ni < t.nodes().size(); ++ni) {
    const auto& n = t.nodes()[ni];
    if (!n.is_leaf()) continue;
    const MatrixXd& V = basis.leaf_matrix(static_cast<int>(ni));
    REQUIRE(V.rows() == n.size());
    REQUIRE(V.cols() == 27);
    std::vector<double> row(27);
    for (int i = 0; i < n.size(); ++i) {
      basis.grid(static_cast<int>(ni)).lagrange_row(t.point_at(n.begin + i), row.data());
      for (int a = 0; a < 27; ++a) CHECK(V(i, a) == doctest::Approx(row[a]).epsilon(1e-13));
    }
  }
}

TEST_CASE("cluster basis: nestedness (materialize vs direct evaluation)") {
  const auto pts = random_points(400, 6);
  ClusterTree t(pts, 25);
  ClusterBasis basis(t, {4});
  std::vector<double> row(64);
  for (std::size_t ni = 0; ni < t.nodes().size(); ++ni) {
    const auto& n = t.nodes()[ni];
    const MatrixXd V = basis.materialize(static_cast<int>(ni));
    MatrixXd D(n.size(), 64);
    for (int i = 0; i < n.size(); ++i) {
      basis.grid(static_cast<int>(ni)).lagrange_row(t.point_at(n.begin + i), row.data());
      for (int a = 0; a < 64; ++a) D(i, a) = row[a];
    }
    CHECK((V - D).norm() <= 1e-12 * std::max(1.0, D.norm()));
  }
}

TEST_CASE("cluster basis: forward/backward transforms match materialization") {
  const auto pts = random_points(350, 7);
  ClusterTree t(pts, 20);
  ClusterBasis basis(t, {3});
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  VectorXd x(350);
  for (int i = 0; i < 350; ++i) x[i] = nd(rng);

  std::vector<VectorXd> xhat;
  basis.forward(x, xhat);
  for (std::size_t ni = 0; ni < t.nodes().size(); ++ni) {
    const auto& n = t.nodes()[ni];
    const MatrixXd V = basis.materialize(static_cast<int>(ni));
    const VectorXd expect = V.transpose() * x.segment(n.begin, n.size());
    CHECK((xhat[ni] - expect).norm() <= 1e-12 * std::max(1.0, expect.norm()));
  }

  // backward: y = sum over nodes of V_node yhat[node]
  std::vector<VectorXd> yhat(t.nodes().size());
  for (std::size_t ni = 0; ni < t.nodes().size(); ++ni) {
    yhat[ni].resize(27);
    for (int a = 0; a < 27; ++a) yhat[ni][a] = nd(rng);
  }
  VectorXd expect = VectorXd::Zero(350);
  for (std::size_t ni = 0; ni < t.nodes().size(); ++ni) {
    const auto& n = t.nodes()[ni];
    expect.segment(n.begin, n.size()) += basis.materialize(static_cast<int>(ni)) * yhat[ni];
  }
  VectorXd y = VectorXd::Zero(350);
  auto yhat_copy = yhat;
  basis.backward(yhat_copy, y);
  CHECK((y - expect).norm() <= 1e-12 * expect.norm());
}

TEST_CASE("h2 coulomb accuracy vs dense oracle") {
  const auto pts = random_points(2000, 8);
  ClusterTree t(pts, 250);
  BlockClusterTree blocks(t, t, {});
  ClusterBasis basis(t, {5});
  KernelSpec k;
  H2Matrix A(blocks, basis, basis, k, H2Matrix::Mode::Stored, true);

  const MatrixXd exact = dense_matrix(k, pts, pts, 0, 0, true);
  // probe with random vectors; the matvec error bounds the blockwise error
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  MatrixXd X(2000, 1), Yh = MatrixXd::Zero(2000, 1);
  for (int i = 0; i < 2000; ++i) X(i, 0) = nd(rng);
  A.apply(X, Yh);
  const VectorXd Ye = exact * X.col(0);
  CHECK((Yh.col(0) - Ye).norm() / Ye.norm() < 1e-5);
}

TEST_CASE("h2 matvec linearity and alpha scaling") {
  const auto pts = random_points(600, 13);
  ClusterTree t(pts, 50);
  BlockClusterTree blocks(t, t, {});
  ClusterBasis basis(t, {4});
  H2Matrix A(blocks, basis, basis, KernelSpec{}, H2Matrix::Mode::Stored, true);

  std::mt19937_64 rng(14);
  std::normal_distribution<double> nd;
  VectorXd x1(600), x2(600);
  for (int i = 0; i < 600; ++i) {
    x1[i] = nd(rng);
    x2[i] = nd(rng);
  }
  const VectorXd y1 = A * x1, y2 = A * x2, ys = A * (2.0 * x1 + x2);
  CHECK((ys - 2.0 * y1 - y2).norm() <= 1e-11 * ys.norm());

  MatrixXd Y = MatrixXd::Zero(600, 1);
  A.apply(x1, Y, 3.0);
  CHECK((Y.col(0) - 3.0 * y1).norm() <= 1e-11 * Y.norm());
}

TEST_CASE("h2 stored and on-the-fly agree bitwise") {
  const auto pts = random_points(1500, 15);
  ClusterTree t(pts, 100);
  BlockClusterTree blocks(t, t, {});
  ClusterBasis basis(t, {4});
  KernelSpec grad{KernelSpec::Kind::Gradient, 1.0, 1e-3};
  H2Matrix stored(blocks, basis, basis, grad, H2Matrix::Mode::Stored, true);
  H2Matrix fly(blocks, basis, basis, grad, H2Matrix::Mode::OnTheFly, true);

  std::mt19937_64 rng(16);
  std::normal_distribution<double> nd;
  MatrixXd X(1500, 1);
  for (int i = 0; i < 1500; ++i) X(i, 0) = nd(rng);
  MatrixXd Ys = MatrixXd::Zero(1500, 3), Yf = MatrixXd::Zero(1500, 3);
  stored.apply(X, Ys);
  fly.apply(X, Yf);
  CHECK(Ys == Yf);  // bitwise
  CHECK(stored.memory_bytes() > fly.memory_bytes());
}

TEST_CASE("h2 gradient accuracy vs dense oracle") {
  const auto pts = random_points(2000, 17);
  ClusterTree t(pts, 250);
  BlockClusterTree blocks(t, t, {});
  ClusterBasis basis(t, {5});
  KernelSpec grad{KernelSpec::Kind::Gradient, 1.0, 1e-3};
  H2Matrix A(blocks, basis, basis, grad, H2Matrix::Mode::Stored, true);

  std::mt19937_64 rng(18);
  std::normal_distribution<double> nd;
  MatrixXd X(2000, 1);
  for (int i = 0; i < 2000; ++i) X(i, 0) = nd(rng);
  MatrixXd Yh = MatrixXd::Zero(2000, 3), Ye = MatrixXd::Zero(2000, 3);
  A.apply(X, Yh);
  dense_apply(grad, pts, pts, X, Ye, 1.0, true);
  CHECK((Yh - Ye).norm() / Ye.norm() < 1e-4);
}

TEST_CASE("h2 diagonal matches kernel on coincident points") {
  const auto pts = random_points(200, 19);
  ClusterTree t(pts, 20);
  BlockClusterTree blocks(t, t, {});
  ClusterBasis basis(t, {3});
  KernelSpec k = regularize(KernelSpec{}, 1e-3);
  H2Matrix A(blocks, basis, basis, k, H2Matrix::Mode::Stored, false);
  const VectorXd d = A.diagonal();
  double v;
  eval_kernel(k, pts[0], pts[0], &v);
  for (int i = 0; i < 200; ++i) CHECK(d[i] == doctest::Approx(v));
}

TEST_CASE("dense oracle sanity: two point charges") {
  KernelSpec k;
  std::vector<Vec3> tgt = {{0, 0, 0}};
  std::vector<Vec3> src = {{1, 0, 0}, {0, 2, 0}};
  MatrixXd X(2, 1);
  X << 1.0, 2.0;
  MatrixXd Y = MatrixXd::Zero(1, 1);
  dense_apply(k, tgt, src, X, Y);
  CHECK(Y(0, 0) == doctest::Approx((1.0 + 1.0) / (4.0 * std::numbers::pi)));
}

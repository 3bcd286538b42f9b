#include <doctest.h>

#include "plasim/bem.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace plasim;

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

const SurfaceMesh& sphere3() {
  static const SurfaceMesh m = generate_sphere(3);
  return m;
}

const GalerkinMatrices& mats3() {
  static const GalerkinMatrices g = assemble_galerkin(sphere3());
  return g;
}

std::vector<Vec3> ball_points(int n, unsigned seed, double rmax = 0.8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts;
  while (static_cast<int>(pts.size()) < n) {
    Vec3 p(u(rng), u(rng), u(rng));
    if (p.norm() <= rmax) pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST_CASE("edge midpoint nodes are shared and counted") {
  const SurfaceMesh m = generate_sphere(2);
  const QuadNodes q = edge_midpoint_nodes(m);
  // closed triangulation: #edges = 3/2 #triangles
  CHECK(q.size() == 3 * m.num_triangles() / 2);
  for (int k = 0; k < m.num_triangles(); ++k) {
    const auto mids = m.edge_midpoints(k);
    for (int e = 0; e < 3; ++e)
      CHECK((q.points[q.tri_nodes[k][e]] - mids[e]).norm() <= 1e-14);
  }
}

TEST_CASE("mass matrix entries and row sums") {
  const SurfaceMesh m = generate_sphere(1);
  const GalerkinMatrices g = assemble_galerkin(m);
  for (int k = 0; k < m.num_triangles(); ++k) {
    CHECK(g.M.row(k).sum() == doctest::Approx(m.triangle_area(k)).epsilon(1e-13));
    for (int v = 0; v < 3; ++v)
      CHECK(g.M(k, m.triangles[k][v]) ==
            doctest::Approx(m.triangle_area(k) / 3.0).epsilon(1e-13));
  }
  CHECK(hat_integrals(m).sum() == doctest::Approx(m.total_area()).epsilon(1e-13));
}

TEST_CASE("V and D structure: symmetry, definiteness, kernel of D") {
  const SurfaceMesh m = generate_sphere(2);
  const GalerkinMatrices g = assemble_galerkin(m);
  const double vmax = g.V.cwiseAbs().maxCoeff();
  CHECK((g.V - g.V.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * vmax);
  const double dmax = g.D.cwiseAbs().maxCoeff();
  CHECK((g.D - g.D.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * dmax);
  CHECK((g.D * VectorXd::Ones(m.num_vertices())).cwiseAbs().maxCoeff() <= 1e-10);

  CHECK(Eigen::LLT<MatrixXd>(g.V).info() == Eigen::Success);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(g.D);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * dmax);
}

TEST_CASE("constant-potential identity and residual decay") {
  // (1/2 M + K) 1 = 0 for the interior problem; solving V t = rhs must give
  // t ~ 0 on every level; below the quadrature floor (~5e-5 at the default
  // singular order) refinement no longer reduces it, so the decay check only
  // fires while above that floor
  const double floor = 1e-4;
  double prev = 1e9;
  for (int level : {2, 3}) {
    const SurfaceMesh m = generate_sphere(level);
    const GalerkinMatrices g = assemble_galerkin(m);
    const VectorXd rhs =
        0.5 * g.M * VectorXd::Ones(m.num_vertices()) + g.K * VectorXd::Ones(m.num_vertices());
    const VectorXd t = Eigen::LLT<MatrixXd>(g.V).solve(rhs);
    const double res = t.cwiseAbs().maxCoeff();
    CHECK((res < prev || res <= floor));
    prev = res;
  }
  CHECK(prev <= 1e-2);
}

TEST_CASE("N0: zero charges and central unit charge") {
  const SurfaceMesh& m = sphere3();
  const QuadNodes q = edge_midpoint_nodes(m);
  CHECK(assemble_N0(m, q, {}, VectorXd(), 1.0).norm() == 0.0);

  // unit charge at the origin, beta = 1: potential 1/(4 pi) on the unit
  // sphere, so N0[k] ~ area_k / (4 pi)
  const VectorXd n0 = assemble_N0(m, q, {Vec3(0, 0, 0)}, VectorXd::Ones(1), 1.0);
  for (int k = 0; k < m.num_triangles(); ++k)
    CHECK(n0[k] == doctest::Approx(m.triangle_area(k) / kFourPi).epsilon(0.02));
}

TEST_CASE("N0: H2 path matches direct summation") {
  const SurfaceMesh& m = sphere3();
  const QuadNodes q = edge_midpoint_nodes(m);
  const auto pts = ball_points(2000, 11);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  VectorXd wq(2000);
  for (int i = 0; i < 2000; ++i) wq[i] = -u(rng);
  const VectorXd a = assemble_N0(m, q, pts, wq, 2.5);
  const VectorXd b = assemble_N0_direct(m, q, pts, wq, 2.5);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-5 * b.cwiseAbs().maxCoeff());
}

TEST_CASE("N1: zero input, central charge, Gauss law") {
  const SurfaceMesh& m = sphere3();
  const GalerkinMatrices& g = mats3();
  CHECK(assemble_N1(g, VectorXd::Zero(m.num_triangles())).norm() == 0.0);

  const QuadNodes q = edge_midpoint_nodes(m);
  const double beta = 0.5;
  const VectorXd n0 = assemble_N0(m, q, {Vec3(0, 0, 0)}, VectorXd::Ones(1), 1.0 / beta);
  const VectorXd n1 = assemble_N1(g, n0);
  // gamma_1 phi_p = -1/(4 pi beta) on the unit sphere; nodal functionals are
  // that constant times the hat integrals
  const VectorXd d = hat_integrals(m);
  const VectorXd expect = (-1.0 / (kFourPi * beta)) * d;
  for (int i = 0; i < m.num_vertices(); ++i)
    CHECK(n1[i] == doctest::Approx(expect[i]).epsilon(0.05));
  // Gauss law: total flux = -(1/beta) * total weighted charge
  CHECK(n1.sum() == doctest::Approx(-1.0 / beta).epsilon(0.02));
}

TEST_CASE("Gauss law with many interior particles") {
  const SurfaceMesh& m = sphere3();
  const GalerkinMatrices& g = mats3();
  const QuadNodes q = edge_midpoint_nodes(m);
  const auto pts = ball_points(500, 13);
  VectorXd wq = VectorXd::Constant(500, -1.0 / 500.0);
  const double beta = 2.0;
  const VectorXd n0 = assemble_N0(m, q, pts, wq, 1.0 / beta);
  const VectorXd n1 = assemble_N1(g, n0);
  CHECK(n1.sum() == doctest::Approx(-wq.sum() / beta).epsilon(0.02));
}

TEST_CASE("H2 Galerkin single layer matches dense assembly") {
  const SurfaceMesh& m = sphere3();
  const GalerkinMatrices& g = mats3();
  const H2GalerkinV h2v(m);
  std::mt19937_64 rng(14);
  std::normal_distribution<double> nd;
  VectorXd x(m.num_triangles());
  for (int i = 0; i < x.size(); ++i) x[i] = nd(rng);
  const VectorXd yd = g.V * x;
  const VectorXd yh = h2v * x;
  CHECK((yh - yd).norm() <= 1e-5 * yd.norm());
  CHECK(h2v.memory_bytes() > 0);
}

TEST_CASE("coulomb potential/field helpers against dense oracle") {
  const auto tgts = ball_points(300, 15);
  const auto srcs = ball_points(2000, 16);
  VectorXd w(2000);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 2000; ++i) w[i] = nd(rng);
  const H2Config cfg;
  const VectorXd phi = coulomb_potential(tgts, srcs, w, 3.0, cfg);
  const MatrixXd E = coulomb_field(tgts, srcs, w, 3.0, cfg);
  const KernelSpec kc = regularize({KernelSpec::Kind::Coulomb, 3.0, 0.0}, cfg.delta);
  const KernelSpec kg = regularize({KernelSpec::Kind::Gradient, 3.0, 0.0}, cfg.delta);
  MatrixXd phid = MatrixXd::Zero(300, 1), Ed = MatrixXd::Zero(300, 3);
  dense_apply(kc, tgts, srcs, w, phid);
  dense_apply(kg, tgts, srcs, w, Ed);
  CHECK((phi - phid.col(0)).norm() <= 1e-5 * phid.norm());
  CHECK((E - Ed).norm() <= 1e-4 * Ed.norm());
}

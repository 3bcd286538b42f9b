#include <doctest.h>

#include "plasim/field.hpp"

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

const NondimensionalParameters& params() {
  static const NondimensionalParameters p = make_params(0.1, 1e12, 1.0);
  return p;
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

// field of charges (weight, position) with potential scale 1/(4 pi beta)
MatrixXd analytic_field(const std::vector<Vec3>& probes,
                        const std::vector<std::pair<double, Vec3>>& charges, double beta) {
  MatrixXd E = MatrixXd::Zero(static_cast<int>(probes.size()), 3);
  for (int i = 0; i < E.rows(); ++i)
    for (const auto& [w, y] : charges) {
      const Vec3 d = probes[i] - y;
      E.row(i) += (w / (kFourPi * beta * std::pow(d.norm(), 3))) * d.transpose();
    }
  return E;
}

double image_charge_error(const SurfaceMesh& m, const NondimensionalParameters& p) {
  const GalerkinMatrices g = assemble_galerkin(m);
  const std::vector<Vec3> src = {Vec3(0.5, 0, 0)};
  const VectorXd wq = VectorXd::Ones(1);
  const TraceSolution sol = solve_dirichlet(g, m, VectorXd(), src, wq, p);
  const std::vector<Vec3> probes = {Vec3(0, 0, 0.3), Vec3(-0.4, 0.2, 0),
                                    Vec3(0.2, 0.3, -0.4), Vec3(0, -0.5, 0.1)};
  const FieldReport rep = evaluate_field_at(probes, sol, m, src, wq, p);
  // grounded unit sphere: image charge -q/R at distance 1/R on the charge axis
  const MatrixXd ref = analytic_field(
      probes, {{1.0, Vec3(0.5, 0, 0)}, {-2.0, Vec3(2.0, 0, 0)}}, p.beta);
  double err = 0;
  for (int i = 0; i < ref.rows(); ++i)
    err = std::max(err, (rep.E.row(i) - ref.row(i)).norm() / ref.row(i).norm());
  return err;
}

}  // namespace

TEST_CASE("nondimensional parameters") {
  const NondimensionalParameters p = params();
  CHECK(p.beta == doctest::Approx(5.526e-3).epsilon(0.01));
  CHECK(p.v0 == doctest::Approx(4.19e5).epsilon(0.01));
  CHECK(p.t0 == doctest::Approx(p.L0 / p.v0).epsilon(1e-12));
  CHECK(params_consistent(p));
  NondimensionalParameters bad = p;
  bad.beta *= 1.0 + 1e-6;
  CHECK_FALSE(params_consistent(bad));

  // sheath regime: ten times the density shrinks beta tenfold
  const NondimensionalParameters ps = make_params(0.1, 1e13, 1.0);
  CHECK(ps.beta == doctest::Approx(p.beta / 10.0).epsilon(1e-12));
}

TEST_CASE("dirichlet: no particles, zero data") {
  const TraceSolution sol =
      solve_dirichlet(mats3(), sphere3(), VectorXd(), {}, VectorXd(), params());
  CHECK(sol.dirichlet.norm() == 0.0);
  CHECK(sol.neumann.norm() == 0.0);
  CHECK(sol.stats.converged);
}

TEST_CASE("dirichlet: grounded sphere with central charge") {
  const SurfaceMesh& m = sphere3();
  const NondimensionalParameters& p = params();
  const std::vector<Vec3> src = {Vec3(0, 0, 0)};
  const VectorXd wq = VectorXd::Ones(1);
  const TraceSolution sol = solve_dirichlet(mats3(), m, VectorXd(), src, wq, p);

  const double c = 1.0 / (kFourPi * p.beta);
  for (int i = 0; i < m.num_vertices(); ++i)
    CHECK(sol.dirichlet[i] == doctest::Approx(-c).epsilon(1e-10));
  // harmonic extension of a constant has zero flux
  CHECK(sol.neumann.cwiseAbs().maxCoeff() <= 1e-2);

  // the interior field is then pure Coulomb
  const std::vector<Vec3> probes = {Vec3(0.3, 0, 0), Vec3(0, -0.4, 0.2), Vec3(0.1, 0.2, 0.5)};
  const FieldReport rep = evaluate_field_at(probes, sol, m, src, wq, p);
  const MatrixXd ref = analytic_field(probes, {{1.0, Vec3(0, 0, 0)}}, p.beta);
  for (int i = 0; i < ref.rows(); ++i)
    CHECK((rep.E.row(i) - ref.row(i)).norm() <= 0.02 * ref.row(i).norm());
}

TEST_CASE("dirichlet: image-charge oracle and refinement") {
  const NondimensionalParameters& p = params();
  double prev = 1e9;
  for (int level : {2, 3}) {
    const double err = image_charge_error(generate_sphere(level), p);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev <= 0.05);
}

TEST_CASE("neumann: zero data gives zero-mean constant") {
  const TraceSolution sol =
      solve_neumann(mats3(), sphere3(), VectorXd(), {}, VectorXd(), params());
  CHECK(sol.dirichlet.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(sol.neumann.norm() == 0.0);
}

TEST_CASE("neumann: harmonic flux data and stabilization invariance") {
  const SurfaceMesh& m = sphere3();
  const GalerkinMatrices& g = mats3();
  VectorXd g_N(m.num_triangles());
  for (int k = 0; k < m.num_triangles(); ++k) g_N[k] = m.triangle_normal(k).z();

  const TraceSolution a = solve_neumann(g, m, g_N, {}, VectorXd(), params());
  // the solution of gamma_1 phi = n.e3 is phi = x3 (zero mean on the sphere)
  VectorXd ref(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) ref[i] = m.vertices[i].z();
  CHECK((a.dirichlet - ref).norm() <= 0.10 * ref.norm());
  CHECK(std::abs(hat_integrals(m).dot(a.dirichlet)) <= 1e-8);

  // alpha only fixes the constant mode
  const double alpha = 1.0 / m.total_area();
  const TraceSolution b = solve_neumann(g, m, g_N, {}, VectorXd(), params(), 10.0 * alpha);
  CHECK((a.dirichlet - b.dirichlet).norm() <= 1e-8 * (1.0 + a.dirichlet.norm()));
}

TEST_CASE("mixed: all-dirichlet and all-neumann redirects") {
  const SurfaceMesh& m = sphere3();
  const GalerkinMatrices& g = mats3();
  const auto pts = ball_points(50, 21);
  const VectorXd wq = VectorXd::Constant(50, -0.02);

  BoundaryCondition bc;
  bc.regions[0] = {BCKind::Dirichlet, 0.0, ""};
  const TraceSolution sm = solve_mixed(g, m, bc, pts, wq, params());
  const TraceSolution sd = solve_dirichlet(g, m, VectorXd(), pts, wq, params());
  CHECK((sm.neumann - sd.neumann).norm() <= 1e-8 * (1.0 + sd.neumann.norm()));
  CHECK((sm.dirichlet - sd.dirichlet).norm() <= 1e-8 * (1.0 + sd.dirichlet.norm()));

  BoundaryCondition bn;
  bn.regions[0] = {BCKind::Neumann, 0.0, "flux_z"};
  const TraceSolution smn = solve_mixed(g, m, bn, {}, VectorXd(), params());
  VectorXd g_N(m.num_triangles());
  for (int k = 0; k < m.num_triangles(); ++k) g_N[k] = m.triangle_normal(k).z();
  const TraceSolution sn = solve_neumann(g, m, g_N, {}, VectorXd(), params());
  CHECK((smn.dirichlet - sn.dirichlet).norm() <= 1e-10 * (1.0 + sn.dirichlet.norm()));
}

TEST_CASE("mixed: harmonic x3 with hemisphere split") {
  SurfaceMesh m = sphere3();
  for (int k = 0; k < m.num_triangles(); ++k)
    m.region_label[k] = m.triangle_centroid(k).z() >= 0.0 ? 0 : 1;
  const GalerkinMatrices g = assemble_galerkin(m);
  BoundaryCondition bc;
  bc.regions[0] = {BCKind::Dirichlet, 0.0, "linear_z"};
  bc.regions[1] = {BCKind::Neumann, 0.0, "flux_z"};
  const TraceSolution sol = solve_mixed(g, m, bc, {}, VectorXd(), params());
  CHECK(sol.n_dirichlet_tris > 0);
  CHECK(sol.n_free_nodes > 0);
  CHECK_FALSE(sol.regular_part);

  // recovered Neumann trace on the Dirichlet part: gamma_1 x3 = n.e3
  double num = 0, den = 0;
  for (int k = 0; k < m.num_triangles(); ++k) {
    if (m.region_label[k] != 0) continue;
    const double ref = m.triangle_normal(k).z();
    num += m.triangle_area(k) * std::pow(sol.neumann[k] - ref, 2);
    den += m.triangle_area(k) * ref * ref;
  }
  CHECK(std::sqrt(num / den) <= 0.10);
  // recovered Dirichlet trace on the free nodes matches x3
  std::vector<bool> touches_dirichlet(m.num_vertices(), false);
  for (int k = 0; k < m.num_triangles(); ++k)
    if (m.region_label[k] == 0)
      for (int v : m.triangles[k]) touches_dirichlet[v] = true;
  double nd = 0, dd = 0;
  for (int i = 0; i < m.num_vertices(); ++i) {
    if (touches_dirichlet[i]) continue;
    nd += std::pow(sol.dirichlet[i] - m.vertices[i].z(), 2);
    dd += std::pow(m.vertices[i].z(), 2);
  }
  CHECK(std::sqrt(nd / dd) <= 0.10);
}

TEST_CASE("cached BvpSolver matches fresh solves across particle sets") {
  SurfaceMesh m = sphere3();
  for (int k = 0; k < m.num_triangles(); ++k)
    m.region_label[k] = m.triangle_centroid(k).z() >= 0.0 ? 0 : 1;
  const GalerkinMatrices g = assemble_galerkin(m);
  BoundaryCondition bc;
  bc.regions[0] = {BCKind::Dirichlet, 0.0, ""};
  bc.regions[1] = {BCKind::Neumann, 0.0, ""};
  const BvpSolver solver(g, m, bc, params());
  for (unsigned seed : {31u, 32u}) {
    const auto pts = ball_points(40, seed);
    const VectorXd wq = VectorXd::Constant(40, -0.025);
    const TraceSolution a = solver.solve(pts, wq);
    const TraceSolution b = solve_mixed(g, m, bc, pts, wq, params());
    CHECK((a.neumann - b.neumann).norm() <= 1e-12 * (1.0 + b.neumann.norm()));
    CHECK((a.dirichlet - b.dirichlet).norm() <= 1e-12 * (1.0 + b.dirichlet.norm()));
  }
}

TEST_CASE("gauss law through the total neumann trace") {
  const SurfaceMesh& m = sphere3();
  const NondimensionalParameters& p = params();
  const auto pts = ball_points(200, 22);
  const VectorXd wq = VectorXd::Constant(200, -1.0 / 200.0);
  const TraceSolution sol = solve_dirichlet(mats3(), m, VectorXd(), pts, wq, p);
  const VectorXd t = total_neumann_trace(sol, m, pts, wq, p);
  double flux = 0;
  for (int k = 0; k < m.num_triangles(); ++k) flux += t[k] * m.triangle_area(k);
  CHECK(flux == doctest::Approx(-wq.sum() / p.beta).epsilon(0.02));
}

TEST_CASE("superposition of particle sets") {
  const SurfaceMesh& m = sphere3();
  const NondimensionalParameters& p = params();
  const auto a = ball_points(3, 23);
  const auto b = ball_points(4, 24);
  std::vector<Vec3> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const VectorXd wa = VectorXd::Constant(3, 0.7), wb = VectorXd::Constant(4, -0.4);
  VectorXd wab(7);
  wab << wa, wb;
  const std::vector<Vec3> probes = {Vec3(0.1, 0.1, 0.1), Vec3(-0.3, 0.2, 0.4)};

  const auto field_of = [&](const std::vector<Vec3>& pts, const VectorXd& w) {
    const TraceSolution s = solve_dirichlet(mats3(), m, VectorXd(), pts, w, p);
    return evaluate_field_at(probes, s, m, pts, w, p).E;
  };
  const MatrixXd Ea = field_of(a, wa), Eb = field_of(b, wb), Eab = field_of(ab, wab);
  CHECK((Eab - Ea - Eb).norm() <= 1e-8 * (Ea.norm() + Eb.norm()));
}

TEST_CASE("field decomposition and background") {
  const SurfaceMesh& m = sphere3();
  const NondimensionalParameters& p = params();
  const auto pts = ball_points(20, 25);
  const VectorXd wq = VectorXd::Constant(20, -0.05);
  const double f = 1.0;
  const TraceSolution sol = solve_dirichlet(mats3(), m, VectorXd(), pts, wq, p, f);
  const FieldReport rep = evaluate_total_field(sol, m, pts, wq, p, f, {}, true);
  CHECK((rep.E - rep.particle - rep.boundary - rep.background).norm() <=
        1e-14 * rep.E.norm());
  for (int i = 0; i < 20; ++i)
    CHECK((rep.background.row(i).transpose() - pts[i] * (f / (3.0 * p.beta))).norm() <=
          1e-14 * pts[i].norm() / p.beta);

  // background only: traces and particles absent
  TraceSolution zero;
  zero.dirichlet = VectorXd::Zero(m.num_vertices());
  zero.neumann = VectorXd::Zero(m.num_triangles());
  const FieldReport bg = evaluate_field_at(pts, zero, m, {}, VectorXd(), p, f);
  for (int i = 0; i < 20; ++i)
    CHECK((bg.E.row(i).transpose() - pts[i] * (f / (3.0 * p.beta))).norm() <=
          1e-12 * pts[i].norm() / p.beta);
}

TEST_CASE("near-boundary particles are flagged") {
  const SurfaceMesh& m = sphere3();
  FieldConfig cfg;
  cfg.h2.delta = 0.05;
  cfg.check_near_boundary = true;
  TraceSolution zero;
  zero.dirichlet = VectorXd::Zero(m.num_vertices());
  zero.neumann = VectorXd::Zero(m.num_triangles());
  const QuadNodes q = edge_midpoint_nodes(m);
  const std::vector<Vec3> pts = {Vec3(0, 0, 0), 0.99 * q.points[0]};
  const FieldReport rep =
      evaluate_field_at(pts, zero, m, {}, VectorXd(), params(), 0.0, cfg);
  CHECK(rep.near_boundary == 1);
}

TEST_CASE("cg with jacobi solves the single layer system") {
  const GalerkinMatrices& g = mats3();
  std::mt19937_64 rng(26);
  std::normal_distribution<double> nd;
  VectorXd b(g.V.rows());
  for (int i = 0; i < b.size(); ++i) b[i] = nd(rng);
  SolveStats s;
  const VectorXd x = solve_cg([&](const VectorXd& v) { return VectorXd(g.V * v); }, b,
                              g.V.diagonal(), {}, &s);
  CHECK(s.converged);
  CHECK(s.iterations <= 200);
  const VectorXd xd = Eigen::LLT<MatrixXd>(g.V).solve(b);
  CHECK((x - xd).norm() <= 1e-7 * xd.norm());
}

#include "plasim/field.hpp"

#include <cmath>
#include <iostream>

namespace plasim {

namespace {

constexpr double kEps0 = 8.8541878128e-12;     // F/m
constexpr double kElemCharge = 1.602176634e-19;  // C
constexpr double kElectronMass = 9.1093837015e-31;  // kg

double beta_of(double L0, double n0, double kT0) {
  const double kT_J = kT0 * kElemCharge;
  const double lambda_sq = kEps0 * kT_J / (n0 * kElemCharge * kElemCharge);
  return lambda_sq / (L0 * L0);
}

// background particular solution phi_b = -f |x|^2 / (6 beta)
double background_potential(const Vec3& x, double f, double beta) {
  return -f * x.squaredNorm() / (6.0 * beta);
}

double background_flux(const Vec3& x, const Vec3& n, double f, double beta) {
  return -f * n.dot(x) / (3.0 * beta);
}

void dense_stats(const MatrixXd& A, const VectorXd& x, const VectorXd& b, const char* method,
                 SolveStats& s) {
  s.method = method;
  s.iterations = 0;
  const double bnorm = b.norm();
  s.residual = bnorm == 0.0 ? 0.0 : (b - A * x).norm() / bnorm;
  s.converged = true;
}

VectorXd solve_spd(const MatrixXd& A, const VectorXd& b, const FieldConfig& cfg,
                   SolveStats& s) {
  if (A.rows() < cfg.dense_threshold) {
    const VectorXd x = Eigen::LLT<MatrixXd>(A).solve(b);
    dense_stats(A, x, b, "llt", s);
    return x;
  }
  return solve_cg([&](const VectorXd& v) { return VectorXd(A * v); }, b, A.diagonal(),
                  cfg.solver, &s);
}

MatrixXd kernel_apply(const std::vector<Vec3>& targets, const std::vector<Vec3>& sources,
                      const Eigen::Ref<const MatrixXd>& X, const KernelSpec& kernel,
                      const H2Config& cfg, bool exclude_self = false) {
  MatrixXd Y = MatrixXd::Zero(static_cast<int>(targets.size()), kernel.n_out());
  if (sources.empty()) return Y;
  if (static_cast<long>(targets.size()) * static_cast<long>(sources.size()) < 250L * 250L) {
    dense_apply(kernel, targets, sources, X, Y, 1.0, exclude_self);
    return Y;
  }
  ClusterTree tt(targets, cfg.leaf_cap), st(sources, cfg.leaf_cap);
  BlockClusterTree blocks(tt, st, AdmissibilityConfig{cfg.eta, AdmissibilityVariant::Max});
  ClusterBasis tb(tt, InterpolationScheme{cfg.order}), sb(st, InterpolationScheme{cfg.order});
  // one application per construction: storing the blocks would only cost memory
  H2Matrix A(blocks, tb, sb, kernel, H2Matrix::Mode::OnTheFly, exclude_self);
  A.apply(X, Y);
  return Y;
}

// particle potential at the mesh vertices (scale 1/beta)
VectorXd particle_trace(const SurfaceMesh& mesh, const std::vector<Vec3>& particles,
                        const VectorXd& wq, double beta, const H2Config& cfg) {
  if (particles.empty()) return VectorXd::Zero(mesh.num_vertices());
  return coulomb_potential(mesh.vertices, particles, wq, 1.0 / beta, cfg);
}

VectorXd triangle_areas(const SurfaceMesh& mesh) {
  VectorXd a(mesh.num_triangles());
  for (int k = 0; k < mesh.num_triangles(); ++k) a[k] = mesh.triangle_area(k);
  return a;
}

}  // namespace

NondimensionalParameters make_params(double L0, double n0, double kT0) {
  NondimensionalParameters p;
  p.L0 = L0;
  p.n0 = n0;
  p.kT0 = kT0;
  p.beta = beta_of(L0, n0, kT0);
  p.v0 = std::sqrt(kT0 * kElemCharge / kElectronMass);
  p.t0 = L0 / p.v0;
  return p;
}

bool params_consistent(const NondimensionalParameters& p) {
  const double beta = beta_of(p.L0, p.n0, p.kT0);
  return std::abs(beta - p.beta) <= 1e-12 * beta;
}

TraceSolution solve_dirichlet(const GalerkinMatrices& mats, const SurfaceMesh& mesh,
                              const VectorXd& g_D, const std::vector<Vec3>& particles,
                              const VectorXd& weighted_charge,
                              const NondimensionalParameters& params, double background,
                              const FieldConfig& cfg) {
  const int nv = mesh.num_vertices();
  VectorXd phi0 = g_D.size() ? VectorXd(g_D) : VectorXd::Zero(nv);
  phi0 -= particle_trace(mesh, particles, weighted_charge, params.beta, cfg.h2);
  if (background != 0.0)
    for (int i = 0; i < nv; ++i)
      phi0[i] -= background_potential(mesh.vertices[i], background, params.beta);

  TraceSolution sol;
  sol.dirichlet = phi0;
  sol.n_dirichlet_tris = mesh.num_triangles();
  sol.n_free_nodes = 0;
  const VectorXd rhs = 0.5 * (mats.M * phi0) + mats.K * phi0;
  sol.neumann = solve_spd(mats.V, rhs, cfg, sol.stats);
  return sol;
}

TraceSolution solve_neumann(const GalerkinMatrices& mats, const SurfaceMesh& mesh,
                            const VectorXd& g_N, const std::vector<Vec3>& particles,
                            const VectorXd& weighted_charge,
                            const NondimensionalParameters& params, double alpha,
                            const FieldConfig& cfg) {
  const int nt = mesh.num_triangles();
  const int nv = mesh.num_vertices();
  const VectorXd t = g_N.size() ? VectorXd(g_N) : VectorXd::Zero(nt);

  VectorXd N1 = VectorXd::Zero(nv);
  double charge = 0.0;
  if (!particles.empty()) {
    const QuadNodes nodes = edge_midpoint_nodes(mesh);
    const VectorXd N0 =
        assemble_N0(mesh, nodes, particles, weighted_charge, 1.0 / params.beta, cfg.h2);
    N1 = assemble_N1(mats, N0);
    charge = weighted_charge.sum();
  }

  TraceSolution sol;
  sol.neumann = t;
  sol.n_dirichlet_tris = 0;
  sol.n_free_nodes = nv;
  sol.compatibility_defect = t.dot(triangle_areas(mesh)) + charge / params.beta;
  const double area = mesh.total_area();
  if (std::abs(sol.compatibility_defect) > 1e-6 * (1.0 + area))
    std::cerr << "solve_neumann: incompatible data, defect " << sol.compatibility_defect
              << "\n";

  const VectorXd d = hat_integrals(mesh);
  const double a = alpha > 0.0 ? alpha : 1.0 / area;
  const MatrixXd Dt = mats.D + a * (d * d.transpose());
  const VectorXd rhs = 0.5 * (mats.M.transpose() * t) - mats.K.transpose() * t - N1;
  VectorXd phi = solve_spd(Dt, rhs, cfg, sol.stats);
  phi.array() -= d.dot(phi) / area;
  sol.dirichlet = phi;
  return sol;
}

TraceSolution solve_mixed(const GalerkinMatrices& mats, const SurfaceMesh& mesh,
                          const BoundaryCondition& bc, const std::vector<Vec3>& particles,
                          const VectorXd& weighted_charge,
                          const NondimensionalParameters& params, double background,
                          const FieldConfig& cfg) {
  return BvpSolver(mats, mesh, bc, params, background, cfg).solve(particles,
                                                                  weighted_charge);
}

BvpSolver::BvpSolver(const GalerkinMatrices& mats, const SurfaceMesh& mesh,
                     const BoundaryCondition& bc, const NondimensionalParameters& params,
                     double background, const FieldConfig& cfg)
    : mats_(&mats), mesh_(&mesh), params_(params), background_(background), cfg_(cfg) {
  bc.validate(mesh);
  const int nt = mesh.num_triangles();
  const int nv = mesh.num_vertices();
  area_ = mesh.total_area();
  d_ = hat_integrals(mesh);

  std::vector<int> node_dtri(nv, -1);  // an incident Dirichlet triangle, if any
  std::vector<int> ntri;
  for (int k = 0; k < nt; ++k) {
    if (bc.at(mesh.region_label[k]).kind == BCKind::Dirichlet) {
      dtri_.push_back(k);
      for (int v : mesh.triangles[k]) node_dtri[v] = k;
    } else {
      ntri.push_back(k);
    }
  }

  const auto neumann_datum = [&](int k) {
    double g = bc.evaluate(mesh.region_label[k], mesh.triangle_centroid(k),
                           mesh.triangle_normal(k));
    if (background_ != 0.0)
      g -= background_flux(mesh.triangle_centroid(k), mesh.triangle_normal(k), background_,
                           params_.beta);
    return g;
  };
  const auto dirichlet_datum = [&](int i) {
    return bc.evaluate(mesh.region_label[node_dtri[i]], mesh.vertices[i],
                       mesh.triangle_normal(node_dtri[i]));
  };

  if (dtri_.empty()) {
    path_ = Path::Neumann;
    data_tris_.resize(nt);
    for (int k = 0; k < nt; ++k) data_tris_[k] = neumann_datum(k);
    const double a = 1.0 / area_;
    const MatrixXd Dt = mats.D + a * (d_ * d_.transpose());
    if (nv < cfg.dense_threshold) llt_.compute(Dt);
    rhs_static_ = 0.5 * (mats.M.transpose() * data_tris_) - mats.K.transpose() * data_tris_;
    return;
  }
  if (ntri.empty()) {
    path_ = Path::Dirichlet;
    data_nodes_.resize(nv);
    for (int i = 0; i < nv; ++i) {
      data_nodes_[i] = dirichlet_datum(i);
      if (background_ != 0.0)
        data_nodes_[i] -= background_potential(mesh.vertices[i], background_, params_.beta);
    }
    if (nt < cfg.dense_threshold) llt_.compute(mats.V);
    return;
  }

  path_ = Path::Mixed;
  for (int i = 0; i < nv; ++i)
    if (node_dtri[i] < 0) fnode_.push_back(i);
  const int nd = static_cast<int>(dtri_.size());
  const int nf = static_cast<int>(fnode_.size());

  // known data scattered into full-size vectors; the background is removed by
  // decomposition, so the system is for phi - phi_b
  data_tris_ = VectorXd::Zero(nt);
  data_nodes_ = VectorXd::Zero(nv);
  for (int k : ntri) data_tris_[k] = neumann_datum(k);
  for (int i = 0; i < nv; ++i)
    if (node_dtri[i] >= 0) {
      data_nodes_[i] = dirichlet_datum(i);
      if (background_ != 0.0)
        data_nodes_[i] -= background_potential(mesh.vertices[i], background_, params_.beta);
    }

  // block system [V^DD, -K^DN; K^DN^T, D^NN] for (t on Gamma_D, phi on free nodes)
  MatrixXd A(nd + nf, nd + nf);
  for (int a = 0; a < nd; ++a) {
    for (int c = 0; c < nd; ++c) A(a, c) = mats.V(dtri_[a], dtri_[c]);
    for (int c = 0; c < nf; ++c) A(a, nd + c) = -mats.K(dtri_[a], fnode_[c]);
  }
  for (int a = 0; a < nf; ++a) {
    for (int c = 0; c < nd; ++c) A(nd + a, c) = mats.K(dtri_[c], fnode_[a]);
    for (int c = 0; c < nf; ++c) A(nd + a, nd + c) = mats.D(fnode_[a], fnode_[c]);
  }
  if (nd + nf < cfg.dense_threshold)
    lu_.compute(A);
  else
    A_ = std::move(A);

  const VectorXd r1 =
      0.5 * (mats.M * data_nodes_) + mats.K * data_nodes_ - mats.V * data_tris_;
  const VectorXd r2 = 0.5 * (mats.M.transpose() * data_tris_) -
                      mats.K.transpose() * data_tris_ - mats.D * data_nodes_;
  rhs_static_.resize(nd + nf);
  for (int a = 0; a < nd; ++a) rhs_static_[a] = r1[dtri_[a]];
  for (int a = 0; a < nf; ++a) rhs_static_[nd + a] = r2[fnode_[a]];
}

TraceSolution BvpSolver::solve(const std::vector<Vec3>& particles,
                               const VectorXd& weighted_charge) const {
  const SurfaceMesh& mesh = *mesh_;
  const GalerkinMatrices& mats = *mats_;
  const int nt = mesh.num_triangles();
  const int nv = mesh.num_vertices();
  TraceSolution sol;

  if (path_ == Path::Dirichlet) {
    VectorXd phi0 =
        data_nodes_ - particle_trace(mesh, particles, weighted_charge, params_.beta, cfg_.h2);
    const VectorXd rhs = 0.5 * (mats.M * phi0) + mats.K * phi0;
    sol.dirichlet = std::move(phi0);
    sol.n_dirichlet_tris = nt;
    if (nt < cfg_.dense_threshold) {
      sol.neumann = llt_.solve(rhs);
      dense_stats(mats.V, sol.neumann, rhs, "llt", sol.stats);
    } else {
      sol.neumann = solve_cg([&](const VectorXd& v) { return VectorXd(mats.V * v); }, rhs,
                             mats.V.diagonal(), cfg_.solver, &sol.stats);
    }
    return sol;
  }

  VectorXd N0 = VectorXd::Zero(nt), N1 = VectorXd::Zero(nv);
  if (!particles.empty()) {
    const QuadNodes nodes = edge_midpoint_nodes(mesh);
    N0 = assemble_N0(mesh, nodes, particles, weighted_charge, 1.0 / params_.beta, cfg_.h2);
    N1 = assemble_N1(mats, N0);
  }

  if (path_ == Path::Neumann) {
    sol.neumann = data_tris_;
    sol.n_free_nodes = nv;
    sol.compatibility_defect =
        data_tris_.dot(triangle_areas(mesh)) +
        (particles.empty() ? 0.0 : weighted_charge.sum() / params_.beta);
    if (std::abs(sol.compatibility_defect) > 1e-6 * (1.0 + area_))
      std::cerr << "BvpSolver: incompatible Neumann data, defect "
                << sol.compatibility_defect << "\n";
    const VectorXd rhs = rhs_static_ - N1;
    VectorXd phi;
    if (nv < cfg_.dense_threshold) {
      phi = llt_.solve(rhs);
      sol.stats.method = "llt";
      sol.stats.converged = true;
    } else {
      const MatrixXd Dt = mats.D + (1.0 / area_) * (d_ * d_.transpose());
      phi = solve_cg([&](const VectorXd& v) { return VectorXd(Dt * v); }, rhs, Dt.diagonal(),
                     cfg_.solver, &sol.stats);
    }
    phi.array() -= d_.dot(phi) / area_;
    sol.dirichlet = std::move(phi);
    return sol;
  }

  const int nd = static_cast<int>(dtri_.size());
  const int nf = static_cast<int>(fnode_.size());
  VectorXd b = rhs_static_;
  for (int a = 0; a < nd; ++a) b[a] -= N0[dtri_[a]];
  for (int a = 0; a < nf; ++a) b[nd + a] -= N1[fnode_[a]];
  VectorXd u;
  if (A_.size() == 0) {
    u = lu_.solve(b);
    sol.stats.method = "lu";
    sol.stats.converged = true;
  } else {
    u = solve_gmres([&](const VectorXd& v) { return VectorXd(A_ * v); }, b,
                    A_.diagonal().cwiseAbs(), cfg_.solver, &sol.stats);
  }
  sol.regular_part = false;
  sol.n_dirichlet_tris = nd;
  sol.n_free_nodes = nf;
  sol.neumann = data_tris_;
  sol.dirichlet = data_nodes_;
  for (int a = 0; a < nd; ++a) sol.neumann[dtri_[a]] = u[a];
  for (int a = 0; a < nf; ++a) sol.dirichlet[fnode_[a]] = u[nd + a];
  return sol;
}

namespace {

FieldReport evaluate_core(const std::vector<Vec3>& points, const TraceSolution& traces,
                          const SurfaceMesh& mesh, const std::vector<Vec3>& particles,
                          const VectorXd& wq, const NondimensionalParameters& params,
                          double background, const FieldConfig& cfg, bool exclude_self,
                          bool retain) {
  const int n = static_cast<int>(points.size());
  FieldReport rep;

  // representation-formula gradient: single-layer weights from the Neumann
  // trace, dipole weights from the Dirichlet trace, aggregated per edge
  // midpoint node
  const QuadNodes nodes = edge_midpoint_nodes(mesh);
  MatrixXd X = MatrixXd::Zero(nodes.size(), 4);
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const double a3 = mesh.triangle_area(k) / 3.0;
    const Vec3 nrm = mesh.triangle_normal(k);
    for (int e = 0; e < 3; ++e) {
      const int m = nodes.tri_nodes[k][e];
      X(m, 0) += a3 * traces.neumann[k];
      const auto& vv = nodes.node_verts[m];
      const double ph = 0.5 * (traces.dirichlet[vv[0]] + traces.dirichlet[vv[1]]);
      X.row(m).tail<3>() += a3 * ph * nrm.transpose();
    }
  }
  // traces already carry the 1/beta magnitude of the potential
  const KernelSpec rep_kernel =
      regularize({KernelSpec::Kind::RepGradient, 1.0, 0.0}, cfg.h2.delta);
  MatrixXd Eb = kernel_apply(points, nodes.points, X, rep_kernel, cfg.h2);

  MatrixXd Ep = MatrixXd::Zero(n, 3);
  if (!particles.empty())
    Ep = coulomb_field(points, particles, wq, 1.0 / params.beta, cfg.h2, exclude_self);

  MatrixXd Ebg = MatrixXd::Zero(n, 3);
  if (background != 0.0) {
    const double c = background / (3.0 * params.beta);
    for (int i = 0; i < n; ++i) Ebg.row(i) = c * points[i].transpose();
  }

  rep.E = Eb + Ep + Ebg;
  if (retain) {
    rep.boundary = std::move(Eb);
    rep.particle = std::move(Ep);
    rep.background = std::move(Ebg);
  }
  if (cfg.check_near_boundary) {
    const double d2 = cfg.h2.delta * cfg.h2.delta;
    for (int i = 0; i < n; ++i)
      for (const Vec3& q : nodes.points)
        if ((points[i] - q).squaredNorm() < d2) {
          ++rep.near_boundary;
          break;
        }
  }
  return rep;
}

}  // namespace

FieldReport evaluate_total_field(const TraceSolution& traces, const SurfaceMesh& mesh,
                                 const std::vector<Vec3>& particles, const VectorXd& wq,
                                 const NondimensionalParameters& params, double background,
                                 const FieldConfig& cfg, bool retain_parts) {
  return evaluate_core(particles, traces, mesh, particles, wq, params, background, cfg,
                       /*exclude_self=*/true, retain_parts);
}

FieldReport evaluate_field_at(const std::vector<Vec3>& points, const TraceSolution& traces,
                              const SurfaceMesh& mesh, const std::vector<Vec3>& particles,
                              const VectorXd& wq, const NondimensionalParameters& params,
                              double background, const FieldConfig& cfg, bool retain_parts) {
  return evaluate_core(points, traces, mesh, particles, wq, params, background, cfg,
                       /*exclude_self=*/false, retain_parts);
}

VectorXd total_neumann_trace(const TraceSolution& traces, const SurfaceMesh& mesh,
                             const std::vector<Vec3>& particles, const VectorXd& wq,
                             const NondimensionalParameters& params, double background,
                             const FieldConfig& cfg) {
  VectorXd t = traces.neumann;
  const int nt = mesh.num_triangles();
  std::vector<Vec3> centroids(nt);
  for (int k = 0; k < nt; ++k) centroids[k] = mesh.triangle_centroid(k);
  if (traces.regular_part && !particles.empty()) {
    // gamma_1 phi_p = n . grad phi_p = -n . E_p
    const MatrixXd Ep = coulomb_field(centroids, particles, wq, 1.0 / params.beta, cfg.h2);
    for (int k = 0; k < nt; ++k) t[k] -= mesh.triangle_normal(k).dot(Ep.row(k));
  }
  if (background != 0.0)
    for (int k = 0; k < nt; ++k)
      t[k] += background_flux(centroids[k], mesh.triangle_normal(k), background, params.beta);
  return t;
}

} // namespace plasim

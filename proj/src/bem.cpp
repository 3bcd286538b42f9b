#include "plasim/bem.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace plasim {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

std::array<Vec3, 3> panel(const SurfaceMesh& mesh, int k) {
  return {mesh.vertex(k, 0), mesh.vertex(k, 1), mesh.vertex(k, 2)};
}

// classifies a triangle pair and produces local vertex permutations matching
// the quadrature contract: perm[new_local] = old_local
struct PairClass {
  PairKind kind;
  std::array<int, 3> px, py;
};

PairClass classify_pair(const std::array<int, 3>& ta, const std::array<int, 3>& tb,
                        bool same_triangle) {
  PairClass c;
  c.px = {0, 1, 2};
  c.py = {0, 1, 2};
  if (same_triangle) {
    c.kind = PairKind::Identical;
    return c;
  }
  // shared local index pairs
  std::array<int, 3> ax{}, ay{};
  int shared = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (ta[a] == tb[b]) {
        ax[shared] = a;
        ay[shared] = b;
        ++shared;
      }
  if (shared == 0) {
    c.kind = PairKind::Disjoint;
  } else if (shared == 1) {
    c.kind = PairKind::SharedVertex;
    c.px = {ax[0], (ax[0] + 1) % 3, (ax[0] + 2) % 3};
    c.py = {ay[0], (ay[0] + 1) % 3, (ay[0] + 2) % 3};
  } else {
    c.kind = PairKind::SharedEdge;
    // rotate x so the shared edge occupies locals (0, 1)
    int a0 = ax[0], a1 = ax[1];
    if ((a0 + 1) % 3 != a1) std::swap(a0, a1);
    c.px = {a0, a1, (a1 + 1) % 3};
    // y must present the same two vertices in the same order
    int b0 = -1, b1 = -1;
    for (int s = 0; s < 2; ++s) {
      if (tb[ay[s]] == ta[a0]) b0 = ay[s];
      if (tb[ay[s]] == ta[a1]) b1 = ay[s];
    }
    const int b2 = 3 - b0 - b1;
    c.py = {b0, b1, b2};
  }
  return c;
}

std::array<Vec3, 3> permuted(const std::array<Vec3, 3>& t, const std::array<int, 3>& p) {
  return {t[p[0]], t[p[1]], t[p[2]]};
}

// surface curl of the hat function of local vertex a on triangle k:
// curl_G lambda_a = (v_{a+1} - v_{a+2}) / (2 A)
Vec3 hat_curl(const SurfaceMesh& mesh, int k, int a) {
  return (mesh.vertex(k, (a + 1) % 3) - mesh.vertex(k, (a + 2) % 3)) /
         (2.0 * mesh.triangle_area(k));
}

}  // namespace

QuadNodes edge_midpoint_nodes(const SurfaceMesh& mesh) {
  QuadNodes q;
  q.tri_nodes.resize(mesh.num_triangles());
  std::map<std::pair<int, int>, int> edge_id;
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangles[k];
    for (int e = 0; e < 3; ++e) {
      const int i = t[e], j = t[(e + 1) % 3];
      const auto key = std::minmax(i, j);
      auto [it, inserted] = edge_id.try_emplace(key, q.size());
      if (inserted) {
        q.points.push_back(0.5 * (mesh.vertices[i] + mesh.vertices[j]));
        q.node_verts.push_back({key.first, key.second});
      }
      q.tri_nodes[k][e] = it->second;
    }
  }
  return q;
}

VectorXd hat_integrals(const SurfaceMesh& mesh) {
  VectorXd d = VectorXd::Zero(mesh.num_vertices());
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const double a3 = mesh.triangle_area(k) / 3.0;
    for (int v = 0; v < 3; ++v) d[mesh.triangles[k][v]] += a3;
  }
  return d;
}

GalerkinMatrices assemble_galerkin(const SurfaceMesh& mesh, const QuadratureConfig& quad) {
  mesh.validate();
  const int nt = mesh.num_triangles();
  const int nv = mesh.num_vertices();
  GalerkinMatrices g;
  g.V = MatrixXd::Zero(nt, nt);
  g.K = MatrixXd::Zero(nt, nv);
  g.D = MatrixXd::Zero(nv, nv);
  g.M = MatrixXd::Zero(nt, nv);

  const PanelKernel U = [](const Vec3& x, const Vec3& y) {
    return 1.0 / (kFourPi * (x - y).norm());
  };

  std::vector<Vec3> curls(3 * nt);
  for (int k = 0; k < nt; ++k)
    for (int a = 0; a < 3; ++a) curls[3 * k + a] = hat_curl(mesh, k, a);

  for (int k = 0; k < nt; ++k) {
    const double a3 = mesh.triangle_area(k) / 3.0;
    for (int v = 0; v < 3; ++v) g.M(k, mesh.triangles[k][v]) = a3;
  }

  // double-layer contribution of the ordered pair (k, l) given its class
  const auto add_K = [&](int k, int l, const PairClass& cls, const std::array<Vec3, 3>& txp,
                         const std::array<Vec3, 3>& typ) {
    // kernel n_y . (x - y) / (4 pi r^3); identically zero on the self pair
    // of a flat panel
    if (cls.kind == PairKind::Identical) return;
    const Vec3 ny = mesh.triangle_normal(l);
    const PanelKernel Kk = [&ny](const Vec3& x, const Vec3& y) {
      const Vec3 d = x - y;
      const double r = d.norm();
      return ny.dot(d) / (kFourPi * r * r * r);
    };
    const Eigen::Matrix3d IK = integrate_panel_pair(txp, typ, cls.kind, Kk, quad);
    for (int b = 0; b < 3; ++b) {
      const int j = mesh.triangles[l][cls.py[b]];
      double col = 0;
      for (int a = 0; a < 3; ++a) col += IK(a, b);
      g.K(k, j) += col;
    }
  };

  // unordered pairs: the single-layer integral is symmetric, so V and D get
  // exactly mirrored entries
  for (int k = 0; k < nt; ++k) {
    const auto tx = panel(mesh, k);
    for (int l = k; l < nt; ++l) {
      const auto cls = classify_pair(mesh.triangles[k], mesh.triangles[l], k == l);
      const auto txp = permuted(tx, cls.px);
      const auto ty = panel(mesh, l);
      const auto typ = permuted(ty, cls.py);

      const double IU_sum = integrate_panel_pair(txp, typ, cls.kind, U, quad).sum();
      g.V(k, l) = IU_sum;
      g.V(l, k) = IU_sum;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double v = curls[3 * k + a].dot(curls[3 * l + b]) * IU_sum;
          g.D(mesh.triangles[k][a], mesh.triangles[l][b]) += v;
          if (k != l) g.D(mesh.triangles[l][b], mesh.triangles[k][a]) += v;
        }

      add_K(k, l, cls, txp, typ);
      if (k != l) {
        const auto cls2 = classify_pair(mesh.triangles[l], mesh.triangles[k], false);
        add_K(l, k, cls2, permuted(ty, cls2.px), permuted(tx, cls2.py));
      }
    }
  }
  return g;
}

VectorXd assemble_N0(const SurfaceMesh& mesh, const QuadNodes& nodes,
                     const std::vector<Vec3>& particles, const VectorXd& weighted_charge,
                     double scale, const H2Config& cfg) {
  VectorXd n0 = VectorXd::Zero(mesh.num_triangles());
  if (particles.empty()) return n0;
  const VectorXd phi =
      coulomb_potential(nodes.points, particles, weighted_charge, scale, cfg);
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const double a3 = mesh.triangle_area(k) / 3.0;
    for (int e = 0; e < 3; ++e) n0[k] += a3 * phi[nodes.tri_nodes[k][e]];
  }
  return n0;
}

VectorXd assemble_N0_direct(const SurfaceMesh& mesh, const QuadNodes& nodes,
                            const std::vector<Vec3>& particles,
                            const VectorXd& weighted_charge, double scale, double delta) {
  VectorXd n0 = VectorXd::Zero(mesh.num_triangles());
  if (particles.empty()) return n0;
  const KernelSpec kernel = regularize({KernelSpec::Kind::Coulomb, scale, 0.0}, delta);
  MatrixXd phi = MatrixXd::Zero(nodes.size(), 1);
  dense_apply(kernel, nodes.points, particles, weighted_charge, phi);
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const double a3 = mesh.triangle_area(k) / 3.0;
    for (int e = 0; e < 3; ++e) n0[k] += a3 * phi(nodes.tri_nodes[k][e], 0);
  }
  return n0;
}

VectorXd assemble_N1(const GalerkinMatrices& mats, const VectorXd& N0) {
  return assemble_N1(mats, Eigen::LLT<MatrixXd>(mats.V), N0);
}

VectorXd assemble_N1(const GalerkinMatrices& mats, const Eigen::LLT<MatrixXd>& V_llt,
                     const VectorXd& N0) {
  const VectorXd z = V_llt.solve(N0);
  return (-0.5 * mats.M + mats.K).transpose() * z;
}

H2GalerkinV::H2GalerkinV(const SurfaceMesh& mesh, const QuadratureConfig& quad,
                         const H2Config& cfg) {
  const int nt = mesh.num_triangles();
  centroids_.resize(nt);
  std::vector<Box> extents(nt);
  for (int k = 0; k < nt; ++k) {
    centroids_[k] = mesh.triangle_centroid(k);
    for (int v = 0; v < 3; ++v) extents[k].expand(mesh.vertex(k, v));
  }
  tree_ = std::make_unique<ClusterTree>(centroids_, cfg.leaf_cap, &extents);
  blocks_ = std::make_unique<BlockClusterTree>(
      *tree_, *tree_, AdmissibilityConfig{cfg.eta, AdmissibilityVariant::Max});

  // leaf moments: row i = integrals of the Lagrange polynomials over tri i,
  // by the symmetric 7-point rule
  static const double l7[7][3] = {
      {1.0 / 3, 1.0 / 3, 1.0 / 3},
      {0.059715871789770, 0.470142064105115, 0.470142064105115},
      {0.470142064105115, 0.059715871789770, 0.470142064105115},
      {0.470142064105115, 0.470142064105115, 0.059715871789770},
      {0.797426985353087, 0.101286507323456, 0.101286507323456},
      {0.101286507323456, 0.797426985353087, 0.101286507323456},
      {0.101286507323456, 0.101286507323456, 0.797426985353087}};
  static const double w7[7] = {0.225,
                               0.132394152788506, 0.132394152788506, 0.132394152788506,
                               0.125939180544827, 0.125939180544827, 0.125939180544827};
  auto filler = [&mesh](const std::vector<int>& ids, const TensorGrid& grid, MatrixXd& V) {
    std::vector<double> row(grid.rank());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto t = panel(mesh, ids[i]);
      const double area = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
      V.row(static_cast<int>(i)).setZero();
      for (int qp = 0; qp < 7; ++qp) {
        const Vec3 x = l7[qp][0] * t[0] + l7[qp][1] * t[1] + l7[qp][2] * t[2];
        grid.lagrange_row(x, row.data());
        for (int alpha = 0; alpha < grid.rank(); ++alpha)
          V(static_cast<int>(i), alpha) += area * w7[qp] * row[alpha];
      }
    }
  };
  basis_ = std::make_unique<ClusterBasis>(*tree_, InterpolationScheme{cfg.order}, filler);

  const QuadratureConfig q = quad;
  H2Matrix::EntryFn entry = [&mesh, q](int i, int j, double* vals) {
    const auto cls = classify_pair(mesh.triangles[i], mesh.triangles[j], i == j);
    const auto txp = permuted(panel(mesh, i), cls.px);
    const auto typ = permuted(panel(mesh, j), cls.py);
    const PanelKernel U = [](const Vec3& x, const Vec3& y) {
      return 1.0 / (kFourPi * (x - y).norm());
    };
    vals[0] = integrate_panel_pair(txp, typ, cls.kind, U, q).sum();
  };
  op_ = std::make_unique<H2Matrix>(
      *blocks_, *basis_, *basis_, KernelSpec{KernelSpec::Kind::Coulomb, 1.0, 0.0},
      cfg.on_the_fly ? H2Matrix::Mode::OnTheFly : H2Matrix::Mode::Stored, entry);
}

VectorXd H2GalerkinV::operator*(const VectorXd& x) const { return (*op_) * x; }

std::size_t H2GalerkinV::memory_bytes() const {
  return op_->memory_bytes() + basis_->memory_bytes();
}

namespace {

MatrixXd coulomb_apply(const std::vector<Vec3>& targets, const std::vector<Vec3>& sources,
                       const VectorXd& source_weight, const KernelSpec& kernel,
                       const H2Config& cfg, bool exclude_self) {
  MatrixXd Y = MatrixXd::Zero(static_cast<int>(targets.size()), kernel.n_out());
  if (sources.empty()) return Y;
  if (static_cast<long>(targets.size()) * static_cast<long>(sources.size()) < 250L * 250L) {
    dense_apply(kernel, targets, sources, source_weight, Y, 1.0, exclude_self);
    return Y;
  }
  ClusterTree tt(targets, cfg.leaf_cap), st(sources, cfg.leaf_cap);
  BlockClusterTree blocks(tt, st, AdmissibilityConfig{cfg.eta, AdmissibilityVariant::Max});
  ClusterBasis tb(tt, InterpolationScheme{cfg.order}), sb(st, InterpolationScheme{cfg.order});
  // one application per construction: storing the blocks would only cost memory
  H2Matrix A(blocks, tb, sb, kernel, H2Matrix::Mode::OnTheFly, exclude_self);
  A.apply(source_weight, Y);
  return Y;
}

}  // namespace

VectorXd coulomb_potential(const std::vector<Vec3>& targets, const std::vector<Vec3>& sources,
                           const VectorXd& source_weight, double scale, const H2Config& cfg,
                           bool exclude_self) {
  const KernelSpec kernel = regularize({KernelSpec::Kind::Coulomb, scale, 0.0}, cfg.delta);
  return coulomb_apply(targets, sources, source_weight, kernel, cfg, exclude_self).col(0);
}

MatrixXd coulomb_field(const std::vector<Vec3>& targets, const std::vector<Vec3>& sources,
                       const VectorXd& source_weight, double scale, const H2Config& cfg,
                       bool exclude_self) {
  const KernelSpec kernel = regularize({KernelSpec::Kind::Gradient, scale, 0.0}, cfg.delta);
  return coulomb_apply(targets, sources, source_weight, kernel, cfg, exclude_self);
}

} // namespace plasim

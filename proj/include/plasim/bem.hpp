#ifndef PLASIM_BEM_HPP
#define PLASIM_BEM_HPP

#include "plasim/h2.hpp"
#include "plasim/mesh.hpp"
#include "plasim/quadrature.hpp"
#include "plasim/types.hpp"

namespace plasim {

/// Deduplicated edge-midpoint quadrature nodes (3 per triangle, shared across
/// edge-adjacent triangles). The per-triangle rule int_t f ~ (A/3) sum f(m_e)
/// is exact for quadratics.
struct QuadNodes {
  std::vector<Vec3> points;
  std::vector<std::array<int, 3>> tri_nodes;   // node ids per triangle
  std::vector<std::array<int, 2>> node_verts;  // edge endpoints per node

  int size() const { return static_cast<int>(points.size()); }
};
QuadNodes edge_midpoint_nodes(const SurfaceMesh& mesh);

/// Parameters of the H^2 machinery shared across builders.
struct H2Config {
  int order = 5;
  double eta = 2.0;
  int leaf_cap = 250;
  double delta = 1e-3;
  bool on_the_fly = false;
};

/// Dense Galerkin matrices of the Laplace boundary operators:
///   V (Nt x Nt)  single layer, P0 x P0
///   K (Nt x Nv)  double layer, hat trial x P0 test
///   D (Nv x Nv)  hypersingular via the surface-curl identity
///   M (Nt x Nv)  mass, entry area/3 for incident node/triangle pairs
struct GalerkinMatrices {
  MatrixXd V, K, D, M;
};
GalerkinMatrices assemble_galerkin(const SurfaceMesh& mesh,
                                   const QuadratureConfig& quad = {});

/// Nodal integration weights d[i] = int phi_i ds = sum of incident areas / 3.
VectorXd hat_integrals(const SurfaceMesh& mesh);

/// Newton-potential trace N0 over triangles: N0 = M_quad (Phi^T wq) with the
/// particle potential scale/(4 pi r) evaluated at the quadrature nodes
/// through the H^2 operator (or densely for small sets).
VectorXd assemble_N0(const SurfaceMesh& mesh, const QuadNodes& nodes,
                     const std::vector<Vec3>& particles, const VectorXd& weighted_charge,
                     double scale, const H2Config& cfg = {});
/// Direct-summation oracle for assemble_N0.
VectorXd assemble_N0_direct(const SurfaceMesh& mesh, const QuadNodes& nodes,
                            const std::vector<Vec3>& particles,
                            const VectorXd& weighted_charge, double scale,
                            double delta = 1e-3);

/// N1 over nodes from the indirect identity: solve V z = N0, then
/// N1 = (-1/2 M + K)^T z. The overload without a factorization factors V.
VectorXd assemble_N1(const GalerkinMatrices& mats, const VectorXd& N0);
VectorXd assemble_N1(const GalerkinMatrices& mats, const Eigen::LLT<MatrixXd>& V_llt,
                     const VectorXd& N0);

/// H^2-compressed Galerkin single-layer operator (P0 x P0): nearfield pairs
/// by singular quadrature, farfield through triangle-moment cluster bases.
class H2GalerkinV {
public:
  H2GalerkinV(const SurfaceMesh& mesh, const QuadratureConfig& quad = {},
              const H2Config& cfg = {});

  VectorXd operator*(const VectorXd& x) const;
  std::size_t memory_bytes() const;

private:
  std::vector<Vec3> centroids_;
  std::unique_ptr<ClusterTree> tree_;
  std::unique_ptr<BlockClusterTree> blocks_;
  std::unique_ptr<ClusterBasis> basis_;
  std::unique_ptr<H2Matrix> op_;
};

/// Coulomb potential / field of weighted sources at arbitrary targets through
/// the H^2 machinery; trees and bases are built per call.
VectorXd coulomb_potential(const std::vector<Vec3>& targets, const std::vector<Vec3>& sources,
                           const VectorXd& source_weight, double scale,
                           const H2Config& cfg = {}, bool exclude_self = false);
MatrixXd coulomb_field(const std::vector<Vec3>& targets, const std::vector<Vec3>& sources,
                       const VectorXd& source_weight, double scale,
                       const H2Config& cfg = {}, bool exclude_self = false);

} // namespace plasim

#endif

#ifndef PLASIM_FIELD_HPP
#define PLASIM_FIELD_HPP

#include "plasim/bem.hpp"
#include "plasim/solvers.hpp"

namespace plasim {

/// Reference scales of the nondimensionalization: length L0, density n0,
/// temperature kT0; derived thermal velocity v0, time t0 = L0/v0 and
/// beta = (lambda_D/L0)^2.
struct NondimensionalParameters {
  double L0 = 0.1;    // m
  double n0 = 1e12;   // m^-3
  double kT0 = 1.0;   // eV
  double beta = 0.0;
  double t0 = 0.0;    // s
  double v0 = 0.0;    // m/s
};

NondimensionalParameters make_params(double L0, double n0, double kT0);
/// beta recomputed from (L0, n0, kT0) matches the stored value to 1e-12.
bool params_consistent(const NondimensionalParameters& p);

/// Boundary traces of the harmonic remainder of the potential: nodal hat
/// coefficients of the Dirichlet trace and per-triangle constants of the
/// Neumann trace. `regular_part` marks the decomposition convention (traces
/// of phi with the particle Coulomb part and the background removed); the
/// mixed solver removes only the background.
struct TraceSolution {
  VectorXd dirichlet;        // over mesh nodes
  VectorXd neumann;          // over triangles
  int n_dirichlet_tris = 0;  // leading block of the mixed ordering
  int n_free_nodes = 0;      // leading block of the mixed ordering
  bool regular_part = true;
  double compatibility_defect = 0.0;  // Neumann data defect, if applicable
  SolveStats stats;
};

struct FieldConfig {
  H2Config h2;
  SolverConfig solver;
  int dense_threshold = 6000;  // dense factorization below, iterative above
  bool check_near_boundary = false;
};

/// Per-particle electric field with its optional decomposition; when parts
/// are retained, E equals their sum exactly.
struct FieldReport {
  MatrixXd E;
  MatrixXd particle, boundary, background;
  int near_boundary = 0;  // points within delta of the surface quadrature nodes
};

/// Pure Dirichlet problem via the decomposition path: the nodal data of the
/// harmonic part is g_D minus the particle potential (and the background
/// potential, scaled by `background`), then V t0 = (1/2 M + K) phi0.
TraceSolution solve_dirichlet(const GalerkinMatrices& mats, const SurfaceMesh& mesh,
                              const VectorXd& g_D, const std::vector<Vec3>& particles,
                              const VectorXd& weighted_charge,
                              const NondimensionalParameters& params,
                              double background = 0.0, const FieldConfig& cfg = {});

/// Pure Neumann problem with rank-one stabilization D + alpha d d^T; alpha <= 0
/// selects the default 1/area. The Dirichlet trace is returned with zero mean.
TraceSolution solve_neumann(const GalerkinMatrices& mats, const SurfaceMesh& mesh,
                            const VectorXd& g_N, const std::vector<Vec3>& particles,
                            const VectorXd& weighted_charge,
                            const NondimensionalParameters& params, double alpha = 0.0,
                            const FieldConfig& cfg = {});

/// Mixed problem: 2x2 block system over the unknown Neumann trace on the
/// Dirichlet triangles and the unknown Dirichlet trace on the nodes touching
/// no Dirichlet triangle. All-Dirichlet input redirects to solve_dirichlet,
/// all-Neumann to solve_neumann.
TraceSolution solve_mixed(const GalerkinMatrices& mats, const SurfaceMesh& mesh,
                          const BoundaryCondition& bc, const std::vector<Vec3>& particles,
                          const VectorXd& weighted_charge,
                          const NondimensionalParameters& params, double background = 0.0,
                          const FieldConfig& cfg = {});

/// Boundary value problem with the factorization cached across solves (the
/// mesh, boundary data and background are fixed; the particles change every
/// time step). Chooses the pure-Dirichlet, stabilized-Neumann or mixed path
/// from the boundary condition table.
class BvpSolver {
public:
  BvpSolver(const GalerkinMatrices& mats, const SurfaceMesh& mesh,
            const BoundaryCondition& bc, const NondimensionalParameters& params,
            double background = 0.0, const FieldConfig& cfg = {});

  TraceSolution solve(const std::vector<Vec3>& particles,
                      const VectorXd& weighted_charge) const;

private:
  enum class Path { Dirichlet, Neumann, Mixed };
  const GalerkinMatrices* mats_;
  const SurfaceMesh* mesh_;
  NondimensionalParameters params_;
  double background_;
  FieldConfig cfg_;
  Path path_;
  Eigen::LLT<MatrixXd> llt_;          // V (Dirichlet path) or D-tilde (Neumann)
  Eigen::PartialPivLU<MatrixXd> lu_;  // mixed block system
  MatrixXd A_;                        // mixed block kept for GMRES above threshold
  VectorXd data_nodes_, data_tris_;   // boundary data, background removed
  std::vector<int> dtri_, fnode_;     // mixed index orderings
  VectorXd rhs_static_;               // mixed rhs without the Newton potentials
  VectorXd d_;
  double area_ = 0.0;
};

/// Total field at the particle positions (self-interaction excluded):
/// boundary part from the representation-formula gradient over the edge
/// midpoint quadrature nodes, particle Coulomb part, and background part
/// scale * x / (3 beta).
FieldReport evaluate_total_field(const TraceSolution& traces, const SurfaceMesh& mesh,
                                 const std::vector<Vec3>& particles,
                                 const VectorXd& weighted_charge,
                                 const NondimensionalParameters& params,
                                 double background = 0.0, const FieldConfig& cfg = {},
                                 bool retain_parts = false);

/// Same field evaluated at probe points distinct from the sources.
FieldReport evaluate_field_at(const std::vector<Vec3>& points, const TraceSolution& traces,
                              const SurfaceMesh& mesh, const std::vector<Vec3>& particles,
                              const VectorXd& weighted_charge,
                              const NondimensionalParameters& params,
                              double background = 0.0, const FieldConfig& cfg = {},
                              bool retain_parts = false);

/// Neumann trace of the full potential per triangle: the solved trace plus,
/// under the decomposition convention, the analytic particle and background
/// fluxes at the centroids. Integrates to -(1/beta) * total weighted charge.
VectorXd total_neumann_trace(const TraceSolution& traces, const SurfaceMesh& mesh,
                             const std::vector<Vec3>& particles,
                             const VectorXd& weighted_charge,
                             const NondimensionalParameters& params,
                             double background = 0.0, const FieldConfig& cfg = {});

} // namespace plasim

#endif

#ifndef PLASIM_SOLVERS_HPP
#define PLASIM_SOLVERS_HPP

#include "plasim/types.hpp"

#include <functional>
#include <string>

namespace plasim {

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::string method;
};

using LinOp = std::function<VectorXd(const VectorXd&)>;

struct SolverConfig {
  double tol = 1e-8;   // relative residual
  int max_iterations = 2000;
  int restart = 80;    // GMRES only
};

/// Preconditioned conjugate gradients for SPD operators. `precond_diag` may be
/// empty (no preconditioning) or hold the operator diagonal (Jacobi).
VectorXd solve_cg(const LinOp& A, const VectorXd& b, const VectorXd& precond_diag,
                  const SolverConfig& cfg, SolveStats* stats = nullptr);

/// Restarted GMRES with optional Jacobi preconditioning (right-preconditioned).
VectorXd solve_gmres(const LinOp& A, const VectorXd& b, const VectorXd& precond_diag,
                     const SolverConfig& cfg, SolveStats* stats = nullptr);

} // namespace plasim

#endif

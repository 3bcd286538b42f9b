#include "plasim/solvers.hpp"

#include <cmath>

namespace plasim {

namespace {

VectorXd apply_precond(const VectorXd& diag, const VectorXd& r) {
  if (diag.size() == 0) return r;
  return r.cwiseQuotient(diag);
}

}  // namespace

VectorXd solve_cg(const LinOp& A, const VectorXd& b, const VectorXd& precond_diag,
                  const SolverConfig& cfg, SolveStats* stats) {
  const double bnorm = b.norm();
  VectorXd x = VectorXd::Zero(b.size());
  SolveStats s;
  s.method = "cg";
  if (bnorm == 0.0) {
    s.converged = true;
    if (stats) *stats = s;
    return x;
  }
  VectorXd r = b;
  VectorXd z = apply_precond(precond_diag, r);
  VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    s.residual = r.norm() / bnorm;
    if (s.residual <= cfg.tol) {
      s.converged = true;
      break;
    }
    const VectorXd Ap = A(p);
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    z = apply_precond(precond_diag, r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
    s.iterations = it + 1;
  }
  s.residual = (b - A(x)).norm() / bnorm;
  if (!s.converged) s.converged = s.residual <= cfg.tol;
  if (stats) *stats = s;
  return x;
}

VectorXd solve_gmres(const LinOp& A, const VectorXd& b, const VectorXd& precond_diag,
                     const SolverConfig& cfg, SolveStats* stats) {
  const int n = static_cast<int>(b.size());
  const double bnorm = b.norm();
  VectorXd x = VectorXd::Zero(n);
  SolveStats s;
  s.method = "gmres";
  if (bnorm == 0.0) {
    s.converged = true;
    if (stats) *stats = s;
    return x;
  }
  const int m = std::min(cfg.restart, n);
  int total_it = 0;
  while (total_it < cfg.max_iterations && !s.converged) {
    VectorXd r = b - A(x);
    double beta = r.norm();
    if (beta / bnorm <= cfg.tol) {
      s.converged = true;
      break;
    }
    MatrixXd V(n, m + 1);
    MatrixXd H = MatrixXd::Zero(m + 1, m);
    V.col(0) = r / beta;
    VectorXd g = VectorXd::Zero(m + 1);
    g[0] = beta;
    std::vector<double> cs(m), sn(m);
    int k = 0;
    for (; k < m && total_it < cfg.max_iterations; ++k, ++total_it) {
      VectorXd w = A(apply_precond(precond_diag, V.col(k)));
      for (int i = 0; i <= k; ++i) {
        H(i, k) = w.dot(V.col(i));
        w -= H(i, k) * V.col(i);
      }
      H(k + 1, k) = w.norm();
      if (H(k + 1, k) > 0) V.col(k + 1) = w / H(k + 1, k);
      // apply accumulated Givens rotations, then form a new one
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = denom == 0 ? 1.0 : H(k, k) / denom;
      sn[k] = denom == 0 ? 0.0 : H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      s.residual = std::abs(g[k + 1]) / bnorm;
      if (s.residual <= cfg.tol) {
        ++k;
        ++total_it;
        s.converged = true;
        break;
      }
    }
    if (k > 0) {
      // back substitution and preconditioned update
      VectorXd y = VectorXd::Zero(k);
      for (int i = k - 1; i >= 0; --i) {
        double acc = g[i];
        for (int j = i + 1; j < k; ++j) acc -= H(i, j) * y[j];
        y[i] = acc / H(i, i);
      }
      VectorXd update = VectorXd::Zero(n);
      for (int i = 0; i < k; ++i) update += y[i] * V.col(i);
      x += apply_precond(precond_diag, update);
    } else {
      break;
    }
  }
  s.iterations = total_it;
  s.residual = (b - A(x)).norm() / bnorm;
  s.converged = s.residual <= cfg.tol;
  if (stats) *stats = s;
  return x;
}

} // namespace plasim

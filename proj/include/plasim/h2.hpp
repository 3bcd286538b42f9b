#ifndef PLASIM_H2_HPP
#define PLASIM_H2_HPP

#include "plasim/cluster.hpp"
#include "plasim/interpolation.hpp"
#include "plasim/types.hpp"

#include <functional>
#include <memory>

namespace plasim {

/// A family of scalar kernels sharing the target-source distance computation.
/// eval fills an n_out x n_in column-major array of kernel values.
struct KernelSpec {
  enum class Kind { Coulomb, Gradient, RepGradient };
  Kind kind = Kind::Coulomb;
  double scale = 1.0;   // e.g. 1/beta for charge-to-potential conversion
  double delta = 0.0;   // regularization radius

  int n_in() const { return kind == Kind::RepGradient ? 4 : 1; }
  int n_out() const { return kind == Kind::Coulomb ? 1 : 3; }
};

KernelSpec regularize(KernelSpec kernel, double delta);

/// Evaluates the family at a target/source pair; vals has n_out*n_in entries.
void eval_kernel(const KernelSpec& k, const Vec3& target, const Vec3& source, double* vals);

/// Nested cluster basis from tensorized Chebyshev-Lagrange interpolation.
/// Leaves store moment matrices (|sigma| x d^3), non-leaves only transfer
/// matrices to be applied along the tree.
class ClusterBasis {
public:
  /// Fills the leaf moment matrix for a cluster: row i corresponds to the
  /// original index ids[i], columns to the d^3 Lagrange polynomials.
  using LeafFiller =
      std::function<void(const std::vector<int>& ids, const TensorGrid&, MatrixXd&)>;

  /// Default filler: point evaluation (V[i][alpha] = L^alpha(x_i)).
  ClusterBasis(const ClusterTree& tree, const InterpolationScheme& scheme);
  ClusterBasis(const ClusterTree& tree, const InterpolationScheme& scheme, LeafFiller filler);

  const ClusterTree& tree() const { return *tree_; }
  int rank() const { return scheme_.rank(); }
  const TensorGrid& grid(int node) const { return grids_[node]; }
  const MatrixXd& leaf_matrix(int node) const { return leaf_[node]; }
  const MatrixXd& transfer_to_parent(int node) const { return transfer_[node]; }

  /// xhat[node] = V_node^T x for all nodes (x in tree permutation order).
  void forward(const VectorXd& x, std::vector<VectorXd>& xhat) const;
  /// y += V_node yhat[node] accumulated over all nodes (tree order).
  void backward(std::vector<VectorXd>& yhat, VectorXd& y) const;

  /// Materializes the full V_sigma through the transfer matrices (tests).
  MatrixXd materialize(int node) const;

  std::size_t memory_bytes() const;

private:
  const ClusterTree* tree_;
  InterpolationScheme scheme_;
  std::vector<TensorGrid> grids_;
  std::vector<MatrixXd> leaf_;      // empty for non-leaves
  std::vector<MatrixXd> transfer_;  // empty for the root

  void build(LeafFiller filler);
};

/// H^2 operator: block cluster tree + nested bases + coupling matrices on
/// admissible leaves + dense nearfield. In on-the-fly mode no block is kept;
/// coupling and nearfield matrices are produced and discarded per matvec.
class H2Matrix {
public:
  enum class Mode { Stored, OnTheFly };

  /// Entry generator for nearfield blocks; fills n_out*n_in values for the
  /// original index pair (i, j).
  using EntryFn = std::function<void(int i, int j, double* vals)>;

  /// Nystrom operator: kernel evaluated between the trees' point sets.
  H2Matrix(const BlockClusterTree& blocks, const ClusterBasis& row_basis,
           const ClusterBasis& col_basis, const KernelSpec& kernel, Mode mode,
           bool exclude_diagonal = false);

  /// Same, with custom nearfield entries (Galerkin assembly).
  H2Matrix(const BlockClusterTree& blocks, const ClusterBasis& row_basis,
           const ClusterBasis& col_basis, const KernelSpec& kernel, Mode mode,
           EntryFn nearfield_entry);

  int rows() const { return blocks_->rows().num_points(); }
  int cols() const { return blocks_->cols().num_points(); }
  int n_in() const { return kernel_.n_in(); }
  int n_out() const { return kernel_.n_out(); }

  /// Y += alpha * A * X with X (cols x n_in), Y (rows x n_out).
  void apply(const Eigen::Ref<const MatrixXd>& X, Eigen::Ref<MatrixXd> Y,
             double alpha = 1.0) const;

  /// Convenience for scalar families.
  VectorXd operator*(const VectorXd& x) const;

  /// Diagonal of the operator (from nearfield; Jacobi preconditioning).
  VectorXd diagonal() const;

  std::size_t memory_bytes() const;

private:
  const BlockClusterTree* blocks_;
  const ClusterBasis* rowb_;
  const ClusterBasis* colb_;
  KernelSpec kernel_;
  Mode mode_;
  bool exclude_diagonal_ = false;
  EntryFn entry_;

  // stored mode caches, indexed like the block lists
  std::vector<std::vector<MatrixXd>> coupling_;   // per admissible block, n_out*n_in
  std::vector<std::vector<MatrixXd>> nearfield_;  // per nearfield block, n_out*n_in

  void build_coupling(const BlockClusterTree::Block& b, std::vector<MatrixXd>& K) const;
  void build_nearfield(const BlockClusterTree::Block& b, std::vector<MatrixXd>& N) const;
  void precompute();
};

/// Dense reference application of a kernel family: Y += alpha * A * X with A
/// evaluated pairwise (test oracle; quadratic cost).
void dense_apply(const KernelSpec& kernel, const std::vector<Vec3>& targets,
                 const std::vector<Vec3>& sources, const Eigen::Ref<const MatrixXd>& X,
                 Eigen::Ref<MatrixXd> Y, double alpha = 1.0, bool exclude_diagonal = false);

/// Dense matrix of a scalar kernel family component (test oracle).
MatrixXd dense_matrix(const KernelSpec& kernel, const std::vector<Vec3>& targets,
                      const std::vector<Vec3>& sources, int out = 0, int in = 0,
                      bool exclude_diagonal = false);

} // namespace plasim

#endif

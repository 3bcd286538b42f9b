#include "plasim/h2.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace plasim {

namespace {
constexpr double four_pi = 4.0 * std::numbers::pi;
}

KernelSpec regularize(KernelSpec kernel, double delta) {
  if (delta < 0) throw std::invalid_argument("delta must be >= 0");
  kernel.delta = delta;
  return kernel;
}

void eval_kernel(const KernelSpec& k, const Vec3& target, const Vec3& source, double* vals) {
  const Vec3 d = target - source;
  const double r2 = d.squaredNorm();
  const double r = std::sqrt(r2);
  switch (k.kind) {
    case KernelSpec::Kind::Coulomb: {
      vals[0] = (r > k.delta) ? k.scale / (four_pi * r) : k.scale / (four_pi * k.delta);
      return;
    }
    case KernelSpec::Kind::Gradient: {
      // components of scale * (x - y) / (4 pi |x-y|^3); zero inside the delta ball
      if (r <= k.delta) {
        vals[0] = vals[1] = vals[2] = 0.0;
        return;
      }
      const double c = k.scale / (four_pi * r2 * r);
      vals[0] = c * d.x();
      vals[1] = c * d.y();
      vals[2] = c * d.z();
      return;
    }
    case KernelSpec::Kind::RepGradient: {
      // column 0: -grad_x U against the single-layer density,
      // columns 1..3: the mixed Hessian of U against dipole weights.
      if (r <= k.delta) {
        for (int i = 0; i < 12; ++i) vals[i] = 0.0;
        return;
      }
      const double inv_r3 = 1.0 / (four_pi * r2 * r);
      const double inv_r5 = 3.0 * inv_r3 / r2;
      for (int kk = 0; kk < 3; ++kk) vals[kk] = k.scale * d[kk] * inv_r3;
      for (int c = 0; c < 3; ++c)
        for (int kk = 0; kk < 3; ++kk)
          vals[3 * (1 + c) + kk] =
              k.scale * (((kk == c) ? inv_r3 : 0.0) - d[kk] * d[c] * inv_r5);
      return;
    }
  }
}

ClusterBasis::ClusterBasis(const ClusterTree& tree, const InterpolationScheme& scheme)
    : ClusterBasis(tree, scheme, LeafFiller{}) {}

ClusterBasis::ClusterBasis(const ClusterTree& tree, const InterpolationScheme& scheme,
                           LeafFiller filler)
    : tree_(&tree), scheme_(scheme) {
  build(std::move(filler));
}

void ClusterBasis::build(LeafFiller filler) {
  const auto& nodes = tree_->nodes();
  grids_.reserve(nodes.size());
  for (const auto& n : nodes) grids_.emplace_back(n.box, scheme_.order);
  leaf_.resize(nodes.size());
  transfer_.resize(nodes.size());
  const int r = rank();
  std::vector<double> row(r);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) {
      if (filler) {
        std::vector<int> ids(tree_->perm().begin() + n.begin, tree_->perm().begin() + n.end);
        leaf_[i].resize(n.size(), r);
        filler(ids, grids_[i], leaf_[i]);
      } else {
        leaf_[i].resize(n.size(), r);
        for (int p = 0; p < n.size(); ++p) {
          grids_[i].lagrange_row(tree_->point_at(n.begin + p), row.data());
          for (int a = 0; a < r; ++a) leaf_[i](p, a) = row[a];
        }
      }
    }
    if (n.parent >= 0) {
      // E_{(sigma', sigma)}[alpha', alpha] = L_sigma^alpha(x_{sigma'}^{alpha'})
      transfer_[i].resize(r, r);
      for (int ap = 0; ap < r; ++ap) {
        grids_[n.parent].lagrange_row(grids_[i].node(ap), row.data());
        for (int a = 0; a < r; ++a) transfer_[i](ap, a) = row[a];
      }
    }
  }
}

void ClusterBasis::forward(const VectorXd& x, std::vector<VectorXd>& xhat) const {
  const auto& nodes = tree_->nodes();
  xhat.assign(nodes.size(), VectorXd());
  for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; --i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) {
      xhat[i].noalias() = leaf_[i].transpose() * x.segment(n.begin, n.size());
    } else {
      xhat[i].noalias() = transfer_[n.left].transpose() * xhat[n.left];
      xhat[i].noalias() += transfer_[n.right].transpose() * xhat[n.right];
    }
  }
}

void ClusterBasis::backward(std::vector<VectorXd>& yhat, VectorXd& y) const {
  const auto& nodes = tree_->nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (yhat[i].size() == 0) continue;
    if (n.is_leaf()) {
      y.segment(n.begin, n.size()).noalias() += leaf_[i] * yhat[i];
    } else {
      for (int c : {n.left, n.right}) {
        if (yhat[c].size() == 0) yhat[c] = VectorXd::Zero(rank());
        yhat[c].noalias() += transfer_[c] * yhat[i];
      }
    }
  }
}

MatrixXd ClusterBasis::materialize(int node) const {
  const auto& n = tree_->nodes()[node];
  if (n.is_leaf()) return leaf_[node];
  MatrixXd v(n.size(), rank());
  const MatrixXd left = materialize(n.left) * transfer_[n.left];
  const MatrixXd right = materialize(n.right) * transfer_[n.right];
  v << left, right;
  return v;
}

std::size_t ClusterBasis::memory_bytes() const {
  std::size_t b = 0;
  for (const auto& m : leaf_) b += sizeof(double) * m.size();
  for (const auto& m : transfer_) b += sizeof(double) * m.size();
  return b;
}

H2Matrix::H2Matrix(const BlockClusterTree& blocks, const ClusterBasis& row_basis,
                   const ClusterBasis& col_basis, const KernelSpec& kernel, Mode mode,
                   bool exclude_diagonal)
    : blocks_(&blocks), rowb_(&row_basis), colb_(&col_basis), kernel_(kernel),
      mode_(mode), exclude_diagonal_(exclude_diagonal) {
  precompute();
}

H2Matrix::H2Matrix(const BlockClusterTree& blocks, const ClusterBasis& row_basis,
                   const ClusterBasis& col_basis, const KernelSpec& kernel, Mode mode,
                   EntryFn nearfield_entry)
    : blocks_(&blocks), rowb_(&row_basis), colb_(&col_basis), kernel_(kernel),
      mode_(mode), entry_(std::move(nearfield_entry)) {
  precompute();
}

void H2Matrix::precompute() {
  if (mode_ != Mode::Stored) return;
  coupling_.resize(blocks_->admissible().size());
  for (std::size_t b = 0; b < coupling_.size(); ++b)
    build_coupling(blocks_->admissible()[b], coupling_[b]);
  nearfield_.resize(blocks_->nearfield().size());
  for (std::size_t b = 0; b < nearfield_.size(); ++b)
    build_nearfield(blocks_->nearfield()[b], nearfield_[b]);
}

namespace {

// column-batched kernel evaluation against gathered target coordinates;
// operation order mirrors eval_kernel elementwise, so stored and on-the-fly
// products stay bit-identical with the scalar path
void eval_kernel_column(const KernelSpec& k, const Eigen::ArrayXd& tx,
                        const Eigen::ArrayXd& ty, const Eigen::ArrayXd& tz, const Vec3& y,
                        std::vector<MatrixXd>& N, int j) {
  const Eigen::ArrayXd dx = tx - y.x(), dy = ty - y.y(), dz = tz - y.z();
  const Eigen::ArrayXd r2 = dx * dx + dy * dy + dz * dz;
  const Eigen::ArrayXd r = r2.sqrt();
  const auto far = (r > k.delta);
  switch (k.kind) {
    case KernelSpec::Kind::Coulomb: {
      N[0].col(j) = far.select(k.scale / (four_pi * r), k.scale / (four_pi * k.delta));
      return;
    }
    case KernelSpec::Kind::Gradient: {
      const Eigen::ArrayXd c = k.scale / (four_pi * r2 * r);
      N[0].col(j) = far.select(c * dx, 0.0);
      N[1].col(j) = far.select(c * dy, 0.0);
      N[2].col(j) = far.select(c * dz, 0.0);
      return;
    }
    case KernelSpec::Kind::RepGradient: {
      const Eigen::ArrayXd inv_r3 = 1.0 / (four_pi * r2 * r);
      const Eigen::ArrayXd inv_r5 = 3.0 * inv_r3 / r2;
      const Eigen::ArrayXd* d[3] = {&dx, &dy, &dz};
      for (int kk = 0; kk < 3; ++kk)
        N[kk].col(j) = far.select(k.scale * *d[kk] * inv_r3, 0.0);
      for (int c = 0; c < 3; ++c)
        for (int kk = 0; kk < 3; ++kk) {
          if (kk == c)
            N[3 * (1 + c) + kk].col(j) =
                far.select(k.scale * (inv_r3 - *d[kk] * *d[c] * inv_r5), 0.0);
          else
            N[3 * (1 + c) + kk].col(j) =
                far.select(k.scale * (-(*d[kk] * *d[c] * inv_r5)), 0.0);
        }
      return;
    }
  }
}

}  // namespace

void H2Matrix::build_coupling(const BlockClusterTree::Block& b,
                              std::vector<MatrixXd>& K) const {
  const int nc = kernel_.n_in() * kernel_.n_out();
  const int r = rowb_->rank(), c = colb_->rank();
  K.assign(nc, MatrixXd(r, c));
  const auto& gr = rowb_->grid(b.row);
  const auto& gc = colb_->grid(b.col);
  Eigen::ArrayXd tx(r), ty(r), tz(r);
  for (int alpha = 0; alpha < r; ++alpha) {
    const Vec3 x = gr.node(alpha);
    tx[alpha] = x.x();
    ty[alpha] = x.y();
    tz[alpha] = x.z();
  }
  for (int beta = 0; beta < c; ++beta)
    eval_kernel_column(kernel_, tx, ty, tz, gc.node(beta), K, beta);
}

void H2Matrix::build_nearfield(const BlockClusterTree::Block& b,
                               std::vector<MatrixXd>& N) const {
  const int nc = kernel_.n_in() * kernel_.n_out();
  const auto& rn = blocks_->rows().nodes()[b.row];
  const auto& cn = blocks_->cols().nodes()[b.col];
  N.assign(nc, MatrixXd(rn.size(), cn.size()));
  if (entry_) {
    std::vector<double> vals(nc);
    for (int j = 0; j < cn.size(); ++j) {
      const int cj = blocks_->cols().perm()[cn.begin + j];
      for (int i = 0; i < rn.size(); ++i) {
        const int ri = blocks_->rows().perm()[rn.begin + i];
        if (exclude_diagonal_ && ri == cj) {
          for (int q = 0; q < nc; ++q) N[q](i, j) = 0.0;
          continue;
        }
        entry_(ri, cj, vals.data());
        for (int q = 0; q < nc; ++q) N[q](i, j) = vals[q];
      }
    }
    return;
  }
  Eigen::ArrayXd tx(rn.size()), ty(rn.size()), tz(rn.size());
  for (int i = 0; i < rn.size(); ++i) {
    const Vec3& x = blocks_->rows().points()[blocks_->rows().perm()[rn.begin + i]];
    tx[i] = x.x();
    ty[i] = x.y();
    tz[i] = x.z();
  }
  for (int j = 0; j < cn.size(); ++j) {
    const int cj = blocks_->cols().perm()[cn.begin + j];
    eval_kernel_column(kernel_, tx, ty, tz, blocks_->cols().points()[cj], N, j);
    if (exclude_diagonal_)
      for (int i = 0; i < rn.size(); ++i)
        if (blocks_->rows().perm()[rn.begin + i] == cj)
          for (int q = 0; q < nc; ++q) N[q](i, j) = 0.0;
  }
}

void H2Matrix::apply(const Eigen::Ref<const MatrixXd>& X, Eigen::Ref<MatrixXd> Y,
                     double alpha) const {
  const int nin = kernel_.n_in(), nout = kernel_.n_out();
  if (X.rows() != cols() || X.cols() != nin) throw std::invalid_argument("matvec: bad X shape");
  if (Y.rows() != rows() || Y.cols() != nout) throw std::invalid_argument("matvec: bad Y shape");

  const auto& rtree = blocks_->rows();
  const auto& ctree = blocks_->cols();

  // permute inputs into tree order
  MatrixXd xp(X.rows(), nin);
  for (int i = 0; i < X.rows(); ++i) xp.row(i) = X.row(ctree.perm()[i]);
  MatrixXd yp = MatrixXd::Zero(Y.rows(), nout);

  // upward pass per input component
  std::vector<std::vector<VectorXd>> xhat(nin);
  for (int q = 0; q < nin; ++q) {
    VectorXd col = xp.col(q);
    colb_->forward(col, xhat[q]);
  }

  // coupling on admissible leaves
  std::vector<std::vector<VectorXd>> yhat(nout);
  for (int o = 0; o < nout; ++o) yhat[o].assign(rtree.nodes().size(), VectorXd());
  std::vector<MatrixXd> K;
  for (std::size_t b = 0; b < blocks_->admissible().size(); ++b) {
    const auto& blk = blocks_->admissible()[b];
    const std::vector<MatrixXd>* Kp;
    if (mode_ == Mode::Stored) {
      Kp = &coupling_[b];
    } else {
      build_coupling(blk, K);
      Kp = &K;
    }
    for (int o = 0; o < nout; ++o) {
      auto& acc = yhat[o][blk.row];
      if (acc.size() == 0) acc = VectorXd::Zero(rowb_->rank());
      for (int q = 0; q < nin; ++q)
        acc.noalias() += (*Kp)[q * nout + o] * xhat[q][blk.col];
    }
  }

  // downward pass per output component
  for (int o = 0; o < nout; ++o) {
    VectorXd ycol = VectorXd::Zero(Y.rows());
    rowb_->backward(yhat[o], ycol);
    yp.col(o) = ycol;
  }

  // nearfield
  std::vector<MatrixXd> N;
  for (std::size_t b = 0; b < blocks_->nearfield().size(); ++b) {
    const auto& blk = blocks_->nearfield()[b];
    const std::vector<MatrixXd>* Np;
    if (mode_ == Mode::Stored) {
      Np = &nearfield_[b];
    } else {
      build_nearfield(blk, N);
      Np = &N;
    }
    const auto& rn = rtree.nodes()[blk.row];
    const auto& cn = ctree.nodes()[blk.col];
    for (int o = 0; o < nout; ++o)
      for (int q = 0; q < nin; ++q)
        yp.col(o).segment(rn.begin, rn.size()).noalias() +=
            (*Np)[q * nout + o] * xp.col(q).segment(cn.begin, cn.size());
  }

  // scatter back to original order
  for (int i = 0; i < Y.rows(); ++i) Y.row(rtree.perm()[i]) += alpha * yp.row(i);
}

VectorXd H2Matrix::operator*(const VectorXd& x) const {
  MatrixXd Y = MatrixXd::Zero(rows(), 1);
  apply(x, Y, 1.0);
  return Y.col(0);
}

VectorXd H2Matrix::diagonal() const {
  VectorXd d = VectorXd::Zero(rows());
  std::vector<double> vals(kernel_.n_in() * kernel_.n_out());
  for (const auto& blk : blocks_->nearfield()) {
    const auto& rn = blocks_->rows().nodes()[blk.row];
    const auto& cn = blocks_->cols().nodes()[blk.col];
    for (int i = 0; i < rn.size(); ++i) {
      const int ri = blocks_->rows().perm()[rn.begin + i];
      for (int j = 0; j < cn.size(); ++j) {
        const int cj = blocks_->cols().perm()[cn.begin + j];
        if (ri != cj) continue;
        if (exclude_diagonal_) continue;
        if (entry_) {
          entry_(ri, cj, vals.data());
          d[ri] += vals[0];
        } else {
          eval_kernel(kernel_, blocks_->rows().points()[ri], blocks_->cols().points()[cj],
                      vals.data());
          d[ri] += vals[0];
        }
      }
    }
  }
  return d;
}

std::size_t H2Matrix::memory_bytes() const {
  std::size_t b = rowb_->memory_bytes();
  if (colb_ != rowb_) b += colb_->memory_bytes();
  for (const auto& blk : coupling_)
    for (const auto& m : blk) b += sizeof(double) * m.size();
  for (const auto& blk : nearfield_)
    for (const auto& m : blk) b += sizeof(double) * m.size();
  return b;
}

void dense_apply(const KernelSpec& kernel, const std::vector<Vec3>& targets,
                 const std::vector<Vec3>& sources, const Eigen::Ref<const MatrixXd>& X,
                 Eigen::Ref<MatrixXd> Y, double alpha, bool exclude_diagonal) {
  const int nin = kernel.n_in(), nout = kernel.n_out();
  std::vector<double> vals(nin * nout);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (std::size_t j = 0; j < sources.size(); ++j) {
      if (exclude_diagonal && i == j) continue;
      eval_kernel(kernel, targets[i], sources[j], vals.data());
      for (int o = 0; o < nout; ++o)
        for (int q = 0; q < nin; ++q)
          Y(i, o) += alpha * vals[q * nout + o] * X(j, q);
    }
  }
}

MatrixXd dense_matrix(const KernelSpec& kernel, const std::vector<Vec3>& targets,
                      const std::vector<Vec3>& sources, int out, int in,
                      bool exclude_diagonal) {
  MatrixXd A = MatrixXd::Zero(targets.size(), sources.size());
  std::vector<double> vals(kernel.n_in() * kernel.n_out());
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (std::size_t j = 0; j < sources.size(); ++j) {
      if (exclude_diagonal && i == j) continue;
      eval_kernel(kernel, targets[i], sources[j], vals.data());
      A(i, j) = vals[in * kernel.n_out() + out];
    }
  return A;
}

} // namespace plasim

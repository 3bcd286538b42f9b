#include "plasim/cluster.hpp"

#include <algorithm>
#include <stdexcept>

namespace plasim {

double box_distance(const Box& a, const Box& b) {
  Vec3 d = (a.lo - b.hi).cwiseMax(b.lo - a.hi).cwiseMax(0.0);
  return d.norm();
}

bool is_admissible(const Box& a, const Box& b, const AdmissibilityConfig& cfg) {
  const double dist = box_distance(a, b);
  const double da = a.diameter(), db = b.diameter();
  double diam;
  switch (cfg.variant) {
    case AdmissibilityVariant::FirstVariable: diam = da; break;
    case AdmissibilityVariant::SecondVariable: diam = db; break;
    case AdmissibilityVariant::Min: diam = std::min(da, db); break;
    default: diam = std::max(da, db); break;
  }
  return diam <= cfg.eta * dist && dist > 0;
}

ClusterTree::ClusterTree(const std::vector<Vec3>& points, int leaf_cap,
                         const std::vector<Box>* extents)
    : points_(points) {
  if (points.empty()) throw std::invalid_argument("cluster tree over empty point set");
  if (leaf_cap < 1) throw std::invalid_argument("leaf_cap must be >= 1");
  perm_.resize(points.size());
  for (size_t i = 0; i < points.size(); ++i) perm_[i] = static_cast<int>(i);
  nodes_.reserve(4 * points.size() / std::max(1, leaf_cap) + 2);
  build(0, static_cast<int>(points.size()), leaf_cap, extents, -1);
}

int ClusterTree::build(int begin, int end, int leaf_cap,
                       const std::vector<Box>* extents, int parent) {
  Node n;
  n.begin = begin;
  n.end = end;
  n.parent = parent;
  for (int i = begin; i < end; ++i) {
    n.box.expand(points_[perm_[i]]);
    if (extents) n.box.expand((*extents)[perm_[i]]);
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(n);
  if (end - begin > leaf_cap) {
    int axis;
    Box pbox;  // split on the point box even when supports widen the node box
    for (int i = begin; i < end; ++i) pbox.expand(points_[perm_[i]]);
    (pbox.hi - pbox.lo).maxCoeff(&axis);
    const double mid = 0.5 * (pbox.lo[axis] + pbox.hi[axis]);
    auto it = std::partition(perm_.begin() + begin, perm_.begin() + end,
                             [&](int p) { return points_[p][axis] < mid; });
    int cut = static_cast<int>(it - perm_.begin());
    if (cut == begin || cut == end) {
      // degenerate midpoint split, fall back to the median
      cut = (begin + end) / 2;
      std::nth_element(perm_.begin() + begin, perm_.begin() + cut, perm_.begin() + end,
                       [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    }
    nodes_[id].left = build(begin, cut, leaf_cap, extents, id);
    nodes_[id].right = build(cut, end, leaf_cap, extents, id);
  }
  return id;
}

int ClusterTree::depth() const {
  std::vector<int> level(nodes_.size(), 0);
  int d = 0;
  for (size_t i = 1; i < nodes_.size(); ++i) {
    level[i] = level[nodes_[i].parent] + 1;
    d = std::max(d, level[i]);
  }
  return d;
}

int ClusterTree::leaf_count() const {
  int c = 0;
  for (const auto& n : nodes_)
    if (n.is_leaf()) ++c;
  return c;
}

BlockClusterTree::BlockClusterTree(const ClusterTree& rows, const ClusterTree& cols,
                                   const AdmissibilityConfig& cfg)
    : rows_(&rows), cols_(&cols) {
  descend(0, 0, cfg);
}

void BlockClusterTree::descend(int r, int c, const AdmissibilityConfig& cfg) {
  const auto& rn = rows_->nodes()[r];
  const auto& cn = cols_->nodes()[c];
  if (is_admissible(rn.box, cn.box, cfg)) {
    admissible_.push_back({r, c});
  } else if (rn.is_leaf() && cn.is_leaf()) {
    nearfield_.push_back({r, c});
  } else {
    // refine only the larger side: size-matched pairs become admissible at
    // the coarsest possible level, keeping the block count linear
    const bool split_row =
        cn.is_leaf() || (!rn.is_leaf() && rn.box.diameter() >= cn.box.diameter());
    if (split_row) {
      descend(rn.left, c, cfg);
      descend(rn.right, c, cfg);
    } else {
      descend(r, cn.left, cfg);
      descend(r, cn.right, cfg);
    }
  }
}

double BlockClusterTree::nearfield_fraction() const {
  double near = 0;
  for (const auto& b : nearfield_)
    near += double(rows_->nodes()[b.row].size()) * cols_->nodes()[b.col].size();
  return near / (double(rows_->num_points()) * cols_->num_points());
}

} // namespace plasim

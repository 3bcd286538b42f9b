#ifndef PLASIM_CLUSTER_HPP
#define PLASIM_CLUSTER_HPP

#include "plasim/types.hpp"

namespace plasim {

struct Box {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = Vec3::Constant(std::numeric_limits<double>::lowest());

  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const Box& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  double diameter() const { return (hi - lo).norm(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

double box_distance(const Box& a, const Box& b);

enum class AdmissibilityVariant { FirstVariable, SecondVariable, Min, Max };

struct AdmissibilityConfig {
  double eta = 2.0;
  AdmissibilityVariant variant = AdmissibilityVariant::Max;
};

bool is_admissible(const Box& a, const Box& b, const AdmissibilityConfig& cfg);

/// Geometric cluster tree over a point set. Nodes are stored pre-order
/// (children after their parent), binary splits via midpoint bisection on the
/// longest box axis with a median fallback. The tree owns a permutation
/// mapping tree order to original point indices.
class ClusterTree {
public:
  struct Node {
    int begin, end;           // range into perm
    Box box;
    int left = -1, right = -1;
    int parent = -1;
    bool is_leaf() const { return left < 0; }
    int size() const { return end - begin; }
  };

  /// extents: optional per-point bounding boxes (basis-function supports);
  /// node boxes then cover the union of supports.
  ClusterTree(const std::vector<Vec3>& points, int leaf_cap,
              const std::vector<Box>* extents = nullptr);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& perm() const { return perm_; }
  const std::vector<Vec3>& points() const { return points_; }
  int num_points() const { return static_cast<int>(points_.size()); }
  int depth() const;
  int leaf_count() const;

  /// Point of tree-order position i (points_[perm_[i]]).
  const Vec3& point_at(int i) const { return points_[perm_[i]]; }

private:
  std::vector<Vec3> points_;
  std::vector<int> perm_;
  std::vector<Node> nodes_;

  int build(int begin, int end, int leaf_cap, const std::vector<Box>* extents, int parent);
};

/// Admissible/nearfield leaf partition of I x J built by simultaneous descent.
class BlockClusterTree {
public:
  struct Block {
    int row, col;  // node ids in the row/column trees
  };

  BlockClusterTree(const ClusterTree& rows, const ClusterTree& cols,
                   const AdmissibilityConfig& cfg);

  const ClusterTree& rows() const { return *rows_; }
  const ClusterTree& cols() const { return *cols_; }
  const std::vector<Block>& admissible() const { return admissible_; }
  const std::vector<Block>& nearfield() const { return nearfield_; }

  /// Fraction of the matrix entries covered by nearfield blocks.
  double nearfield_fraction() const;

private:
  const ClusterTree* rows_;
  const ClusterTree* cols_;
  std::vector<Block> admissible_;
  std::vector<Block> nearfield_;

  void descend(int r, int c, const AdmissibilityConfig& cfg);
};

} // namespace plasim

#endif

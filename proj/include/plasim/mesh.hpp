#ifndef PLASIM_MESH_HPP
#define PLASIM_MESH_HPP

#include "plasim/types.hpp"

#include <array>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace plasim {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Closed, orientable triangulation of a domain boundary.
/// Region labels assign boundary conditions per triangle.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> region_label;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  Vec3 vertex(int tri, int local) const { return vertices[triangles[tri][local]]; }

  double triangle_area(int k) const;
  Vec3 triangle_normal(int k) const;      // unit, outward
  Vec3 triangle_centroid(int k) const;
  std::array<Vec3, 3> edge_midpoints(int k) const;

  double total_area() const;
  /// Enclosed volume via the divergence theorem.
  double volume() const;

  /// Throws MeshError on out-of-range indices, degenerate triangles or
  /// edges not shared by exactly two triangles with opposite orientation.
  void validate() const;
};

enum class BCKind { Dirichlet, Neumann };

struct BoundaryCondition {
  struct Entry {
    BCKind kind = BCKind::Dirichlet;
    double value = 0.0;        // constant datum
    std::string field;         // named analytic field, overrides value if set
  };
  std::map<int, Entry> regions;

  const Entry& at(int label) const;
  bool all_dirichlet(const SurfaceMesh& mesh) const;
  bool all_neumann(const SurfaceMesh& mesh) const;
  /// Evaluates the datum of the region at point x with triangle normal n.
  double evaluate(int label, const Vec3& x, const Vec3& n) const;
  /// Every region label of the mesh must have an entry.
  void validate(const SurfaceMesh& mesh) const;
};

/// Analytic field lookup for named boundary data ("zero", "linear_z", "flux_z").
double named_field(const std::string& name, const Vec3& x, const Vec3& n);

SurfaceMesh generate_sphere(int refinement_level);
SurfaceMesh generate_cylinder(double radius, double height, int resolution);
/// Surface of revolution around the x-axis from an open profile polyline
/// (x_i, r_i) with r > 0 in the interior and r = 0 capping handled by fans.
/// One region label per profile segment.
SurfaceMesh generate_revolution(const std::vector<std::array<double, 2>>& profile,
                                int resolution);
SurfaceMesh generate_revolution(const std::vector<std::array<double, 2>>& profile,
                                const std::vector<int>& labels, int resolution);
/// Reconstructed accelerator geometry (revolution surface around x).
SurfaceMesh generate_accelerator(int resolution);

SurfaceMesh load_mesh(const std::string& path);
void save_mesh(const SurfaceMesh& mesh, const std::string& path);

/// Point-in-domain query with O(log N) ray traversal.
class InsideQuery {
public:
  explicit InsideQuery(const SurfaceMesh& mesh);
  bool contains(const Vec3& point) const;

private:
  struct Node {
    Vec3 lo, hi;
    int begin, end;          // triangle range for leaves
    int left = -1, right = -1;
  };
  const SurfaceMesh& mesh_;
  std::vector<Node> nodes_;
  std::vector<int> order_;

  int build(std::vector<int>& tris, int begin, int end);
  // 0 = miss, 1 = hit, -1 = degenerate hit (near edge/plane)
  int ray_hits(const Vec3& origin, const Vec3& dir, int node) const;
};

bool contains(const SurfaceMesh& mesh, const Vec3& point);

} // namespace plasim

#endif

#include "plasim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace plasim {

double SurfaceMesh::triangle_area(int k) const {
  const auto& t = triangles[k];
  return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

Vec3 SurfaceMesh::triangle_normal(int k) const {
  const auto& t = triangles[k];
  return (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).normalized();
}

Vec3 SurfaceMesh::triangle_centroid(int k) const {
  const auto& t = triangles[k];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

std::array<Vec3, 3> SurfaceMesh::edge_midpoints(int k) const {
  const auto& t = triangles[k];
  return {0.5 * (vertices[t[0]] + vertices[t[1]]),
          0.5 * (vertices[t[1]] + vertices[t[2]]),
          0.5 * (vertices[t[2]] + vertices[t[0]])};
}

double SurfaceMesh::total_area() const {
  double a = 0;
  for (int k = 0; k < num_triangles(); ++k) a += triangle_area(k);
  return a;
}

double SurfaceMesh::volume() const {
  double v = 0;
  for (const auto& t : triangles)
    v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]])) / 6.0;
  return v;
}

void SurfaceMesh::validate() const {
  if (region_label.size() != triangles.size())
    throw MeshError("region label count does not match triangle count");
  const int nv = num_vertices();
  for (int k = 0; k < num_triangles(); ++k) {
    for (int j = 0; j < 3; ++j) {
      int i = triangles[k][j];
      if (i < 0 || i >= nv) throw MeshError("triangle index out of range");
    }
    if (triangle_area(k) <= 0) throw MeshError("degenerate triangle");
  }
  // every directed edge exactly once, its reverse exactly once
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : triangles)
    for (int j = 0; j < 3; ++j)
      ++edges[{t[j], t[(j + 1) % 3]}];
  for (const auto& [e, cnt] : edges) {
    if (cnt != 1) throw MeshError("mesh not closed: duplicate directed edge");
    auto rev = edges.find({e.second, e.first});
    if (rev == edges.end()) throw MeshError("mesh not closed: unmatched edge");
  }
  if (volume() <= 0) throw MeshError("mesh not outward oriented");
}

const BoundaryCondition::Entry& BoundaryCondition::at(int label) const {
  auto it = regions.find(label);
  if (it == regions.end()) throw MeshError("no boundary condition for region " + std::to_string(label));
  return it->second;
}

bool BoundaryCondition::all_dirichlet(const SurfaceMesh& mesh) const {
  for (int l : mesh.region_label)
    if (at(l).kind != BCKind::Dirichlet) return false;
  return true;
}

bool BoundaryCondition::all_neumann(const SurfaceMesh& mesh) const {
  for (int l : mesh.region_label)
    if (at(l).kind != BCKind::Neumann) return false;
  return true;
}

double named_field(const std::string& name, const Vec3& x, const Vec3& n) {
  if (name == "zero") return 0.0;
  if (name == "linear_z") return x.z();
  if (name == "flux_z") return n.z();
  throw MeshError("unknown analytic field: " + name);
}

double BoundaryCondition::evaluate(int label, const Vec3& x, const Vec3& n) const {
  const Entry& e = at(label);
  if (!e.field.empty()) return named_field(e.field, x, n);
  return e.value;
}

void BoundaryCondition::validate(const SurfaceMesh& mesh) const {
  for (int l : mesh.region_label) (void)at(l);
}

namespace {

void orient_outward(SurfaceMesh& mesh) {
  if (mesh.volume() < 0)
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
}

} // namespace

SurfaceMesh generate_sphere(int refinement_level) {
  if (refinement_level < 0) throw MeshError("refinement level must be >= 0");
  if (refinement_level > 8) throw MeshError("refinement level > 8 refused");

  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  SurfaceMesh m;
  m.vertices = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0},
                {0, -1, p}, {0, 1, p},  {0, -1, -p}, {0, 1, -p},
                {p, 0, -1}, {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
  for (auto& v : m.vertices) v.normalize();
  m.triangles = {{0, 11, 5}, {0, 5, 1},   {0, 1, 7},  {0, 7, 10}, {0, 10, 11},
                 {1, 5, 9},  {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                 {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},  {3, 8, 9},
                 {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},  {9, 8, 1}};

  for (int level = 0; level < refinement_level; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 v = (m.vertices[a] + m.vertices[b]).normalized();
      m.vertices.push_back(v);
      int idx = m.num_vertices() - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * m.triangles.size());
    for (const auto& t : m.triangles) {
      int a = mid(t[0], t[1]), b = mid(t[1], t[2]), c = mid(t[2], t[0]);
      next.push_back({t[0], a, c});
      next.push_back({t[1], b, a});
      next.push_back({t[2], c, b});
      next.push_back({a, b, c});
    }
    m.triangles = std::move(next);
  }
  m.region_label.assign(m.triangles.size(), 0);
  orient_outward(m);
  return m;
}

SurfaceMesh generate_revolution(const std::vector<std::array<double, 2>>& profile,
                                int resolution) {
  return generate_revolution(profile, std::vector<int>(profile.size() - 1, 0), resolution);
}

SurfaceMesh generate_revolution(const std::vector<std::array<double, 2>>& profile,
                                const std::vector<int>& labels, int resolution) {
  if (resolution < 3) throw MeshError("resolution must be >= 3");
  if (profile.size() < 3) throw MeshError("profile needs at least 3 points");
  if (labels.size() + 1 != profile.size()) throw MeshError("one label per profile segment");
  if (profile.front()[1] != 0.0 || profile.back()[1] != 0.0)
    throw MeshError("profile must start and end on the axis");

  SurfaceMesh m;
  const int np = static_cast<int>(profile.size());
  // ring start index per profile point, -1 marks an axis vertex
  std::vector<int> ring(np);
  for (int i = 0; i < np; ++i) {
    const double x = profile[i][0], r = profile[i][1];
    if (i > 0 && i < np - 1 && r <= 0) throw MeshError("interior profile radius must be positive");
    if (r == 0.0) {
      ring[i] = -static_cast<int>(m.vertices.size()) - 1;
      m.vertices.push_back({x, 0, 0});
    } else {
      ring[i] = m.num_vertices();
      for (int j = 0; j < resolution; ++j) {
        const double th = 2.0 * std::numbers::pi * j / resolution;
        m.vertices.push_back({x, r * std::cos(th), r * std::sin(th)});
      }
    }
  }
  auto add = [&](int a, int b, int c, int label) {
    m.triangles.push_back({a, b, c});
    m.region_label.push_back(label);
  };
  for (int i = 0; i + 1 < np; ++i) {
    const int label = labels[i];
    const bool axis0 = ring[i] < 0, axis1 = ring[i + 1] < 0;
    if (axis0 && axis1) throw MeshError("profile segment collapses to the axis");
    for (int j = 0; j < resolution; ++j) {
      const int jn = (j + 1) % resolution;
      if (axis0) {
        add(-ring[i] - 1, ring[i + 1] + j, ring[i + 1] + jn, label);
      } else if (axis1) {
        add(ring[i] + j, -ring[i + 1] - 1, ring[i] + jn, label);
      } else {
        add(ring[i] + j, ring[i + 1] + j, ring[i + 1] + jn, label);
        add(ring[i] + j, ring[i + 1] + jn, ring[i] + jn, label);
      }
    }
  }
  orient_outward(m);
  return m;
}

SurfaceMesh generate_cylinder(double radius, double height, int resolution) {
  if (radius <= 0 || height <= 0) throw MeshError("radius and height must be positive");
  if (resolution < 3) throw MeshError("resolution must be >= 3");

  const double seg = 2.0 * std::numbers::pi * radius / resolution;
  const int nr = std::max(1, (int)std::lround(radius / seg));
  const int nz = std::max(1, (int)std::lround(height / seg));

  // profile along the revolution axis: bottom cap (label 0), lateral (1), top cap (2)
  std::vector<std::array<double, 2>> profile;
  std::vector<int> labels;
  const double x0 = -height / 2, x1 = height / 2;
  profile.push_back({x0, 0});
  for (int i = 1; i <= nr; ++i) {
    profile.push_back({x0, radius * i / nr});
    labels.push_back(0);
  }
  for (int i = 1; i <= nz; ++i) {
    profile.push_back({x0 + height * i / nz, radius});
    labels.push_back(1);
  }
  for (int i = nr - 1; i >= 0; --i) {
    profile.push_back({x1, radius * i / nr});
    labels.push_back(2);
  }
  SurfaceMesh m = generate_revolution(profile, labels, resolution);
  // rotate so the cylinder axis is z: (x,y,z) -> (y,z,x)
  for (auto& v : m.vertices) v = Vec3(v.y(), v.z(), v.x());
  orient_outward(m);
  return m;
}

SurfaceMesh generate_accelerator(int resolution) {
  // Reconstructed rotationally symmetric profile: source cylinder, screen
  // narrow, focusing chamber, accelerator narrow, drift chamber.
  // Region labels: 0,2,4,6,8 lateral walls; 1 screen; 3,5 chamber walls;
  // 7 accelerator; caps share the adjacent wall label.
  std::vector<std::array<double, 2>> profile = {
      {0.0, 0.0},  {0.0, 1.0},                 // left cap
      {3.0, 1.0},                              // source cylinder
      {3.2, 0.3},  {3.6, 0.3},  {3.8, 1.0},    // screen narrow
      {5.0, 1.0},                              // chamber
      {5.2, 0.3},  {5.6, 0.3},  {5.8, 1.0},    // accelerator narrow
      {9.0, 1.0},  {9.0, 0.0}};                // drift chamber, right cap
  std::vector<int> labels = {0, 0, 1, 1, 1, 2, 3, 3, 3, 4, 4};
  return generate_revolution(profile, labels, resolution);
}

void save_mesh(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open " + path + " for writing");
  out << "plasmesh 1\n" << mesh.num_vertices() << " " << mesh.num_triangles() << "\n";
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangles[k];
    out << t[0] << " " << t[1] << " " << t[2] << " " << mesh.region_label[k] << "\n";
  }
}

SurfaceMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open " + path);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "plasmesh" || version != 1)
    throw MeshError("malformed header");
  int nv = 0, nt = 0;
  if (!(in >> nv >> nt) || nv < 3 || nt < 4) throw MeshError("malformed header");
  SurfaceMesh m;
  m.vertices.resize(nv);
  for (auto& v : m.vertices)
    if (!(in >> v.x() >> v.y() >> v.z())) throw MeshError("malformed vertex line");
  m.triangles.resize(nt);
  m.region_label.resize(nt);
  for (int k = 0; k < nt; ++k) {
    auto& t = m.triangles[k];
    if (!(in >> t[0] >> t[1] >> t[2] >> m.region_label[k]))
      throw MeshError("malformed triangle line");
  }
  m.validate();
  return m;
}

InsideQuery::InsideQuery(const SurfaceMesh& mesh) : mesh_(mesh) {
  order_.resize(mesh.num_triangles());
  for (int k = 0; k < mesh.num_triangles(); ++k) order_[k] = k;
  nodes_.reserve(2 * order_.size());
  build(order_, 0, static_cast<int>(order_.size()));
}

int InsideQuery::build(std::vector<int>& tris, int begin, int end) {
  Node n;
  n.lo = Vec3::Constant(std::numeric_limits<double>::max());
  n.hi = Vec3::Constant(std::numeric_limits<double>::lowest());
  for (int i = begin; i < end; ++i)
    for (int j = 0; j < 3; ++j) {
      const Vec3 v = mesh_.vertex(tris[i], j);
      n.lo = n.lo.cwiseMin(v);
      n.hi = n.hi.cwiseMax(v);
    }
  n.begin = begin;
  n.end = end;
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(n);
  if (end - begin > 8) {
    int axis;
    (n.hi - n.lo).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(tris.begin() + begin, tris.begin() + mid, tris.begin() + end,
                     [&](int a, int b) {
                       return mesh_.triangle_centroid(a)[axis] < mesh_.triangle_centroid(b)[axis];
                     });
    nodes_[id].left = build(tris, begin, mid);
    nodes_[id].right = build(tris, mid, end);
  }
  return id;
}

int InsideQuery::ray_hits(const Vec3& origin, const Vec3& dir, int node) const {
  const Node& n = nodes_[node];
  // slab test
  double tmin = 0.0, tmax = std::numeric_limits<double>::max();
  for (int a = 0; a < 3; ++a) {
    const double inv = 1.0 / dir[a];
    double t0 = (n.lo[a] - origin[a]) * inv;
    double t1 = (n.hi[a] - origin[a]) * inv;
    if (inv < 0) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return 0;
  }
  if (n.left >= 0) {
    const int a = ray_hits(origin, dir, n.left);
    if (a < 0) return -1;
    const int b = ray_hits(origin, dir, n.right);
    if (b < 0) return -1;
    return a + b;
  }
  int hits = 0;
  for (int i = n.begin; i < n.end; ++i) {
    const int k = order_[i];
    const Vec3 v0 = mesh_.vertex(k, 0);
    const Vec3 e1 = mesh_.vertex(k, 1) - v0;
    const Vec3 e2 = mesh_.vertex(k, 2) - v0;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    const double scale = e1.norm() * e2.norm();
    if (std::abs(det) < 1e-12 * scale) {
      // ray nearly parallel to the triangle plane; re-run perturbed
      const Vec3 d = origin - v0;
      if (std::abs(d.dot(e1.cross(e2).normalized())) < 1e-9 * std::sqrt(scale)) return -1;
      continue;
    }
    const double inv = 1.0 / det;
    const Vec3 s = origin - v0;
    const double u = s.dot(p) * inv;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) * inv;
    const double t = e2.dot(q) * inv;
    const double eps = 1e-12;
    if (u < -eps || v < -eps || u + v > 1 + eps) continue;
    if (t < -eps) continue;
    if (u < eps || v < eps || u + v > 1 - eps || t < eps) return -1;  // edge/origin graze
    ++hits;
  }
  return hits;
}

bool InsideQuery::contains(const Vec3& point) const {
  // fixed irrationally oriented ray; deterministic perturbation on grazes
  Vec3 dir = Vec3(0.5377397836, 0.1846689625, 0.8226271857).normalized();
  Vec3 origin = point;
  for (int attempt = 0; attempt < 32; ++attempt) {
    const int hits = ray_hits(origin, dir, 0);
    if (hits >= 0) return hits % 2 == 1;
    const double h = 1e-11 * std::pow(2.0, attempt);
    origin = point + h * Vec3(0.7390851332, -0.2231301601, 0.5962133048);
    dir = (dir + h * Vec3(-0.3361156932, 0.8692738491, 0.1211012809)).normalized();
  }
  return false;  // unreachable in practice
}

bool contains(const SurfaceMesh& mesh, const Vec3& point) {
  return InsideQuery(mesh).contains(point);
}

} // namespace plasim

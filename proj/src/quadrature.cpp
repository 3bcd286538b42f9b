#include "plasim/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace plasim {

GaussRule gauss_legendre_01(int n) {
  // Newton iteration on Legendre polynomials, then map [-1,1] -> [0,1]
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    r.x[i] = 0.5 * (1.0 - t);  // ascending in x after the cosine ordering
    r.w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  return r;
}

namespace {

// symmetric 7-point degree-5 rule, barycentric coordinates and weights (sum 1)
struct Tri7 {
  double l0, l1, l2, w;
};
constexpr Tri7 kTri7[7] = {
    {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
    {0.059715871789770, 0.470142064105115, 0.470142064105115, 0.132394152788506},
    {0.470142064105115, 0.059715871789770, 0.470142064105115, 0.132394152788506},
    {0.470142064105115, 0.470142064105115, 0.059715871789770, 0.132394152788506},
    {0.797426985353087, 0.101286507323456, 0.101286507323456, 0.125939180544827},
    {0.101286507323456, 0.797426985353087, 0.101286507323456, 0.125939180544827},
    {0.101286507323456, 0.101286507323456, 0.797426985353087, 0.125939180544827}};

double area_of(const std::array<Vec3, 3>& t) {
  return 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
}

// chart over That = {0 <= u2 <= u1 <= 1}: x = A + u1 (B - A) + u2 (C - B);
// P1 basis on (A, B, C) in these coordinates
inline Vec3 chart(const std::array<Vec3, 3>& t, double u1, double u2) {
  return t[0] + u1 * (t[1] - t[0]) + u2 * (t[2] - t[1]);
}
inline Eigen::Vector3d hat(double u1, double u2) {
  return {1.0 - u1, u1 - u2, u2};
}

Eigen::Matrix3d disjoint_pair(const std::array<Vec3, 3>& tx, const std::array<Vec3, 3>& ty,
                              const PanelKernel& kernel, int depth);

Eigen::Matrix3d disjoint_base(const std::array<Vec3, 3>& tx, const std::array<Vec3, 3>& ty,
                              const PanelKernel& kernel) {
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (const auto& qx : kTri7) {
    const Vec3 x = qx.l0 * tx[0] + qx.l1 * tx[1] + qx.l2 * tx[2];
    const Eigen::Vector3d la(qx.l0, qx.l1, qx.l2);
    for (const auto& qy : kTri7) {
      const Vec3 y = qy.l0 * ty[0] + qy.l1 * ty[1] + qy.l2 * ty[2];
      const Eigen::Vector3d lb(qy.l0, qy.l1, qy.l2);
      acc += (qx.w * qy.w * kernel(x, y)) * (la * lb.transpose());
    }
  }
  return area_of(tx) * area_of(ty) * acc;
}

// refines nearly touching pairs once or twice by 1:4 subdivision; the sub-pair
// basis values are linear in the parent barycentrics, handled by midpoint maps
void subdivide(const std::array<Vec3, 3>& t, std::array<std::array<Vec3, 3>, 4>& kids,
               std::array<Eigen::Matrix3d, 4>& bary) {
  const Vec3 m01 = 0.5 * (t[0] + t[1]), m12 = 0.5 * (t[1] + t[2]), m20 = 0.5 * (t[2] + t[0]);
  kids = {{{t[0], m01, m20}, {m01, t[1], m12}, {m20, m12, t[2]}, {m01, m12, m20}}};
  // columns: parent barycentric coordinates of the child's vertices
  auto B = [](std::initializer_list<double> v) {
    Eigen::Matrix3d m;
    int i = 0;
    for (double d : v) {
      m(i % 3, i / 3) = d;
      ++i;
    }
    return m;
  };
  bary[0] = B({1, 0, 0, .5, .5, 0, .5, 0, .5});
  bary[1] = B({.5, .5, 0, 0, 1, 0, 0, .5, .5});
  bary[2] = B({.5, 0, .5, 0, .5, .5, 0, 0, 1});
  bary[3] = B({.5, .5, 0, 0, .5, .5, .5, 0, .5});
}

Eigen::Matrix3d disjoint_pair(const std::array<Vec3, 3>& tx, const std::array<Vec3, 3>& ty,
                              const PanelKernel& kernel, int depth) {
  const double dx = (tx[1] - tx[0]).norm() + (tx[2] - tx[0]).norm();
  const double dy = (ty[1] - ty[0]).norm() + (ty[2] - ty[0]).norm();
  double dist2 = std::numeric_limits<double>::max();
  for (const auto& a : tx)
    for (const auto& b : ty) dist2 = std::min(dist2, (a - b).squaredNorm());
  if (depth > 0 && dist2 < 0.01 * std::min(dx, dy) * std::min(dx, dy)) {
    std::array<std::array<Vec3, 3>, 4> kx, ky;
    std::array<Eigen::Matrix3d, 4> bx, by;
    subdivide(tx, kx, bx);
    subdivide(ty, ky, by);
    Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        acc += bx[i] * disjoint_pair(kx[i], ky[j], kernel, depth - 1) * by[j].transpose();
    return acc;
  }
  return disjoint_base(tx, ty, kernel);
}

struct Sample {
  double u1x, u2x, u1y, u2y, weight;
};

// The singular transforms integrate over That x That with coordinates
// (s1, s2) for x and (t1, t2) for y, That = {0 <= u2 <= u1 <= 1}. Each case
// is decomposed into subdomains on which a Duffy-type map from [0,1]^4 is
// polynomial, so the 1/r singularity cancels against the Jacobian and the
// integrand stays analytic (constant kernels integrate exactly). Weights
// include the Jacobians but not the physical (2 area)^2 factor.

// Identical panels: That x That is triangulated into the 6 interleavings of
// the chains s2 <= s1 and t2 <= t1. Each interleaving is the simplex
// 0 <= a <= b <= c <= d <= 1 in gap coordinates g0 = a, g1 = b - a,
// g2 = c - b, g3 = d - c. The kernel singularity x(s) = x(t) sits at
// g1 = g3 = 0 (middle orderings, g2 free) or g1 = g2 = g3 = 0 (nested
// orderings), removed by a simplex Duffy map in those gaps.
void identical_samples(const GaussRule& g, std::vector<Sample>& out) {
  const int n = static_cast<int>(g.x.size());
  // sorted positions (a, b, c, d) -> (s1, s2, t1, t2) per interleaving;
  // entries give which sorted slot each coordinate takes: {s2, s1, t2, t1}
  static constexpr int kSlot[6][4] = {
      {0, 1, 2, 3},  // s2 <= s1 <= t2 <= t1 (nested)
      {0, 2, 1, 3},  // s2 <= t2 <= s1 <= t1
      {0, 3, 1, 2},  // s2 <= t2 <= t1 <= s1
      {1, 2, 0, 3},  // t2 <= s2 <= s1 <= t1
      {1, 3, 0, 2},  // t2 <= s2 <= t1 <= s1
      {2, 3, 0, 1}}; // t2 <= t1 <= s2 <= s1 (nested)
  for (int sim = 0; sim < 6; ++sim) {
    const bool nested = (sim == 0 || sim == 5);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const double xi = g.x[i], e1 = g.x[j], u = g.x[a], v = g.x[b];
            double g0, g1, g2, g3, w;
            if (nested) {
              // (g1, g2, g3) = xi * simplex direction, g0 fills the slack
              g1 = xi * e1;
              g2 = xi * (1.0 - e1) * v;
              g3 = xi * (1.0 - e1) * (1.0 - v);
              g0 = (1.0 - xi) * u;
              w = xi * xi * (1.0 - e1) * (1.0 - xi);
            } else {
              // singular gaps (g1, g3) on a triangle Duffy, (g0, g2) fill
              g1 = xi * e1;
              g3 = xi * (1.0 - e1);
              g0 = (1.0 - xi) * u * v;
              g2 = (1.0 - xi) * u * (1.0 - v);
              w = xi * (1.0 - xi) * (1.0 - xi) * u;
            }
            w *= g.w[i] * g.w[j] * g.w[a] * g.w[b];
            const double sorted[4] = {g0, g0 + g1, g0 + g1 + g2, g0 + g1 + g2 + g3};
            const double s2 = sorted[kSlot[sim][0]], s1 = sorted[kSlot[sim][1]];
            const double t2 = sorted[kSlot[sim][2]], t1 = sorted[kSlot[sim][3]];
            out.push_back({s1, s2, t1, t2, w});
          }
  }
}

// Shared edge (local (0,1) on both panels): singular at s2 = t2 = 0,
// s1 = t1. With d = t1 - s1 the small variables (s2, t2, d) are split into
// four cones by sign(d) and sign(s2 + d - t2); in each cone a scaled Duffy
// map makes the s1 interval and the cone polynomial in the parameters.
void shared_edge_samples(const GaussRule& g, std::vector<Sample>& out) {
  const int n = static_cast<int>(g.x.size());
  for (int cone = 0; cone < 4; ++cone)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int a = 0; a < n; ++a) {
            const double xi = g.x[i], e1 = g.x[j], e2 = g.x[k], u = g.x[a];
            double s2, t2, d, s1, w = xi * xi * (1.0 - xi);
            switch (cone) {
              case 0:  // d >= 0, t2 <= s2 + d; xi = s2 + d
                s2 = xi * e1;
                d = xi * (1.0 - e1);
                t2 = xi * e2;
                s1 = xi * e1 + (1.0 - xi) * u;
                break;
              case 1:  // d >= 0, t2 >= s2 + d; xi = t2
                t2 = xi;
                s2 = xi * e1 * e2;
                d = xi * e1 * (1.0 - e2);
                s1 = xi - d + (1.0 - xi) * u;
                w *= e1;
                break;
              case 2:  // d <= 0, s2 >= t2 - d; xi = s2
                s2 = xi;
                t2 = xi * e1 * e2;
                d = -xi * e1 * (1.0 - e2);
                s1 = xi + (1.0 - xi) * u;
                w *= e1;
                break;
              default:  // d <= 0, s2 <= t2 - d; xi = t2 - d
                t2 = xi * e1;
                d = -xi * (1.0 - e1);
                s2 = xi * e2;
                s1 = xi + (1.0 - xi) * u;
                break;
            }
            w *= g.w[i] * g.w[j] * g.w[k] * g.w[a];
            out.push_back({s1, s2, s1 + d, t2, w});
          }
}

void shared_vertex_samples(const GaussRule& g, std::vector<Sample>& out) {
  const int n = static_cast<int>(g.x.size());
  for (int region = 0; region < 2; ++region)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const double xi = g.x[i], e1 = g.x[j], e2 = g.x[k], e3 = g.x[l];
            const double w = g.w[i] * g.w[j] * g.w[k] * g.w[l] * xi * xi * xi * e2;
            if (region == 0)
              out.push_back({xi, xi * e1, xi * e2, xi * e2 * e3, w});
            else
              out.push_back({xi * e2, xi * e2 * e3, xi, xi * e1, w});
          }
}

} // namespace

Eigen::Vector3d integrate_panel(const std::array<Vec3, 3>& t,
                                const std::function<double(const Vec3&)>& f) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (const auto& q : kTri7) {
    const Vec3 x = q.l0 * t[0] + q.l1 * t[1] + q.l2 * t[2];
    acc += (q.w * f(x)) * Eigen::Vector3d(q.l0, q.l1, q.l2);
  }
  return area_of(t) * acc;
}

Eigen::Matrix3d integrate_panel_pair(const std::array<Vec3, 3>& tx,
                                     const std::array<Vec3, 3>& ty, PairKind kind,
                                     const PanelKernel& kernel,
                                     const QuadratureConfig& cfg) {
  if (kind == PairKind::Disjoint) return disjoint_pair(tx, ty, kernel, 2);

  const GaussRule g = gauss_legendre_01(cfg.singular_order);
  std::vector<Sample> samples;
  switch (kind) {
    case PairKind::Identical: identical_samples(g, samples); break;
    case PairKind::SharedEdge: shared_edge_samples(g, samples); break;
    default: shared_vertex_samples(g, samples); break;
  }
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (const auto& s : samples) {
    const Vec3 x = chart(tx, s.u1x, s.u2x);
    const Vec3 y = chart(ty, s.u1y, s.u2y);
    acc += (s.weight * kernel(x, y)) * (hat(s.u1x, s.u2x) * hat(s.u1y, s.u2y).transpose());
  }
  return 4.0 * area_of(tx) * area_of(ty) * acc;
}

} // namespace plasim

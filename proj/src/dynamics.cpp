#include "plasim/dynamics.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

namespace plasim {

double Particles::kinetic_energy() const {
  double e = 0.0;
  for (int i = 0; i < size(); ++i) e += 0.5 * w[i] * m[i] * v[i].squaredNorm();
  return e;
}

SampleShape shape_of(const SurfaceMesh& mesh) {
  auto query = std::make_shared<InsideQuery>(mesh);
  SampleShape s;
  s.inside = [query](const Vec3& p) { return query->contains(p); };
  s.lo = s.hi = mesh.vertices[0];
  for (const Vec3& v : mesh.vertices) {
    s.lo = s.lo.cwiseMin(v);
    s.hi = s.hi.cwiseMax(v);
  }
  s.volume = mesh.volume();
  return s;
}

SampleShape ball_shape(double radius) {
  SampleShape s;
  s.inside = [radius](const Vec3& p) { return p.norm() <= radius; };
  s.lo = Vec3::Constant(-radius);
  s.hi = Vec3::Constant(radius);
  s.volume = 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
  return s;
}

SampleShape cylinder_shape(double radius, double height) {
  SampleShape s;
  s.inside = [radius, height](const Vec3& p) {
    return p.head<2>().norm() <= radius && std::abs(p.z()) <= height / 2.0;
  };
  s.lo = Vec3(-radius, -radius, -height / 2.0);
  s.hi = Vec3(radius, radius, height / 2.0);
  s.volume = std::numbers::pi * radius * radius * height;
  return s;
}

Particles init_uniform(const SampleShape& shape, int N, const VelocityLaw& law,
                       double charge, double mass, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("init_uniform: N must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(shape.lo.x(), shape.hi.x());
  std::uniform_real_distribution<double> uy(shape.lo.y(), shape.hi.y());
  std::uniform_real_distribution<double> uz(shape.lo.z(), shape.hi.z());
  std::normal_distribution<double> nd;

  Particles p;
  p.x.reserve(N);
  long trials = 0;
  while (p.size() < N) {
    const Vec3 cand(ux(rng), uy(rng), uz(rng));
    ++trials;
    if (shape.inside(cand)) p.x.push_back(cand);
    if (trials >= 10000 && p.size() < trials / 100)
      throw std::runtime_error("init_uniform: acceptance rate below 1%");
  }
  p.v.resize(N, Vec3::Zero());
  if (law.kind == VelocityLaw::Kind::Maxwellian) {
    const double s = std::sqrt(law.T);
    for (Vec3& v : p.v) v = law.bulk + s * Vec3(nd(rng), nd(rng), nd(rng));
  }
  p.q.assign(N, charge);
  p.m.assign(N, mass);
  p.w.assign(N, shape.volume / N);
  return p;
}

Particles init_uniform(const SurfaceMesh& mesh, int N, const VelocityLaw& law,
                       double charge, double mass, std::uint64_t seed) {
  return init_uniform(shape_of(mesh), N, law, charge, mass, seed);
}

void step_leapfrog(Particles& p, const FieldCallback& field, double dt) {
  const MatrixXd E = field(p.x);
  for (int i = 0; i < p.size(); ++i) {
    p.v[i] += dt * (p.q[i] / p.m[i]) * Vec3(E.row(i));
    p.x[i] += dt * p.v[i];
  }
}

void step_boris(Particles& p, const FieldCallback& field, const Vec3& B, double dt) {
  const MatrixXd E = field(p.x);
  for (int i = 0; i < p.size(); ++i) {
    const double qm = p.q[i] / p.m[i];
    const Vec3 half = 0.5 * dt * qm * Vec3(E.row(i));
    Vec3 v = p.v[i] + half;
    const Vec3 t = 0.5 * dt * qm * B;
    const Vec3 s = 2.0 * t / (1.0 + t.squaredNorm());
    v += (v + v.cross(t)).cross(s);
    p.v[i] = v + half;
    p.x[i] += dt * p.v[i];
  }
}

int absorb(Particles& p, const InsideQuery& inside) {
  int keep = 0;
  for (int i = 0; i < p.size(); ++i) {
    if (!inside.contains(p.x[i])) continue;
    if (keep != i) {
      p.x[keep] = p.x[i];
      p.v[keep] = p.v[i];
      p.q[keep] = p.q[i];
      p.m[keep] = p.m[i];
      p.w[keep] = p.w[i];
    }
    ++keep;
  }
  const int removed = p.size() - keep;
  p.x.resize(keep);
  p.v.resize(keep);
  p.q.resize(keep);
  p.m.resize(keep);
  p.w.resize(keep);
  return removed;
}

int absorb(Particles& p, const SurfaceMesh& mesh) {
  return absorb(p, InsideQuery(mesh));
}

Spectrum spectrum(const VectorXd& series, double dt_sample) {
  const int n = static_cast<int>(series.size());
  if (n < 4) throw std::invalid_argument("spectrum: series too short");
  Spectrum s;
  s.freq.resize(n);
  s.magnitude.resize(n);
  const double w0 = 2.0 * std::numbers::pi / n;
  for (int k = 0; k < n; ++k) {
    double re = 0, im = 0;
    for (int j = 0; j < n; ++j) {
      re += series[j] * std::cos(w0 * k * j);
      im -= series[j] * std::sin(w0 * k * j);
    }
    s.freq[k] = k / (n * dt_sample);
    s.magnitude[k] = std::hypot(re, im);
  }
  return s;
}

double dominant_nonzero_frequency(const Spectrum& s) {
  const int n = static_cast<int>(s.freq.size());
  int best = -1;
  for (int k = 1; k <= n / 2; ++k)
    if (best < 0 || s.magnitude[k] > s.magnitude[best]) best = k;
  if (best < 0 || s.magnitude[best] <= 1e-12 * (1.0 + s.magnitude[0]))
    throw std::runtime_error("spectrum: no nonzero mode");
  return s.freq[best];
}

std::vector<int> region_counts(const Particles& p,
                               const std::vector<std::array<double, 2>>& slabs) {
  std::vector<int> counts(slabs.size(), 0);
  for (const Vec3& x : p.x)
    for (std::size_t r = 0; r < slabs.size(); ++r)
      if (x.z() >= slabs[r][0] && x.z() <= slabs[r][1]) ++counts[r];
  return counts;
}

RadialHistogram radial_histogram(const Particles& p, int bins, double rmax) {
  RadialHistogram h;
  h.centers.resize(bins);
  h.counts = VectorXd::Zero(bins);
  h.density.resize(bins);
  h.reference.resize(bins);
  const double dr = rmax / bins;
  for (const Vec3& x : p.x) {
    int b = static_cast<int>(x.norm() / dr);
    if (b >= bins) b = bins - 1;
    h.counts[b] += 1.0;
  }
  const double n = std::max(1, p.size());
  for (int b = 0; b < bins; ++b) {
    const double rc = (b + 0.5) * dr;
    h.centers[b] = rc;
    h.density[b] = h.counts[b] / (n * dr);
    h.reference[b] = 3.0 * rc * rc / (rmax * rmax * rmax);
  }
  return h;
}

} // namespace plasim

#ifndef PLASIM_DYNAMICS_HPP
#define PLASIM_DYNAMICS_HPP

#include "plasim/mesh.hpp"

#include <array>
#include <cstdint>
#include <functional>

namespace plasim {

/// Particle arrays: position/velocity nondimensional, charge in units of e
/// (signed), mass in units of m_e, weight w = |Omega|/N.
struct Particles {
  std::vector<Vec3> x, v;
  std::vector<double> q, m, w;

  int size() const { return static_cast<int>(x.size()); }
  double kinetic_energy() const;  // 1/2 sum w m |v|^2
};

/// Initial velocity distribution: zero, or bulk + sqrt(T) * standard normal
/// per component.
struct VelocityLaw {
  enum class Kind { Zero, Maxwellian };
  Kind kind = Kind::Zero;
  double T = 1.0;
  Vec3 bulk = Vec3::Zero();
};

/// Sampling domain: indicator + bounding box + volume (for the weight).
struct SampleShape {
  std::function<bool(const Vec3&)> inside;
  Vec3 lo, hi;
  double volume = 0.0;
};

SampleShape shape_of(const SurfaceMesh& mesh);
SampleShape ball_shape(double radius);
/// Cylinder along z, centered at the origin.
SampleShape cylinder_shape(double radius, double height);

/// Rejection-sampled uniform positions with the given velocity law; aborts if
/// the acceptance rate falls below 1%.
Particles init_uniform(const SampleShape& shape, int N, const VelocityLaw& law,
                       double charge, double mass, std::uint64_t seed);
Particles init_uniform(const SurfaceMesh& mesh, int N, const VelocityLaw& law,
                       double charge, double mass, std::uint64_t seed);

/// E at the given positions, one row per point.
using FieldCallback = std::function<MatrixXd(const std::vector<Vec3>&)>;

/// Velocity-first kick-drift: v += dt (q/m) E(x); x += dt v.
void step_leapfrog(Particles& p, const FieldCallback& field, double dt);

/// Boris pusher with constant B: half kick, rotation through
/// t = (qB/m)(dt/2), s = 2t/(1+|t|^2), half kick, drift. B = 0 reduces to
/// leapfrog exactly.
void step_boris(Particles& p, const FieldCallback& field, const Vec3& B, double dt);

/// Removes particles outside the domain (order-stable); returns the count.
int absorb(Particles& p, const InsideQuery& inside);
int absorb(Particles& p, const SurfaceMesh& mesh);

/// Plain DFT of a real series sampled at dt_sample (frequencies in cycles per
/// time unit, k/(n dt)).
struct Spectrum {
  VectorXd freq, magnitude;
};
Spectrum spectrum(const VectorXd& series, double dt_sample);
/// Frequency of the largest nonzero mode up to Nyquist; throws on a constant
/// series.
double dominant_nonzero_frequency(const Spectrum& s);

/// Closed-interval slab membership counts by z coordinate.
std::vector<int> region_counts(const Particles& p,
                               const std::vector<std::array<double, 2>>& slabs);

/// Radial density (normalized to unit integral over [0, rmax]) with the
/// uniform-ball reference 3 r^2 / rmax^3; out-of-range radii land in the last
/// bin so the counts always sum to the particle count.
struct RadialHistogram {
  VectorXd centers, counts, density, reference;
};
RadialHistogram radial_histogram(const Particles& p, int bins, double rmax = 1.0);

} // namespace plasim

#endif

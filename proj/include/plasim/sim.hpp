#ifndef PLASIM_SIM_HPP
#define PLASIM_SIM_HPP

#include "plasim/dynamics.hpp"
#include "plasim/field.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>

namespace plasim {

/// Full description of a time-loop run. `density_factor` scales the particle
/// weights and the neutralizing background relative to the reference density
/// n0; B is the nondimensional magnetic field (omega_c * t0 for a unit
/// charge-to-mass ratio).
struct SimConfig {
  std::string name = "run";
  SurfaceMesh mesh;
  BoundaryCondition bc;
  NondimensionalParameters params = make_params(0.1, 1e12, 1.0);

  int n_particles = 1000;
  VelocityLaw law;
  SampleShape init_shape;  // unset -> sample the mesh interior
  bool has_init_shape = false;
  double charge = -1.0;
  double mass = 1.0;

  double density_factor = 1.0;
  bool background = false;
  Vec3 B = Vec3::Zero();
  std::string pusher = "leapfrog";  // or "boris"
  double dt = 1e-3;
  int steps = 100;
  std::uint64_t seed = 1;
  bool absorption = true;
  std::vector<std::array<double, 2>> slabs = {{-2.5, 2.0}, {-0.25, 0.25}, {2.0, 2.5}};
  FieldConfig field;
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  int alive = 0;
  std::array<int, 3> region{};
  double kinetic_energy = 0.0;
};

struct SimResult {
  std::vector<StepRecord> series;
  Particles final_state;
  Spectrum spec;  // of the middle-slab series, if it has a nonzero mode
  bool has_spectrum = false;
  double dominant_freq = 0.0;        // cycles per t0
  double angular_frequency = 0.0;    // rad/s, physical
  SolveStats last_solve;
  double seconds = 0.0;
  std::map<std::string, double> stage_seconds;
};

/// Runs the loop: solve the boundary value problem, evaluate the total field
/// at the particles, push, absorb, record diagnostics. steps = 0 records the
/// initial diagnostics only.
SimResult run_simulation(const SimConfig& cfg);

/// Writes timeseries.csv, final_state.csv, spectrum.csv (when present) and
/// summary.json into out_dir; config_text is hashed into the summary.
void write_outputs(const SimResult& result, const SimConfig& cfg,
                   const std::string& out_dir, const std::string& config_text);

/// FNV-1a hash, hex-encoded; used for the config fingerprint in summaries.
std::string fnv1a_hex(const std::string& text);

} // namespace plasim

#endif

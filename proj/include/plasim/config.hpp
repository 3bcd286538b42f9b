#ifndef PLASIM_CONFIG_HPP
#define PLASIM_CONFIG_HPP

#include "plasim/sim.hpp"

namespace plasim {

/// Parsed run configuration: the simulation setup plus sweep and benchmark
/// parameters. `text` keeps the raw file content for fingerprinting.
struct RunFile {
  SimConfig sim;
  std::vector<double> sweep_factors = {1.0, 4.0, 16.0, 64.0};
  double sweep_dt = 8e-4;  // at factor 1; scaled by 1/sqrt(factor)
  int sweep_steps = 2330;
  std::vector<int> bench_ladder = {1000, 4000, 16000, 64000};
  std::vector<int> bench_levels = {2, 3, 4, 5};
  int bench_particles = 10000;
  int bench_repeats = 3;
  std::string text;
};

/// Flat `[section]` / `key = value` format; `#` starts a comment. Unknown
/// keys or sections are rejected with the offending name.
RunFile parse_config(const std::string& text);
RunFile load_config(const std::string& path);

} // namespace plasim

#endif

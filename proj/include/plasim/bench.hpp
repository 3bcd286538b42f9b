#ifndef PLASIM_BENCH_HPP
#define PLASIM_BENCH_HPP

#include "plasim/field.hpp"

#include <map>
#include <string>

namespace plasim {

struct BenchRow {
  std::string stage;
  long n = 0;
  double seconds = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::map<std::string, double> slopes;  // log-log fit per stage
};

/// Least-squares slope of log(t) against log(n).
double loglog_slope(const std::vector<double>& n, const std::vector<double>& t);

/// Particle-count ladder on a fixed mesh: times cluster-basis rebuild, N0
/// assembly, the particle field and the representation-formula gradient;
/// median of `repeats` runs per stage.
BenchResult bench_field(const SurfaceMesh& mesh, const std::vector<int>& ladder,
                        const H2Config& cfg, std::uint64_t seed, int repeats = 3);

/// Triangle-count ladder (sphere refinement levels) at a fixed particle
/// count: times N0 and the representation gradient.
BenchResult bench_bem(const std::vector<int>& levels, int n_particles, const H2Config& cfg,
                      std::uint64_t seed, int repeats = 3);

/// bench.csv (stage,n,seconds) + bench.json (slopes, config hash).
void write_bench_outputs(const BenchResult& result, const std::string& out_dir,
                         const std::string& config_text);

} // namespace plasim

#endif

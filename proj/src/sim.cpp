#include "plasim/sim.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace plasim {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

StepRecord record_step(int step, double time, const Particles& p,
                       const std::vector<std::array<double, 2>>& slabs) {
  StepRecord r;
  r.step = step;
  r.time = time;
  r.alive = p.size();
  const auto counts = region_counts(p, slabs);
  for (int i = 0; i < 3 && i < static_cast<int>(counts.size()); ++i) r.region[i] = counts[i];
  r.kinetic_energy = p.kinetic_energy();
  return r;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

SimResult run_simulation(const SimConfig& cfg) {
  const auto t_start = Clock::now();
  SimResult res;

  auto t0 = Clock::now();
  const GalerkinMatrices mats = assemble_galerkin(cfg.mesh);
  const double bgf = cfg.background ? cfg.density_factor : 0.0;
  const BvpSolver solver(mats, cfg.mesh, cfg.bc, cfg.params, bgf, cfg.field);
  res.stage_seconds["assembly"] = elapsed(t0);

  Particles p = cfg.has_init_shape
                    ? init_uniform(cfg.init_shape, cfg.n_particles, cfg.law, cfg.charge,
                                   cfg.mass, cfg.seed)
                    : init_uniform(cfg.mesh, cfg.n_particles, cfg.law, cfg.charge, cfg.mass,
                                   cfg.seed);
  for (double& w : p.w) w *= cfg.density_factor;
  const InsideQuery inside(cfg.mesh);

  res.series.push_back(record_step(0, 0.0, p, cfg.slabs));
  for (int s = 1; s <= cfg.steps; ++s) {
    VectorXd wq(p.size());
    for (int i = 0; i < p.size(); ++i) wq[i] = p.w[i] * p.q[i];

    t0 = Clock::now();
    const TraceSolution traces = solver.solve(p.x, wq);
    res.last_solve = traces.stats;
    res.stage_seconds["solve"] += elapsed(t0);

    t0 = Clock::now();
    const FieldCallback field = [&](const std::vector<Vec3>& xs) {
      return evaluate_total_field(traces, cfg.mesh, xs, wq, cfg.params, bgf, cfg.field).E;
    };
    if (cfg.pusher == "boris")
      step_boris(p, field, cfg.B, cfg.dt);
    else
      step_leapfrog(p, field, cfg.dt);
    res.stage_seconds["field_push"] += elapsed(t0);

    if (cfg.absorption) absorb(p, inside);
    res.series.push_back(record_step(s, s * cfg.dt, p, cfg.slabs));
  }

  if (static_cast<int>(res.series.size()) >= 4) {
    VectorXd series(res.series.size());
    for (std::size_t i = 0; i < res.series.size(); ++i) series[i] = res.series[i].region[1];
    res.spec = spectrum(series, cfg.dt);
    try {
      res.dominant_freq = dominant_nonzero_frequency(res.spec);
      res.angular_frequency = 2.0 * std::numbers::pi * res.dominant_freq / cfg.params.t0;
      res.has_spectrum = true;
    } catch (const std::runtime_error&) {
      res.has_spectrum = false;
    }
  }
  res.final_state = std::move(p);
  res.seconds = elapsed(t_start);
  return res;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_outputs(const SimResult& result, const SimConfig& cfg,
                   const std::string& out_dir, const std::string& config_text) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream f(fs::path(out_dir) / "timeseries.csv");
    f << "step,time,alive,region1,region2,region3,kinetic_energy\n";
    for (const StepRecord& r : result.series)
      f << r.step << ',' << fmt(r.time) << ',' << r.alive << ',' << r.region[0] << ','
        << r.region[1] << ',' << r.region[2] << ',' << fmt(r.kinetic_energy) << '\n';
  }
  {
    std::ofstream f(fs::path(out_dir) / "final_state.csv");
    f << "x,y,z,vx,vy,vz,q,m,w\n";
    const Particles& p = result.final_state;
    for (int i = 0; i < p.size(); ++i)
      f << fmt(p.x[i].x()) << ',' << fmt(p.x[i].y()) << ',' << fmt(p.x[i].z()) << ','
        << fmt(p.v[i].x()) << ',' << fmt(p.v[i].y()) << ',' << fmt(p.v[i].z()) << ','
        << fmt(p.q[i]) << ',' << fmt(p.m[i]) << ',' << fmt(p.w[i]) << '\n';
  }
  if (result.has_spectrum) {
    std::ofstream f(fs::path(out_dir) / "spectrum.csv");
    f << "freq,magnitude\n";
    for (int k = 0; k < result.spec.freq.size(); ++k)
      f << fmt(result.spec.freq[k]) << ',' << fmt(result.spec.magnitude[k]) << '\n';
  }

  nlohmann::json j;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["config_hash"] = fnv1a_hex(config_text);
  j["parameters"] = {{"L0", cfg.params.L0},     {"n0", cfg.params.n0},
                     {"kT0", cfg.params.kT0},   {"beta", cfg.params.beta},
                     {"t0", cfg.params.t0},     {"v0", cfg.params.v0}};
  j["run"] = {{"particles", cfg.n_particles},
              {"steps", cfg.steps},
              {"dt", cfg.dt},
              {"pusher", cfg.pusher},
              {"density_factor", cfg.density_factor},
              {"background", cfg.background},
              {"B", {cfg.B.x(), cfg.B.y(), cfg.B.z()}},
              {"absorption", cfg.absorption}};
  j["results"] = {{"alive_final", result.final_state.size()},
                  {"has_spectrum", result.has_spectrum},
                  {"dominant_freq_per_t0", result.dominant_freq},
                  {"angular_frequency_rad_s", result.angular_frequency}};
  j["solver"] = {{"method", result.last_solve.method},
                 {"iterations", result.last_solve.iterations},
                 {"residual", result.last_solve.residual},
                 {"converged", result.last_solve.converged}};
  j["timings"] = {{"total_seconds", result.seconds}};
  for (const auto& [k, v] : result.stage_seconds) j["timings"][k] = v;

  std::ofstream f(fs::path(out_dir) / "summary.json");
  f << j.dump(2) << '\n';
}

} // namespace plasim

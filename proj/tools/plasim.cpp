#include <CLI11.hpp>
#include <json.hpp>

#include "plasim/bench.hpp"
#include "plasim/config.hpp"
#include "plasim/sim.hpp"

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace plasim;

namespace {

void dump_tree_stats(const SimConfig& sim, const std::string& out_dir) {
  const Particles p = sim.has_init_shape
                          ? init_uniform(sim.init_shape, sim.n_particles, sim.law, sim.charge,
                                         sim.mass, sim.seed)
                          : init_uniform(sim.mesh, sim.n_particles, sim.law, sim.charge,
                                         sim.mass, sim.seed);
  const ClusterTree tree(p.x, sim.field.h2.leaf_cap);
  const BlockClusterTree blocks(tree, tree,
                                AdmissibilityConfig{sim.field.h2.eta, AdmissibilityVariant::Max});
  nlohmann::json j;
  j["depth"] = tree.depth();
  j["leaf_count"] = tree.leaf_count();
  j["admissible_blocks"] = blocks.admissible().size();
  j["nearfield_blocks"] = blocks.nearfield().size();
  j["nearfield_fraction"] = blocks.nearfield_fraction();
  std::filesystem::create_directories(out_dir);
  std::ofstream f(std::filesystem::path(out_dir) / "tree_stats.json");
  f << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid-free Vlasov-Poisson simulator: H2 summation + Galerkin BEM"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false, stats = false;
  int threads = 1;
  app.add_option("--config", config_path, "configuration file");
  app.add_option("--seed", seed, "override the RNG seed")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--threads", threads, "worker thread cap");
  app.add_flag("--stats", stats, "dump cluster/block tree statistics");

  auto* gen = app.add_subcommand("gen-mesh", "generate a surface mesh");
  std::string shape = "sphere", mesh_out = "mesh.txt";
  int level = 3, resolution = 32;
  double radius = 1.0, height = 5.0;
  gen->add_option("--shape", shape, "sphere|cylinder|accelerator");
  gen->add_option("--level", level, "sphere refinement level");
  gen->add_option("--radius", radius, "cylinder radius");
  gen->add_option("--height", height, "cylinder height");
  gen->add_option("--resolution", resolution, "revolution resolution");
  gen->add_option("--out", mesh_out, "output path");

  auto* bf = app.add_subcommand("bench-field", "particle-count scaling benchmark");
  auto* bb = app.add_subcommand("bench-bem", "triangle-count scaling benchmark");
  auto* sm = app.add_subcommand("simulate", "run the time loop");
  auto* sw = app.add_subcommand("sweep-density", "oscillation frequency vs density");

  CLI11_PARSE(app, argc, argv);
  Eigen::setNbThreads(threads);

  try {
    if (gen->parsed()) {
      SurfaceMesh m;
      if (shape == "sphere") m = generate_sphere(level);
      else if (shape == "cylinder") m = generate_cylinder(radius, height, resolution);
      else if (shape == "accelerator") m = generate_accelerator(resolution);
      else throw std::runtime_error("unknown shape " + shape);
      save_mesh(m, mesh_out);
      std::cout << "wrote " << mesh_out << " (" << m.num_triangles() << " triangles)\n";
      return 0;
    }

    RunFile rf = config_path.empty() ? RunFile{} : load_config(config_path);
    if (config_path.empty()) rf.sim.mesh = generate_sphere(3);
    if (rf.sim.bc.regions.empty())
      for (int l : rf.sim.mesh.region_label) rf.sim.bc.regions[l] = {BCKind::Dirichlet, 0.0, ""};
    if (seed_set) rf.sim.seed = seed;
    if (stats) dump_tree_stats(rf.sim, out_dir);

    if (bf->parsed()) {
      const BenchResult res = bench_field(rf.sim.mesh, rf.bench_ladder, rf.sim.field.h2,
                                          rf.sim.seed, rf.bench_repeats);
      write_bench_outputs(res, out_dir, rf.text);
      for (const auto& [stage, slope] : res.slopes)
        std::cout << stage << " slope " << slope << '\n';
    } else if (bb->parsed()) {
      const BenchResult res = bench_bem(rf.bench_levels, rf.bench_particles, rf.sim.field.h2,
                                        rf.sim.seed, rf.bench_repeats);
      write_bench_outputs(res, out_dir, rf.text);
      for (const auto& [stage, slope] : res.slopes)
        std::cout << stage << " slope " << slope << '\n';
    } else if (sm->parsed()) {
      const SimResult res = run_simulation(rf.sim);
      write_outputs(res, rf.sim, out_dir, rf.text);
      std::cout << "alive " << res.final_state.size() << " of " << rf.sim.n_particles
                << " after " << rf.sim.steps << " steps (" << res.seconds << " s)\n";
    } else if (sw->parsed()) {
      namespace fs = std::filesystem;
      fs::create_directories(out_dir);
      std::ofstream csv(fs::path(out_dir) / "sweep.csv");
      csv << "factor,freq_per_t0,angular_frequency\n";
      std::vector<double> fs_ok, freqs;
      nlohmann::json errors = nlohmann::json::array();
      for (double f : rf.sweep_factors) {
        SimConfig run = rf.sim;
        run.density_factor = f;
        run.dt = rf.sweep_dt / std::sqrt(f);
        run.steps = rf.sweep_steps;
        try {
          const SimResult res = run_simulation(run);
          if (!res.has_spectrum) throw std::runtime_error("no nonzero mode");
          csv << f << ',' << res.dominant_freq << ',' << res.angular_frequency << '\n';
          fs_ok.push_back(f);
          freqs.push_back(res.dominant_freq);
          std::cout << "factor " << f << ": " << res.angular_frequency << " rad/s\n";
        } catch (const std::exception& e) {
          errors.push_back({{"factor", f}, {"error", e.what()}});
          std::cout << "factor " << f << " failed: " << e.what() << '\n';
        }
      }
      nlohmann::json j;
      j["config_hash"] = fnv1a_hex(rf.text);
      j["errors"] = errors;
      if (fs_ok.size() >= 2) j["slope"] = loglog_slope(fs_ok, freqs);
      std::ofstream jf(fs::path(out_dir) / "sweep.json");
      jf << j.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

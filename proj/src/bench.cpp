#include "plasim/bench.hpp"

#include "plasim/dynamics.hpp"
#include "plasim/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace plasim {

namespace {

using Clock = std::chrono::steady_clock;

double time_median(const std::function<void()>& fn, int repeats) {
  std::vector<double> t;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    fn();
    t.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

struct StageSet {
  std::vector<double> ns, ts;
};

void push(BenchResult& res, std::map<std::string, StageSet>& sets, const std::string& stage,
          long n, double seconds) {
  res.rows.push_back({stage, n, seconds});
  sets[stage].ns.push_back(static_cast<double>(n));
  sets[stage].ts.push_back(seconds);
}

void fit(BenchResult& res, const std::map<std::string, StageSet>& sets) {
  for (const auto& [stage, s] : sets)
    if (s.ns.size() >= 2) res.slopes[stage] = loglog_slope(s.ns, s.ts);
}

}  // namespace

double loglog_slope(const std::vector<double>& n, const std::vector<double>& t) {
  const int m = static_cast<int>(n.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    const double x = std::log(n[i]), y = std::log(t[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

BenchResult bench_field(const SurfaceMesh& mesh, const std::vector<int>& ladder,
                        const H2Config& cfg, std::uint64_t seed, int repeats) {
  BenchResult res;
  std::map<std::string, StageSet> sets;
  const NondimensionalParameters params = make_params(0.1, 1e12, 1.0);
  const QuadNodes nodes = edge_midpoint_nodes(mesh);
  FieldConfig fcfg;
  fcfg.h2 = cfg;
  TraceSolution dummy;
  dummy.dirichlet = VectorXd::Ones(mesh.num_vertices());
  dummy.neumann = VectorXd::Ones(mesh.num_triangles());

  for (int N : ladder) {
    const Particles p = init_uniform(mesh, N, {}, -1.0, 1.0, seed);
    VectorXd wq(N);
    for (int i = 0; i < N; ++i) wq[i] = p.w[i] * p.q[i];

    push(res, sets, "basis", N, time_median([&] {
           ClusterTree tree(p.x, cfg.leaf_cap);
           ClusterBasis basis(tree, InterpolationScheme{cfg.order});
         }, repeats));
    push(res, sets, "n0", N, time_median([&] {
           assemble_N0(mesh, nodes, p.x, wq, 1.0 / params.beta, cfg);
         }, repeats));
    push(res, sets, "particle_field", N, time_median([&] {
           coulomb_field(p.x, p.x, wq, 1.0 / params.beta, cfg, true);
         }, repeats));
    push(res, sets, "rep_gradient", N, time_median([&] {
           evaluate_field_at(p.x, dummy, mesh, {}, VectorXd(), params, 0.0, fcfg);
         }, repeats));
  }
  fit(res, sets);
  return res;
}

BenchResult bench_bem(const std::vector<int>& levels, int n_particles, const H2Config& cfg,
                      std::uint64_t seed, int repeats) {
  BenchResult res;
  std::map<std::string, StageSet> sets;
  const NondimensionalParameters params = make_params(0.1, 1e12, 1.0);
  const Particles p = init_uniform(ball_shape(1.0), n_particles, {}, -1.0, 1.0, seed);
  VectorXd wq(n_particles);
  for (int i = 0; i < n_particles; ++i) wq[i] = p.w[i] * p.q[i];
  FieldConfig fcfg;
  fcfg.h2 = cfg;

  for (int level : levels) {
    const SurfaceMesh mesh = generate_sphere(level);
    const QuadNodes nodes = edge_midpoint_nodes(mesh);
    TraceSolution dummy;
    dummy.dirichlet = VectorXd::Ones(mesh.num_vertices());
    dummy.neumann = VectorXd::Ones(mesh.num_triangles());
    const long nt = mesh.num_triangles();

    push(res, sets, "n0", nt, time_median([&] {
           assemble_N0(mesh, nodes, p.x, wq, 1.0 / params.beta, cfg);
         }, repeats));
    push(res, sets, "rep_gradient", nt, time_median([&] {
           evaluate_field_at(p.x, dummy, mesh, {}, VectorXd(), params, 0.0, fcfg);
         }, repeats));
  }
  fit(res, sets);
  return res;
}

void write_bench_outputs(const BenchResult& result, const std::string& out_dir,
                         const std::string& config_text) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "bench.csv");
    f << "stage,n,seconds\n";
    for (const BenchRow& r : result.rows)
      f << r.stage << ',' << r.n << ',' << r.seconds << '\n';
  }
  nlohmann::json j;
  j["config_hash"] = fnv1a_hex(config_text);
  for (const auto& [stage, slope] : result.slopes) j["slopes"][stage] = slope;
  std::ofstream f(fs::path(out_dir) / "bench.json");
  f << j.dump(2) << '\n';
}

} // namespace plasim

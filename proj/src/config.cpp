#include "plasim/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace plasim {

namespace {

constexpr double kElemCharge = 1.602176634e-19;   // C
constexpr double kElectronMass = 9.1093837015e-31;  // kg

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::runtime_error("config: boolean expected for " + key);
}

template <typename T>
std::vector<T> parse_list(const std::string& v) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<T>(std::stod(trim(item))));
  return out;
}

struct MeshSpec {
  std::string shape = "sphere";
  int level = 3;
  double radius = 1.0, height = 5.0;
  int resolution = 32;
  std::string path;
};

struct ParticleShapeSpec {
  std::string shape = "mesh";
  double radius = 1.0, height = 4.0;
};

BoundaryCondition::Entry parse_bc_entry(const std::string& v, const std::string& key) {
  std::stringstream ss(v);
  std::string kind, datum;
  ss >> kind >> datum;
  BoundaryCondition::Entry e;
  if (kind == "dirichlet")
    e.kind = BCKind::Dirichlet;
  else if (kind == "neumann")
    e.kind = BCKind::Neumann;
  else
    throw std::runtime_error("config: dirichlet|neumann expected for " + key);
  if (datum.empty()) datum = "0";
  try {
    std::size_t used = 0;
    e.value = std::stod(datum, &used);
    if (used != datum.size()) throw std::invalid_argument(datum);
  } catch (const std::invalid_argument&) {
    e.field = datum;
  }
  return e;
}

}  // namespace

RunFile parse_config(const std::string& text) {
  RunFile rf;
  rf.text = text;
  SimConfig& sim = rf.sim;
  MeshSpec mesh;
  ParticleShapeSpec pshape;
  double L0 = 0.1, n0 = 1e12, kT0 = 1.0, B_tesla = 0.0;

  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: malformed section at line " + std::to_string(lineno));
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: key = value expected at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;

    if (section == "run") {
      if (key == "name") sim.name = value;
      else if (key == "seed") sim.seed = std::stoull(value);
      else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "mesh") {
      if (key == "shape") mesh.shape = value;
      else if (key == "level") mesh.level = std::stoi(value);
      else if (key == "radius") mesh.radius = std::stod(value);
      else if (key == "height") mesh.height = std::stod(value);
      else if (key == "resolution") mesh.resolution = std::stoi(value);
      else if (key == "path") mesh.path = value;
      else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "physics") {
      if (key == "L0") L0 = std::stod(value);
      else if (key == "n0") n0 = std::stod(value);
      else if (key == "kT0") kT0 = std::stod(value);
      else if (key == "density_factor") sim.density_factor = std::stod(value);
      else if (key == "background") sim.background = parse_bool(value, full);
      else if (key == "B_tesla") B_tesla = std::stod(value);
      else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "bc") {
      if (key.rfind("region.", 0) == 0)
        sim.bc.regions[std::stoi(key.substr(7))] = parse_bc_entry(value, full);
      else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "particles") {
      if (key == "count") sim.n_particles = std::stoi(value);
      else if (key == "velocity") {
        if (value == "zero") sim.law.kind = VelocityLaw::Kind::Zero;
        else if (value == "maxwellian") sim.law.kind = VelocityLaw::Kind::Maxwellian;
        else throw std::runtime_error("config: zero|maxwellian expected for " + full);
      } else if (key == "temperature") sim.law.T = std::stod(value);
      else if (key == "bulk_x") sim.law.bulk.x() = std::stod(value);
      else if (key == "bulk_y") sim.law.bulk.y() = std::stod(value);
      else if (key == "bulk_z") sim.law.bulk.z() = std::stod(value);
      else if (key == "charge") sim.charge = std::stod(value);
      else if (key == "mass") sim.mass = std::stod(value);
      else if (key == "shape") pshape.shape = value;
      else if (key == "shape_radius") pshape.radius = std::stod(value);
      else if (key == "shape_height") pshape.height = std::stod(value);
      else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "time") {
      if (key == "dt") sim.dt = std::stod(value);
      else if (key == "steps") sim.steps = std::stoi(value);
      else if (key == "pusher") sim.pusher = value;
      else if (key == "absorption") sim.absorption = parse_bool(value, full);
      else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "h2") {
      if (key == "order") sim.field.h2.order = std::stoi(value);
      else if (key == "eta") sim.field.h2.eta = std::stod(value);
      else if (key == "leaf_cap") sim.field.h2.leaf_cap = std::stoi(value);
      else if (key == "delta") sim.field.h2.delta = std::stod(value);
      else if (key == "on_the_fly") sim.field.h2.on_the_fly = parse_bool(value, full);
      else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "solver") {
      if (key == "tol") sim.field.solver.tol = std::stod(value);
      else if (key == "max_iterations") sim.field.solver.max_iterations = std::stoi(value);
      else if (key == "restart") sim.field.solver.restart = std::stoi(value);
      else if (key == "dense_threshold") sim.field.dense_threshold = std::stoi(value);
      else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "diagnostics") {
      if (key == "slab1" || key == "slab2" || key == "slab3") {
        std::stringstream ss(value);
        double lo, hi;
        ss >> lo >> hi;
        sim.slabs[key[4] - '1'] = {lo, hi};
      } else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "sweep") {
      if (key == "factors") rf.sweep_factors = parse_list<double>(value);
      else if (key == "dt") rf.sweep_dt = std::stod(value);
      else if (key == "steps") rf.sweep_steps = std::stoi(value);
      else throw std::runtime_error("config: unknown key " + full);
    } else if (section == "bench") {
      if (key == "ladder") rf.bench_ladder = parse_list<int>(value);
      else if (key == "levels") rf.bench_levels = parse_list<int>(value);
      else if (key == "particles") rf.bench_particles = std::stoi(value);
      else if (key == "repeats") rf.bench_repeats = std::stoi(value);
      else throw std::runtime_error("config: unknown key " + full);
    } else {
      throw std::runtime_error("config: unknown section [" + section + "]");
    }
  }

  sim.params = make_params(L0, n0, kT0);
  // nondimensional B: electron gyrofrequency (e B / m_e) times t0
  if (B_tesla != 0.0)
    sim.B = Vec3(0, 0, kElemCharge * B_tesla / kElectronMass * sim.params.t0);

  if (mesh.shape == "sphere") sim.mesh = generate_sphere(mesh.level);
  else if (mesh.shape == "cylinder")
    sim.mesh = generate_cylinder(mesh.radius, mesh.height, mesh.resolution);
  else if (mesh.shape == "accelerator") sim.mesh = generate_accelerator(mesh.resolution);
  else if (mesh.shape == "file") sim.mesh = load_mesh(mesh.path);
  else throw std::runtime_error("config: unknown mesh.shape " + mesh.shape);

  if (sim.bc.regions.empty())
    for (int l : sim.mesh.region_label) sim.bc.regions[l] = {BCKind::Dirichlet, 0.0, ""};
  sim.bc.validate(sim.mesh);

  if (pshape.shape == "ball") {
    sim.init_shape = ball_shape(pshape.radius);
    sim.has_init_shape = true;
  } else if (pshape.shape == "cylinder") {
    sim.init_shape = cylinder_shape(pshape.radius, pshape.height);
    sim.has_init_shape = true;
  } else if (pshape.shape != "mesh") {
    throw std::runtime_error("config: unknown particles.shape " + pshape.shape);
  }
  return rf;
}

RunFile load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

} // namespace plasim

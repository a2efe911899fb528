#include "rts_sph/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "rts_sph/errors.hpp"
#include "rts_sph/kernels.hpp"

namespace rts {

double region_beta(int n) {
  if (n <= 1) return std::numeric_limits<double>::infinity();
  return 0.4 * std::pow(0.2, n - 2);
}

double wcsph_default_base_step(const Scene& scene) {
  const double r = scene.support_radius();
  return scene.lambda_v * r / (scene.minor_steps * scene.sound_speed);
}

double pcisph_default_base_step(const Scene& scene) {
  return scene.dt_base.value_or(kPcisphBaseStep);
}

double pcisph_constant_step(const Scene& scene) {
  return pcisph_default_base_step(scene) * (kPcisphConstStep / kPcisphBaseStep);
}

// ---------------------------------------------------------------------------
// Presets

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"dam_break", "double_dam_break", "block_drop",
                                              "corridor"};
  return names;
}

bool is_preset(std::string_view name) {
  const auto& names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Scene make_preset(std::string_view name) {
  Scene s;
  s.preset = std::string(name);
  if (name == "dam_break") {
    // 20 x 20 x 20 = 8000 particles against the -x wall.
    s.domain_min = {0.0, 0.0, 0.0};
    s.domain_max = {1.0, 0.6, 0.4};
    s.fluid_boxes = {{{0.0, 0.0, 0.0}, {0.4, 0.4, 0.4}}};
  } else if (name == "double_dam_break") {
    // Two 20 x 30 x 25 columns in opposite corners, 30000 particles.
    s.domain_min = {0.0, 0.0, 0.0};
    s.domain_max = {1.2, 0.8, 1.2};
    s.fluid_boxes = {{{0.0, 0.0, 0.0}, {0.4, 0.6, 0.5}}, {{0.8, 0.0, 0.7}, {1.2, 0.6, 1.2}}};
  } else if (name == "block_drop") {
    // Dam column plus a cube released above the open floor.
    s.domain_min = {0.0, 0.0, 0.0};
    s.domain_max = {1.0, 1.0, 0.4};
    s.fluid_boxes = {{{0.0, 0.0, 0.0}, {0.3, 0.3, 0.4}}, {{0.5, 0.6, 0.1}, {0.7, 0.8, 0.3}}};
  } else if (name == "corridor") {
    // Long narrow channel fed by a column at one end.
    s.domain_min = {0.0, 0.0, 0.0};
    s.domain_max = {2.0, 0.5, 0.3};
    s.fluid_boxes = {{{0.0, 0.0, 0.0}, {0.4, 0.4, 0.3}}};
  } else {
    throw ValidationError("unknown preset '" + std::string(name) + "'");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string_view trim(std::string_view v) {
  const auto first = v.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = v.find_last_not_of(" \t\r");
  return v.substr(first, last - first + 1);
}

std::vector<double> parse_numbers(std::string_view value, int line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < value.size()) {
    while (pos < value.size() && (value[pos] == ' ' || value[pos] == '\t' || value[pos] == ',')) {
      ++pos;
    }
    if (pos >= value.size()) break;
    double d = 0.0;
    const char* begin = value.data() + pos;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(begin, end, d);
    if (ec != std::errc() || (ptr != end && *ptr != ' ' && *ptr != '\t' && *ptr != ',')) {
      throw ConfigError(line, "expected a number in '" + std::string(value) + "'");
    }
    out.push_back(d);
    pos = static_cast<std::size_t>(ptr - value.data());
  }
  return out;
}

double one_number(std::string_view key, std::string_view value, int line) {
  auto v = parse_numbers(value, line);
  if (v.size() != 1) {
    throw ConfigError(line, "'" + std::string(key) + "' takes exactly one number");
  }
  return v[0];
}

int one_integer(std::string_view key, std::string_view value, int line) {
  const double d = one_number(key, value, line);
  if (d != std::floor(d)) {
    throw ConfigError(line, "'" + std::string(key) + "' must be an integer");
  }
  return static_cast<int>(d);
}

Vec3 three_numbers(std::string_view key, std::string_view value, int line) {
  auto v = parse_numbers(value, line);
  if (v.size() != 3) throw ConfigError(line, "'" + std::string(key) + "' takes three numbers");
  return {v[0], v[1], v[2]};
}

Box six_numbers(std::string_view key, std::string_view value, int line) {
  auto v = parse_numbers(value, line);
  if (v.size() != 6) throw ConfigError(line, "'" + std::string(key) + "' takes six numbers");
  return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
}

struct Entry {
  int line;
  std::string key;
  std::string value;
};

}  // namespace

Scene parse_scene(std::string_view text) {
  static const std::set<std::string, std::less<>> known{
      "domain",     "spacing",  "rest_density", "sound_speed", "viscosity", "gravity",
      "fluid_box",  "boundary_layers", "dt_base", "minor_steps", "lambda_v",  "lambda_f",
      "alpha",      "eta_max",  "eta_avg",      "rho_T",       "preset"};

  std::vector<Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "missing key");
    if (!known.contains(key)) throw ConfigError(line_no, "unknown key '" + std::string(key) + "'");
    if (value.empty()) throw ConfigError(line_no, "missing value for '" + std::string(key) + "'");
    entries.push_back({line_no, std::string(key), std::string(value)});
  }

  // A preset provides the starting point; every explicit key overrides it.
  Scene scene;
  for (const auto& e : entries) {
    if (e.key != "preset") continue;
    if (!is_preset(e.value)) throw ConfigError(e.line, "unknown preset '" + e.value + "'");
    scene = make_preset(e.value);
  }

  bool explicit_boxes = false;
  for (const auto& e : entries) {
    const std::string_view k = e.key;
    const std::string_view v = e.value;
    const int l = e.line;
    if (k == "preset") {
      continue;
    } else if (k == "domain") {
      const Box b = six_numbers(k, v, l);
      scene.domain_min = b.lo;
      scene.domain_max = b.hi;
    } else if (k == "spacing") {
      scene.spacing = one_number(k, v, l);
    } else if (k == "rest_density") {
      scene.rest_density = one_number(k, v, l);
    } else if (k == "sound_speed") {
      scene.sound_speed = one_number(k, v, l);
    } else if (k == "viscosity") {
      scene.viscosity = one_number(k, v, l);
    } else if (k == "gravity") {
      scene.gravity = three_numbers(k, v, l);
    } else if (k == "fluid_box") {
      if (!explicit_boxes) scene.fluid_boxes.clear();
      explicit_boxes = true;
      scene.fluid_boxes.push_back(six_numbers(k, v, l));
    } else if (k == "boundary_layers") {
      scene.boundary_layers = one_integer(k, v, l);
    } else if (k == "dt_base") {
      scene.dt_base = one_number(k, v, l);
    } else if (k == "minor_steps") {
      scene.minor_steps = one_integer(k, v, l);
    } else if (k == "lambda_v") {
      scene.lambda_v = one_number(k, v, l);
    } else if (k == "lambda_f") {
      scene.lambda_f = one_number(k, v, l);
    } else if (k == "alpha") {
      scene.alpha = one_number(k, v, l);
    } else if (k == "eta_max") {
      scene.eta_max = one_number(k, v, l);
    } else if (k == "eta_avg") {
      scene.eta_avg = one_number(k, v, l);
    } else if (k == "rho_T") {
      scene.rho_T = one_number(k, v, l);
    }
  }

  validate(scene);
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scene file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

Scene resolve_scene(const std::string& path_or_preset) {
  if (is_preset(path_or_preset)) {
    Scene s = make_preset(path_or_preset);
    validate(s);
    return s;
  }
  return load_scene(path_or_preset);
}

void validate(const Scene& s) {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };
  if (!(s.spacing > 0.0)) fail("spacing must be positive");
  for (int a = 0; a < 3; ++a) {
    if (!(s.domain_min[a] < s.domain_max[a])) fail("domain_min must be below domain_max");
  }
  if (!(s.rest_density > 0.0)) fail("rest_density must be positive");
  if (!(s.sound_speed > 0.0)) fail("sound_speed must be positive");
  if (!(s.viscosity >= 0.0)) fail("viscosity must be non-negative");
  if (!is_finite(s.gravity)) fail("gravity must be finite");
  if (s.boundary_layers < 0) fail("boundary_layers must be non-negative");
  if (s.dt_base && !(*s.dt_base > 0.0)) fail("dt_base must be positive");
  if (s.minor_steps < 1 || s.minor_steps > 8) fail("minor_steps must lie in 1..8");
  if (!(s.lambda_v > 0.0)) fail("λ_v must be positive");
  if (s.lambda_v > 0.4) fail("λ_v exceeds 0.4");
  if (!(s.lambda_f > 0.0)) fail("λ_f must be positive");
  if (s.lambda_f > 0.25) fail("λ_f exceeds 0.25");
  if (s.alpha && !(*s.alpha > 0.0)) fail("alpha must be positive");
  if (!(s.eta_max > 0.0)) fail("eta_max must be positive");
  if (!(s.eta_avg > 0.0)) fail("eta_avg must be positive");
  if (!(s.rho_T > 0.0)) fail("rho_T must be positive");
  for (const auto& b : s.fluid_boxes) {
    for (int a = 0; a < 3; ++a) {
      if (!(b.lo[a] < b.hi[a])) fail("fluid_box corners must satisfy lo < hi");
      if (b.lo[a] < s.domain_min[a] || b.hi[a] > s.domain_max[a]) {
        fail("fluid_box extends outside the domain");
      }
    }
  }
  if (!s.preset.empty() && !is_preset(s.preset)) fail("unknown preset '" + s.preset + "'");
}

// ---------------------------------------------------------------------------
// Write-back

namespace {

std::string fmt(double d) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d);  // shortest round-trip form
  return std::string(buf, ptr);
}

std::string fmt(const Vec3& v) { return fmt(v.x) + " " + fmt(v.y) + " " + fmt(v.z); }

}  // namespace

std::string write_scene(const Scene& s) {
  std::ostringstream o;
  if (!s.preset.empty()) o << "preset = " << s.preset << "\n";
  o << "domain = " << fmt(s.domain_min) << " " << fmt(s.domain_max) << "\n";
  o << "spacing = " << fmt(s.spacing) << "\n";
  o << "rest_density = " << fmt(s.rest_density) << "\n";
  o << "sound_speed = " << fmt(s.sound_speed) << "\n";
  o << "viscosity = " << fmt(s.viscosity) << "\n";
  o << "gravity = " << fmt(s.gravity) << "\n";
  for (const auto& b : s.fluid_boxes) o << "fluid_box = " << fmt(b.lo) << " " << fmt(b.hi) << "\n";
  o << "boundary_layers = " << s.boundary_layers << "\n";
  if (s.dt_base) o << "dt_base = " << fmt(*s.dt_base) << "\n";
  o << "minor_steps = " << s.minor_steps << "\n";
  o << "lambda_v = " << fmt(s.lambda_v) << "\n";
  o << "lambda_f = " << fmt(s.lambda_f) << "\n";
  if (s.alpha) o << "alpha = " << fmt(*s.alpha) << "\n";
  o << "eta_max = " << fmt(s.eta_max) << "\n";
  o << "eta_avg = " << fmt(s.eta_avg) << "\n";
  o << "rho_T = " << fmt(s.rho_T) << "\n";
  return o.str();
}

std::uint64_t scene_hash(const Scene& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : write_scene(s)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Seeding

namespace {

struct LatticeIndex {
  long i, j, k;
  auto operator<=>(const LatticeIndex&) const = default;
};

long lattice_count(double extent, double s) {
  return static_cast<long>(std::floor(extent / s + 1e-9));
}

// First lattice index whose center (k + 1/2) s lies at or beyond `offset`.
long first_index(double offset, double s) {
  return static_cast<long>(std::ceil(offset / s - 0.5 - 1e-9));
}

}  // namespace

ParticleSet seed_particles(const Scene& scene) {
  const double s = scene.spacing;
  const Vec3 o = scene.domain_min;
  ParticleSet out;

  std::set<LatticeIndex> taken;
  for (const auto& box : scene.fluid_boxes) {
    long lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      lo[a] = first_index(box.lo[a] - o[a], s);
      hi[a] = first_index(box.hi[a] - o[a], s);  // exclusive
    }
    for (long k = lo[2]; k < hi[2]; ++k) {
      for (long j = lo[1]; j < hi[1]; ++j) {
        for (long i = lo[0]; i < hi[0]; ++i) {
          if (!taken.insert({i, j, k}).second) continue;
          out.fluid.push_back({o.x + (static_cast<double>(i) + 0.5) * s,
                               o.y + (static_cast<double>(j) + 0.5) * s,
                               o.z + (static_cast<double>(k) + 0.5) * s});
        }
      }
    }
  }

  const long layers = scene.boundary_layers;
  if (layers > 0) {
    const Vec3 ext = scene.domain_extent();
    const long n[3] = {lattice_count(ext.x, s), lattice_count(ext.y, s), lattice_count(ext.z, s)};
    for (long k = -layers; k < n[2] + layers; ++k) {
      for (long j = -layers; j < n[1] + layers; ++j) {
        for (long i = -layers; i < n[0] + layers; ++i) {
          const bool inside = i >= 0 && i < n[0] && j >= 0 && j < n[1] && k >= 0 && k < n[2];
          if (inside) continue;
          out.boundary.push_back({o.x + (static_cast<double>(i) + 0.5) * s,
                                  o.y + (static_cast<double>(j) + 0.5) * s,
                                  o.z + (static_cast<double>(k) + 0.5) * s});
        }
      }
    }
  }
  return out;
}

double lattice_rest_density(const Scene& scene) {
  const double s = scene.spacing;
  const double h = scene.support_radius();
  const KernelSet kernels(h);
  const int reach = static_cast<int>(std::ceil(h / s));
  double sum = 0.0;
  for (int k = -reach; k <= reach; ++k) {
    for (int j = -reach; j <= reach; ++j) {
      for (int i = -reach; i <= reach; ++i) {
        sum += kernels.w_density(norm(Vec3(i * s, j * s, k * s)));
      }
    }
  }
  return scene.particle_mass() * sum;
}

}  // namespace rts

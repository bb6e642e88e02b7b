#include "cyf/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <random>
#include <set>

#include "cyf/cli/field_io.hpp"

namespace cyf::cli {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Flow: return "flow";
    case Mode::Newton: return "newton";
    case Mode::Sweep: return "sweep";
    case Mode::Bisect: return "bisect";
    case Mode::Probe: return "probe";
    case Mode::Diagnose: return "diagnose";
  }
  return "?";
}

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ValidationError, (path.empty() ? "<root>" : path) + ": " + what);
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string element(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) invalid(path, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) invalid(child(path, item.key()), "unknown key");
  }
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& need(const json& j, const std::string& path, const char* key) {
  const json* v = find(j, key);
  if (!v) invalid(child(path, key), "required key missing");
  return *v;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) invalid(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(path, "expected a finite number");
  return v;
}

long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) invalid(path, "expected an integer");
  return j.get<long>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) invalid(path, "expected true or false");
  return j.get<bool>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) invalid(path, "expected a string");
  return j.get<std::string>();
}

template <class T, class Read>
void optional_into(const json& j, const std::string& path, const char* key, T& target, Read read) {
  if (const json* v = find(j, key)) target = static_cast<T>(read(*v, child(path, key)));
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) invalid(path, "must be positive");
  return v;
}

long positive_int(const json& j, const std::string& path) {
  const long v = integer(j, path);
  if (v <= 0) invalid(path, "must be positive");
  return v;
}

FieldSpec parse_field(const json& j, const std::string& path, int dims,
                      const std::filesystem::path& base_dir) {
  FieldSpec spec;
  if (j.is_number()) {
    spec.value = number(j, path);
    return spec;
  }
  if (!j.is_object()) invalid(path, "expected a number or a field object");
  const std::string kind = text(need(j, path, "kind"), child(path, "kind"));
  if (kind == "constant") {
    require_object(j, path, {"kind", "value"});
    spec.value = number(need(j, path, "value"), child(path, "value"));
    return spec;
  }
  if (kind == "harmonic") {
    require_object(j, path, {"kind", "offset", "terms", "shift_max"});
    spec.kind = FieldSpec::Kind::Harmonic;
    optional_into(j, path, "offset", spec.offset, number);
    optional_into(j, path, "shift_max", spec.shift_max, number);
    const std::string tp = child(path, "terms");
    const json& terms = need(j, path, "terms");
    if (!terms.is_array()) invalid(tp, "expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string ep = element(tp, i);
      const json& t = terms[i];
      require_object(t, ep, {"amplitude", "wave", "phase"});
      HarmonicTerm term;
      term.amplitude = number(need(t, ep, "amplitude"), child(ep, "amplitude"));
      optional_into(t, ep, "phase", term.phase, number);
      const std::string wp = child(ep, "wave");
      const json& wave = need(t, ep, "wave");
      if (!wave.is_array() || static_cast<int>(wave.size()) != dims) {
        invalid(wp, "expected " + std::to_string(dims) + " integers");
      }
      for (std::size_t a = 0; a < wave.size(); ++a) {
        term.wave.push_back(static_cast<int>(integer(wave[a], element(wp, a))));
      }
      spec.terms.push_back(std::move(term));
    }
    return spec;
  }
  if (kind == "random") {
    require_object(j, path, {"kind", "offset", "amplitude", "max_wave", "shift_max"});
    spec.kind = FieldSpec::Kind::Random;
    optional_into(j, path, "offset", spec.offset, number);
    optional_into(j, path, "shift_max", spec.shift_max, number);
    spec.amplitude = number(need(j, path, "amplitude"), child(path, "amplitude"));
    spec.max_wave = static_cast<int>(positive_int(need(j, path, "max_wave"), child(path, "max_wave")));
    return spec;
  }
  if (kind == "file") {
    require_object(j, path, {"kind", "path", "shift_max"});
    spec.kind = FieldSpec::Kind::File;
    optional_into(j, path, "shift_max", spec.shift_max, number);
    const std::string pp = child(path, "path");
    spec.path = base_dir / text(need(j, path, "path"), pp);
    if (!std::filesystem::exists(spec.path)) invalid(pp, "file not found: " + spec.path.string());
    return spec;
  }
  invalid(child(path, "kind"), "unknown field kind '" + kind + "'");
}

Mode parse_mode(const json& j) {
  const std::string m = text(j, "mode");
  for (Mode mode : {Mode::Flow, Mode::Newton, Mode::Sweep, Mode::Bisect, Mode::Probe, Mode::Diagnose}) {
    if (m == to_string(mode)) return mode;
  }
  invalid("mode", "unknown mode '" + m + "'");
}

void parse_newton(const json& j, NewtonParams& p) {
  const std::string path = "newton";
  require_object(j, path, {"tol_residual", "max_iter", "damping", "max_halvings", "linear_tol"});
  optional_into(j, path, "tol_residual", p.tol_residual, positive);
  optional_into(j, path, "max_iter", p.max_iter, positive_int);
  optional_into(j, path, "damping", p.damping, positive);
  optional_into(j, path, "max_halvings", p.max_halvings, positive_int);
  optional_into(j, path, "linear_tol", p.linear_tol, positive);
  if (p.damping >= 1.0) invalid("newton.damping", "must lie in (0, 1)");
}

void parse_flow(const json& j, FlowParams& p) {
  const std::string path = "flow";
  require_object(j, path,
                 {"dt_init", "dt_max", "dt_growth", "eps_stop", "t_max", "defect_tol", "max_steps",
                  "monitors"});
  optional_into(j, path, "dt_init", p.dt_init, positive);
  optional_into(j, path, "dt_max", p.dt_max, positive);
  optional_into(j, path, "dt_growth", p.dt_growth, positive);
  optional_into(j, path, "eps_stop", p.eps_stop, positive);
  optional_into(j, path, "t_max", p.t_max, positive);
  optional_into(j, path, "defect_tol", p.defect_tol, number);
  optional_into(j, path, "max_steps", p.max_steps, positive_int);
  optional_into(j, path, "monitors", p.monitors, boolean);
  if (p.dt_growth < 1.0) invalid("flow.dt_growth", "must be at least 1");
  if (p.defect_tol < 0.0) invalid("flow.defect_tol", "must be non-negative");
}

void parse_continuation(const json& j, ContinuationParams& p) {
  const std::string path = "continuation";
  require_object(j, path, {"width_tol", "margin_fraction", "min_step_fraction"});
  optional_into(j, path, "width_tol", p.width_tol, positive);
  optional_into(j, path, "margin_fraction", p.margin_fraction, positive);
  optional_into(j, path, "min_step_fraction", p.min_step_fraction, positive);
}

ordered_json field_json(const FieldSpec& f) {
  ordered_json j;
  switch (f.kind) {
    case FieldSpec::Kind::Constant:
      j["kind"] = "constant";
      j["value"] = f.value;
      break;
    case FieldSpec::Kind::Harmonic: {
      j["kind"] = "harmonic";
      j["offset"] = f.offset;
      ordered_json terms = ordered_json::array();
      for (const auto& t : f.terms) {
        terms.push_back({{"amplitude", t.amplitude}, {"wave", t.wave}, {"phase", t.phase}});
      }
      j["terms"] = std::move(terms);
      break;
    }
    case FieldSpec::Kind::Random:
      j["kind"] = "random";
      j["offset"] = f.offset;
      j["amplitude"] = f.amplitude;
      j["max_wave"] = f.max_wave;
      break;
    case FieldSpec::Kind::File:
      j["kind"] = "file";
      j["path"] = f.path.filename().string();
      break;
  }
  if (f.shift_max) j["shift_max"] = *f.shift_max;
  return j;
}

}  // namespace

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  require_object(doc, "",
                 {"mode", "grid", "n", "s0", "theta", "g", "g0", "lambda", "lambdas", "initial",
                  "output_dir", "seed", "save_fields", "newton", "flow", "continuation"});
  RunConfig c;
  c.mode = parse_mode(need(doc, "", "mode"));

  const json& grid = need(doc, "", "grid");
  if (!grid.is_array() || grid.empty() || grid.size() > Grid::kMaxDims) {
    invalid("grid", "expected 1 to 4 sizes");
  }
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const long s = integer(grid[a], element("grid", a));
    if (s < 4 || s % 2 != 0) invalid(element("grid", a), "sizes must be even and at least 4");
    c.grid.push_back(static_cast<int>(s));
  }
  const int dims = static_cast<int>(c.grid.size());

  c.n = static_cast<int>(integer(need(doc, "", "n"), "n"));
  if (c.n < 2) invalid("n", "complex dimension must be at least 2");
  c.s0 = parse_field(need(doc, "", "s0"), "s0", dims, base_dir);

  if (const json* t = find(doc, "theta")) {
    require_object(*t, "theta", {"stream", "components"});
    ThetaSpec theta;
    if (const json* s = find(*t, "stream")) {
      if (dims != 2) invalid("theta.stream", "stream functions need a 2-D grid");
      theta.stream = parse_field(*s, "theta.stream", dims, base_dir);
    }
    if (const json* comps = find(*t, "components")) {
      if (theta.stream) invalid("theta", "give either stream or components, not both");
      if (!comps->is_array() || static_cast<int>(comps->size()) != dims) {
        invalid("theta.components", "expected " + std::to_string(dims) + " fields");
      }
      for (std::size_t a = 0; a < comps->size(); ++a) {
        theta.components.push_back(parse_field((*comps)[a], element("theta.components", a), dims, base_dir));
      }
    }
    if (!theta.stream && theta.components.empty()) invalid("theta", "expected stream or components");
    c.theta = std::move(theta);
  }

  if (const json* g = find(doc, "g")) c.g = parse_field(*g, "g", dims, base_dir);
  if (const json* g0 = find(doc, "g0")) c.g0 = parse_field(*g0, "g0", dims, base_dir);
  optional_into(doc, "", "lambda", c.lambda, number);
  if (const json* ls = find(doc, "lambdas")) {
    if (!ls->is_array() || ls->empty()) invalid("lambdas", "expected a non-empty array");
    for (std::size_t i = 0; i < ls->size(); ++i) c.lambdas.push_back(number((*ls)[i], element("lambdas", i)));
  }
  if (const json* u = find(doc, "initial")) c.initial = parse_field(*u, "initial", dims, base_dir);

  c.output_dir = text(need(doc, "", "output_dir"), "output_dir");
  if (c.output_dir.is_relative()) c.output_dir = base_dir / c.output_dir;
  if (const json* s = find(doc, "seed")) {
    if (!s->is_number_unsigned()) invalid("seed", "expected a non-negative integer");
    c.seed = s->get<std::uint64_t>();
  }
  optional_into(doc, "", "save_fields", c.save_fields, boolean);
  if (const json* p = find(doc, "newton")) parse_newton(*p, c.newton);
  if (const json* p = find(doc, "flow")) parse_flow(*p, c.flow);
  if (const json* p = find(doc, "continuation")) parse_continuation(*p, c.continuation);

  // Mode-specific requirements.
  const bool has_g0 = c.g0.has_value();
  if (c.g && has_g0) invalid("g", "give either g or g0 with lambda, not both");
  switch (c.mode) {
    case Mode::Flow:
    case Mode::Diagnose:
      if (!c.g && !has_g0) invalid("g", "required for mode '" + std::string(to_string(c.mode)) + "'");
      if (has_g0 && !c.lambda) invalid("lambda", "required with g0");
      if (c.mode == Mode::Diagnose && !c.initial) invalid("initial", "required for mode 'diagnose'");
      break;
    case Mode::Newton:
      if (!c.g && !has_g0) invalid("g", "required for mode 'newton'");
      if (has_g0 && !c.lambda) invalid("lambda", "required with g0");
      break;
    case Mode::Sweep:
      if (!has_g0) invalid("g0", "required for mode 'sweep'");
      if (c.lambdas.empty()) invalid("lambdas", "required for mode 'sweep'");
      break;
    case Mode::Bisect:
    case Mode::Probe:
      if (!has_g0) invalid("g0", "required for mode '" + std::string(to_string(c.mode)) + "'");
      break;
  }
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["mode"] = to_string(c.mode);
  j["grid"] = c.grid;
  j["n"] = c.n;
  j["s0"] = field_json(c.s0);
  if (c.theta) {
    ordered_json t;
    if (c.theta->stream) t["stream"] = field_json(*c.theta->stream);
    if (!c.theta->components.empty()) {
      ordered_json comps = ordered_json::array();
      for (const auto& f : c.theta->components) comps.push_back(field_json(f));
      t["components"] = std::move(comps);
    }
    j["theta"] = std::move(t);
  }
  if (c.g) j["g"] = field_json(*c.g);
  if (c.g0) j["g0"] = field_json(*c.g0);
  if (c.lambda) j["lambda"] = *c.lambda;
  if (!c.lambdas.empty()) j["lambdas"] = c.lambdas;
  if (c.initial) j["initial"] = field_json(*c.initial);
  j["seed"] = c.seed;
  j["save_fields"] = c.save_fields;
  j["newton"] = {{"tol_residual", c.newton.tol_residual},
                 {"max_iter", c.newton.max_iter},
                 {"damping", c.newton.damping},
                 {"max_halvings", c.newton.max_halvings},
                 {"linear_tol", c.newton.linear_tol}};
  j["flow"] = {{"dt_init", c.flow.dt_init},       {"dt_max", c.flow.dt_max},
               {"dt_growth", c.flow.dt_growth},   {"eps_stop", c.flow.eps_stop},
               {"t_max", c.flow.t_max},           {"defect_tol", c.flow.defect_tol},
               {"max_steps", c.flow.max_steps},   {"monitors", c.flow.monitors}};
  j["continuation"] = {{"width_tol", c.continuation.width_tol},
                       {"margin_fraction", c.continuation.margin_fraction},
                       {"min_step_fraction", c.continuation.min_step_fraction}};
  return j;
}

std::uint64_t field_seed(std::uint64_t seed, std::uint64_t slot) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (slot + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

ScalarField sample(const FieldSpec& spec, const Grid& grid, std::uint64_t seed) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto harmonic = [&](const std::vector<HarmonicTerm>& terms, double offset) {
    return ScalarField::from_function(grid, [&](std::span<const double> x) {
      double v = offset;
      for (const auto& t : terms) {
        double arg = t.phase;
        for (std::size_t a = 0; a < x.size(); ++a) arg += two_pi * t.wave[a] * x[a];
        v += t.amplitude * std::cos(arg);
      }
      return v;
    });
  };

  ScalarField out(grid);
  switch (spec.kind) {
    case FieldSpec::Kind::Constant:
      out = ScalarField(grid, spec.value);
      break;
    case FieldSpec::Kind::Harmonic:
      out = harmonic(spec.terms, spec.offset);
      break;
    case FieldSpec::Kind::Random: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> amp(-spec.amplitude, spec.amplitude);
      std::uniform_real_distribution<double> phase(0.0, two_pi);
      std::vector<HarmonicTerm> terms;
      std::vector<int> k(static_cast<std::size_t>(grid.dims()), -spec.max_wave);
      // Enumerate the cube of wave vectors; each cosine gets its own draw.
      for (;;) {
        bool zero = true;
        for (int v : k) zero = zero && v == 0;
        if (!zero) {
          const double a = amp(rng);
          terms.push_back({a, k, phase(rng)});
        }
        std::size_t axis = 0;
        while (axis < k.size() && ++k[axis] > spec.max_wave) k[axis++] = -spec.max_wave;
        if (axis == k.size()) break;
      }
      out = harmonic(terms, spec.offset);
      break;
    }
    case FieldSpec::Kind::File:
      out = read_field(spec.path);
      require_same_grid(out.grid(), grid);
      break;
  }
  if (spec.shift_max) out += *spec.shift_max - out.max();
  return out;
}

Background make_background(const RunConfig& c) {
  const Grid grid = Grid::make(c.grid);
  ScalarField s0 = sample(c.s0, grid, field_seed(c.seed, 0));
  if (!c.theta) return Background::balanced(c.n, std::move(s0));
  VectorField theta(grid);
  if (c.theta->stream) {
    theta = rotated_gradient(sample(*c.theta->stream, grid, field_seed(c.seed, 1)));
  } else {
    for (int a = 0; a < grid.dims(); ++a) {
      theta[a] = sample(c.theta->components[static_cast<std::size_t>(a)], grid,
                        field_seed(c.seed, 2 + static_cast<std::uint64_t>(a)));
    }
  }
  return Background::make(c.n, std::move(s0), std::move(theta));
}

}  // namespace cyf::cli

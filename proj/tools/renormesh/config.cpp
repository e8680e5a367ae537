#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "renormesh/errors.hpp"

namespace renormesh::cli {

namespace {

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

// Best effort: the first line mentioning "key".
std::string key_line(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return "";
  std::size_t line = 1;
  for (std::size_t i = 0; i < pos; ++i) line += text[i] == '\n';
  return " (line " + std::to_string(line) + ")";
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(source_ + ": " + key + key_line(text_, key) + ": " + msg);
  }

  void known_keys(const json& obj, const std::set<std::string>& keys, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : obj.items()) {
      if (!keys.count(k)) fail(k, "unknown key in " + where);
    }
  }

  double number(const json& obj, const std::string& key, double fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
  }

  int integer(const json& obj, const std::string& key, int fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }

  bool boolean(const json& obj, const std::string& key, bool fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& obj, const std::string& key, const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const json& obj, const std::string& key) const {
    const json& v = obj.at(key);
    if (!v.is_array() || v.empty()) fail(key, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "expected a non-empty array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

 private:
  const std::string& text_;
  std::string source_;
};

ModelKind parse_model(const Reader& r, const json& doc) {
  if (!doc.contains("model")) return ModelKind::tmodel();
  const json& m = doc.at("model");
  if (m.is_string()) {
    const std::string s = m.get<std::string>();
    if (s == "tmodel" || s == "t-model") return ModelKind::tmodel();
    if (s == "galerkin") return ModelKind::galerkin();
    r.fail("model", "expected \"tmodel\", \"galerkin\" or {\"a1\": .., \"a2\": ..}");
  }
  if (m.is_object() && m.contains("a1") && m.contains("a2") && m.size() == 2) {
    return ModelKind::identified({r.number(m, "a1", 0.0), r.number(m, "a2", 0.0)});
  }
  r.fail("model", "expected \"tmodel\", \"galerkin\" or {\"a1\": .., \"a2\": ..}");
}

IntegratorSettings parse_integrator(Reader& r, const json& doc) {
  IntegratorSettings s;
  if (!doc.contains("integrator")) return s;
  const json& j = doc.at("integrator");
  r.known_keys(j, {"method", "rtol", "atol", "dt_initial", "dt_fixed", "dt_max", "dt_min"},
               "integrator");
  const std::string method = r.string(j, "method", "dp45");
  if (method == "dp45") {
    s.method = StepMethod::adaptive_dp45;
  } else if (method == "rk4") {
    s.method = StepMethod::fixed_rk4;
  } else {
    r.fail("method", "expected \"dp45\" or \"rk4\"");
  }
  s.rtol = r.number(j, "rtol", s.rtol);
  s.atol = r.number(j, "atol", s.atol);
  s.dt_initial = r.number(j, "dt_initial", s.dt_initial);
  s.dt_fixed = r.number(j, "dt_fixed", s.dt_fixed);
  s.dt_max = r.number(j, "dt_max", s.dt_max);
  s.dt_min = r.number(j, "dt_min", s.dt_min);
  if (!(s.rtol > 0.0 && s.atol > 0.0 && s.dt_initial > 0.0 && s.dt_fixed > 0.0 &&
        s.dt_max > 0.0 && s.dt_min > 0.0)) {
    r.fail("integrator", "tolerances and step sizes must be > 0");
  }
  return s;
}

Sweep parse_sweep(Reader& r, const json& doc) {
  Sweep s;
  if (!doc.contains("sweep")) return s;
  const json& j = doc.at("sweep");
  r.known_keys(j, {"n", "tol", "nu"}, "sweep");
  if (j.size() != 1) r.fail("sweep", "give exactly one of n, tol, nu");
  const std::string key = j.begin().key();
  s.parameter = key == "n" ? Sweep::Parameter::n
                : key == "tol" ? Sweep::Parameter::tol
                               : Sweep::Parameter::nu;
  s.values = r.numbers(j, key);
  return s;
}

}  // namespace

json parse_document(const std::string& text, const std::string& source) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ConfigError(source + ": config is empty");
  }
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) throw ConfigError(source + ": top level must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    const std::size_t cut = msg.find("parse error");
    if (cut != std::string::npos) msg = msg.substr(cut);
    throw ConfigError(source + ":" + location(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + msg);
  }
}

RunConfig build_config(const json& doc, const std::string& text, const std::string& source) {
  Reader r(text, source);
  r.known_keys(doc,
               {"name", "description", "nu", "n_start", "n_final", "tol", "model", "case",
                "reduced_fraction", "padding_factor", "t_end", "record_stride",
                "restart_clock_at_switch", "max_switch_delay", "integrator", "sweep",
                "target_digits", "oracle", "check"},
               "config");
  RunConfig cfg;
  cfg.document = doc;
  cfg.name = r.string(doc, "name", cfg.name);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    r.fail("name", "must be a non-empty file stem");
  }
  ExperimentConfig& e = cfg.experiment;
  e.name = cfg.name;
  e.nu = r.number(doc, "nu", e.nu);
  e.n_start = r.integer(doc, "n_start", e.n_start);
  e.n_final = r.integer(doc, "n_final", e.n_start);
  e.tol = r.number(doc, "tol", e.tol);
  e.model = parse_model(r, doc);
  const std::string c = r.string(doc, "case", "I");
  if (c == "I") {
    e.algorithm_case = AlgorithmCase::I;
  } else if (c == "II") {
    e.algorithm_case = AlgorithmCase::II;
  } else {
    r.fail("case", "expected \"I\" or \"II\"");
  }
  e.reduced_fraction = r.number(doc, "reduced_fraction", e.reduced_fraction);
  e.padding_factor = r.integer(doc, "padding_factor", e.padding_factor);
  e.t_end = r.number(doc, "t_end", e.t_end);
  e.record_stride = r.integer(doc, "record_stride", e.record_stride);
  e.restart_clock_at_switch = r.boolean(doc, "restart_clock_at_switch", false);
  e.max_switch_delay = r.integer(doc, "max_switch_delay", e.max_switch_delay);
  e.integrator = parse_integrator(r, doc);
  cfg.sweep = parse_sweep(r, doc);
  cfg.target_digits = r.integer(doc, "target_digits", cfg.target_digits);
  if (doc.contains("oracle")) {
    const json& o = doc.at("oracle");
    r.known_keys(o, {"times", "samples"}, "oracle");
    if (o.contains("times")) cfg.oracle_times = r.numbers(o, "times");
    cfg.oracle_samples = r.integer(o, "samples", cfg.oracle_samples);
    if (cfg.oracle_samples < 1) r.fail("samples", "must be >= 1");
    for (double t : cfg.oracle_times) {
      if (!(t >= 0.0)) r.fail("times", "times must be >= 0");
    }
  }
  if (doc.contains("check")) {
    cfg.check = doc.at("check");
    r.known_keys(cfg.check,
                 {"turning_point", "oracle_energy_rel", "energy_drift", "min_digits",
                  "eig1_dev", "a1_dev", "exhausted", "max_tol", "sweep_field_diff"},
                 "check");
  }
  try {
    if (cfg.sweep.parameter == Sweep::Parameter::none) {
      e.validate();
    } else {
      for (double v : cfg.sweep.values) sweep_member(cfg, v).validate();
    }
  } catch (const ConfigError& err) {
    throw ConfigError(source + ": " + err.what());
  }
  return cfg;
}

std::vector<std::filesystem::path> preset_dirs() {
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("RENORMESH_PRESET_DIR"); env && *env) dirs.emplace_back(env);
#ifdef RENORMESH_SOURCE_PRESET_DIR
  dirs.emplace_back(RENORMESH_SOURCE_PRESET_DIR);
#endif
#ifdef RENORMESH_INSTALL_PRESET_DIR
  dirs.emplace_back(RENORMESH_INSTALL_PRESET_DIR);
#endif
  return dirs;
}

std::filesystem::path find_preset(const std::string& name) {
  for (const auto& dir : preset_dirs()) {
    const auto p = dir / (name + ".json");
    if (std::filesystem::is_regular_file(p)) return p;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  std::set<std::string> names;
  for (const auto& dir : preset_dirs()) {
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
      if (entry.path().extension() == ".json") names.insert(entry.path().stem().string());
    }
  }
  return {names.begin(), names.end()};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig sweep_member(const RunConfig& cfg, double value) {
  ExperimentConfig e = cfg.experiment;
  switch (cfg.sweep.parameter) {
    case Sweep::Parameter::none:
      break;
    case Sweep::Parameter::n: {
      const int n = static_cast<int>(std::lround(value));
      if (n != value) throw ConfigError("sweep: n must be an integer");
      e.n_start = n;
      e.n_final = n;
      break;
    }
    case Sweep::Parameter::tol:
      e.tol = value;
      break;
    case Sweep::Parameter::nu:
      e.nu = value;
      break;
  }
  e.name = sweep_label(cfg, value);
  return e;
}

std::string sweep_label(const RunConfig& cfg, double value) {
  char buf[64];
  switch (cfg.sweep.parameter) {
    case Sweep::Parameter::none:
      return cfg.name;
    case Sweep::Parameter::n:
      std::snprintf(buf, sizeof buf, "_N%ld", std::lround(value));
      break;
    case Sweep::Parameter::tol:
      std::snprintf(buf, sizeof buf, "_tol%.0e", value);
      break;
    case Sweep::Parameter::nu:
      std::snprintf(buf, sizeof buf, value == 0.0 ? "_nu0" : "_nu%.0e", value);
      break;
  }
  return cfg.name + buf;
}

json to_json(const ExperimentConfig& c) {
  const IntegratorSettings& s = c.integrator;
  json model = c.model.kind() == ModelKind::Kind::identified
                   ? json{{"a1", c.model.coefficients().a1}, {"a2", c.model.coefficients().a2}}
                   : json(c.model.name());
  return {
      {"name", c.name},
      {"nu", c.nu},
      {"n_start", c.n_start},
      {"n_final", c.n_final},
      {"tol", c.tol},
      {"model", model},
      {"case", c.algorithm_case == AlgorithmCase::I ? "I" : "II"},
      {"reduced_fraction", c.reduced_fraction},
      {"padding_factor", c.padding_factor},
      {"t_end", c.t_end},
      {"record_stride", c.record_stride},
      {"restart_clock_at_switch", c.restart_clock_at_switch},
      {"max_switch_delay", c.max_switch_delay},
      {"integrator",
       {{"method", s.method == StepMethod::fixed_rk4 ? "rk4" : "dp45"},
        {"rtol", s.rtol},
        {"atol", s.atol},
        {"dt_initial", s.dt_initial},
        {"dt_fixed", s.dt_fixed},
        {"dt_max", s.dt_max},
        {"dt_min", s.dt_min}}},
  };
}

}  // namespace renormesh::cli

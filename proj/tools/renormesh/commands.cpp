#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "config.hpp"
#include "output.hpp"
#include "renormesh/errors.hpp"
#include "renormesh/oracle.hpp"

namespace renormesh::cli {

namespace {

struct Options {
  std::string command;
  std::string config_path;
  std::string preset;
  std::string out_dir = "out";
  bool check = false;
  double fixed_step = 0.0;
  int parallel = 1;
  int target_digits = -1;
  std::vector<double> times;
};

struct MemberResult {
  std::string label;
  ExperimentConfig config;
  std::filesystem::path csv;
  int status = kExitOk;
  std::string error;
  std::optional<RunResult> result;
  json summary;
};

std::filesystem::path output_dir(const Options& opt) {
  if (const char* env = std::getenv("RENORMESH_OUT"); env && *env) return env;
  return opt.out_dir;
}

RunConfig load(const Options& opt) {
  json doc = json::object();
  std::string text;
  std::string source = "config";
  if (!opt.preset.empty()) {
    const auto path = find_preset(opt.preset);
    text = read_file(path);
    source = path.string();
    doc = parse_document(text, source);
  }
  if (!opt.config_path.empty()) {
    const std::string own = read_file(opt.config_path);
    json patch = parse_document(own, opt.config_path);
    doc.merge_patch(patch);
    text = own;
    source = opt.config_path;
  }
  if (opt.preset.empty() && opt.config_path.empty()) {
    if (opt.command != "oracle") throw ConfigError("no config given: use --config PATH or --preset NAME");
    doc = {{"name", "oracle"}};
  }
  if (opt.fixed_step != 0.0) {
    if (!(opt.fixed_step > 0.0)) throw ConfigError("--fixed-step must be > 0");
    doc["integrator"]["method"] = "rk4";
    doc["integrator"]["dt_fixed"] = opt.fixed_step;
  }
  return build_config(doc, text, source);
}

RunResult dispatch(const std::string& command, const ExperimentConfig& c) {
  if (command == "detect") return run_detect(c);
  if (command == "refine") return run_refine(c);
  return run_follow(c);
}

std::vector<MemberResult> run_members(const std::string& command, const RunConfig& cfg,
                                      const std::filesystem::path& dir, int parallel,
                                      std::ostream& err) {
  std::vector<MemberResult> members;
  if (cfg.sweep.parameter == Sweep::Parameter::none) {
    members.push_back({cfg.name, cfg.experiment, dir / (cfg.name + ".csv"), kExitOk, {}, {}, {}});
  } else {
    for (double v : cfg.sweep.values) {
      const std::string label = sweep_label(cfg, v);
      members.push_back({label, sweep_member(cfg, v), dir / (label + ".csv"), kExitOk, {}, {}, {}});
    }
  }

  std::mutex log;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < members.size(); i = next++) {
      MemberResult& m = members[i];
      try {
        m.result = dispatch(command, m.config);
        write_trace(m.csv, m.result->trace);
        m.summary = summarize(*m.result, m.config);
      } catch (const ConfigError& e) {
        m.status = kExitConfig;
        m.error = e.what();
      } catch (const NumericalError& e) {
        m.status = kExitNumerical;
        m.error = e.what();
      }
      std::lock_guard lock(log);
      err << m.label << ": " << (m.status == kExitOk ? "done" : m.error);
      if (m.result) {
        err << " (t = " << m.result->t_final << ", " << m.result->steps << " steps, "
            << m.result->wall_seconds << " s)";
      }
      err << '\n';
    }
  };
  const int k = std::clamp(parallel, 1, static_cast<int>(members.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < k; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return members;
}

// Largest pointwise difference between the terminal full fields of the first
// and last sweep members, on the grid of the finer one.
double field_diff(const std::vector<MemberResult>& members) {
  const SpectralField& a = members.front().result->terminal_full_field;
  const SpectralField& b = members.back().result->terminal_full_field;
  const int n = std::max(a.size(), b.size());
  const std::vector<double> xs = uniform_grid(n);
  const auto ua = eval_realspace(a.size() == n ? a : spectral_interpolate(a, n), xs);
  const auto ub = eval_realspace(b.size() == n ? b : spectral_interpolate(b, n), xs);
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) d = std::max(d, std::abs(ua[i] - ub[i]));
  return d;
}

struct CheckLine {
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<CheckLine> evaluate_checks(const json& check, const std::vector<MemberResult>& members,
                                       const json& extra) {
  std::vector<CheckLine> lines;
  auto each = [&](const std::string& name, auto&& pred) {
    for (const auto& m : members) {
      if (m.status != kExitOk) {
        lines.push_back({name, false, m.label + ": " + m.error});
        continue;
      }
      auto [ok, detail] = pred(m.summary);
      lines.push_back({name, ok, m.label + ": " + detail});
    }
  };
  auto num = [](const json& v) { return v.is_number() ? v.get<double>() : std::nan(""); };

  for (const auto& [key, want] : check.items()) {
    if (key == "turning_point") {
      const auto& m = members.back();
      const double t = m.status == kExitOk ? num(m.summary["t_turn"]) : std::nan("");
      const double lo = want.at(0).get<double>(), hi = want.at(1).get<double>();
      lines.push_back({key, t >= lo && t <= hi, m.label + ": t_turn = " + format_real(t)});
    } else if (key == "oracle_energy_rel") {
      each(key, [&](const json& s) {
        const double rel = std::abs(num(s["final_E1"]) - num(s["oracle_E1"])) / num(s["oracle_E1"]);
        return std::pair{rel <= want.get<double>(), "rel = " + format_real(rel)};
      });
    } else if (key == "energy_drift") {
      each(key, [&](const json& s) {
        const double d = std::abs(num(s["final_E1"]) - 0.5);
        return std::pair{d <= want.get<double>(), "|E1 - 1/2| = " + format_real(d)};
      });
    } else if (key == "min_digits") {
      each(key, [&](const json& s) {
        const int d = s["max_digits"].get<int>();
        return std::pair{d >= want.get<int>(), "digits = " + std::to_string(d)};
      });
    } else if (key == "eig1_dev") {
      each(key, [&](const json& s) {
        const double d = num(s["max_eig1_dev"]);
        return std::pair{d <= want.get<double>(), "max |eig1 - 1| = " + format_real(d)};
      });
    } else if (key == "a1_dev") {
      each(key, [&](const json& s) {
        const double d = std::abs(num(s["identified"].is_object() ? s["identified"]["a1"] : json()) - 1.0);
        return std::pair{d <= want.get<double>(), "|a1 - 1| = " + format_real(d)};
      });
    } else if (key == "exhausted") {
      each(key, [&](const json& s) {
        const bool ex = s["stop"] == "exhausted";
        return std::pair{ex == want.get<bool>(), std::string("stop = ") + s["stop"].get<std::string>()};
      });
    } else if (key == "max_tol") {
      const double tol = num(extra.value("tol", json()));
      lines.push_back({key, tol <= want.get<double>(), "TOL = " + format_real(tol)});
    } else if (key == "sweep_field_diff") {
      const double d = num(extra.value("sweep_field_diff", json()));
      lines.push_back({key, d <= want.get<double>(), "max |u_a - u_b| = " + format_real(d)});
    }
  }
  return lines;
}

int finish(const Options& opt, const RunConfig& cfg, const std::filesystem::path& dir, json manifest,
           const std::vector<MemberResult>& members, int status, double wall,
           std::ostream& err) {
  if (opt.check && status == kExitOk) {
    json checks = json::array();
    for (const auto& c : evaluate_checks(cfg.check, members, manifest["summary"])) {
      err << "[" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << " " << c.detail << '\n';
      checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
      if (!c.pass) status = kExitCheck;
    }
    manifest["checks"] = checks;
  }
  manifest["wall_seconds"] = wall;
  manifest["exit_status"] = status;
  const auto path = dir / (cfg.name + ".manifest.json");
  write_json(path, manifest);
  err << "manifest: " << path.string() << '\n';
  return status;
}

int run_command(const Options& opt, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load(opt);
  const std::filesystem::path dir = output_dir(opt);
  std::filesystem::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  json manifest{{"command", opt.command}, {"name", cfg.name}, {"config", cfg.document}};
  manifest["summary"] = json::object();
  std::vector<MemberResult> members;
  int status = kExitOk;

  if (opt.command == "calibrate") {
    const int target = opt.target_digits >= 0 ? opt.target_digits : cfg.target_digits;
    manifest["target_digits"] = target;
    manifest["outputs"] = json::array();
    try {
      const CalibrationResult r = calibrate_tol(cfg.experiment, target);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", r.tol);
      out << buf << '\n';
      manifest["summary"] = {{"tol", r.tol}, {"digits", r.digits}, {"iterations", r.iterations}};
    } catch (const CalibrationError& e) {
      err << e.what() << '\n';
      manifest["summary"] = {{"best_digits", e.best_digits}, {"error", e.what()}};
      status = kExitNumerical;
    }
    return finish(opt, cfg, dir, manifest, members, status, elapsed(), err);
  }

  if (opt.command == "oracle") {
    const std::vector<double>& times = opt.times.empty() ? cfg.oracle_times : opt.times;
    const auto path = dir / (cfg.name + ".oracle.csv");
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw ConfigError("cannot write " + path.string());
    csv << "t,E1";
    for (int j = 0; j < cfg.oracle_samples; ++j) csv << ",u" << j;
    csv << '\n';
    const std::vector<double> xs = uniform_grid(cfg.oracle_samples);
    json energies = json::array();
    for (double t : times) {
      if (!(t >= 0.0)) throw ConfigError("oracle times must be >= 0");
      const CharacteristicSolution sol(t);
      const double e1 = sol.energy();
      csv << format_real(t) << ',' << format_real(e1);
      for (double u : sol.eval(xs)) csv << ',' << format_real(u);
      csv << '\n';
      out << format_real(t) << ',' << format_real(e1) << '\n';
      energies.push_back({{"t", t}, {"E1", e1}});
    }
    manifest["outputs"] = {path.string()};
    manifest["summary"] = {{"energies", energies}};
    return finish(opt, cfg, dir, manifest, members, status, elapsed(), err);
  }

  members = run_members(opt.command, cfg, dir, opt.parallel, err);
  json runs = json::array();
  json outputs = json::array();
  for (const auto& m : members) {
    json run{{"label", m.label}, {"config", to_json(m.config)}, {"status", m.status}};
    if (m.status == kExitOk) {
      run["csv"] = m.csv.string();
      run["summary"] = m.summary;
      outputs.push_back(m.csv.string());
    } else {
      run["error"] = m.error;
    }
    runs.push_back(run);
    status = std::max(status, m.status);
  }
  manifest["runs"] = runs;
  manifest["outputs"] = outputs;
  if (members.size() > 1 && status == kExitOk) {
    manifest["summary"]["sweep_field_diff"] = field_diff(members);
  }
  if (members.size() == 1 && status == kExitOk) manifest["summary"] = members.front().summary;
  if (status == kExitConfig) {
    for (const auto& m : members) {
      if (!m.error.empty()) err << "error: " << m.error << '\n';
    }
    return status;
  }
  return finish(opt, cfg, dir, manifest, members, status, elapsed(), err);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Renormalization-tracked mesh refinement for the Burgers equation"};
  app.require_subcommand(1);
  app.add_option("--config", opt.config_path, "JSON run configuration");
  app.add_option("--preset", opt.preset, "named preset; --config entries override it");
  app.add_option("--out", opt.out_dir, "output directory (RENORMESH_OUT takes precedence)");
  app.add_flag("--check", opt.check, "evaluate the config's check block; exit 4 on failure");
  app.add_option("--fixed-step", opt.fixed_step, "use classical RK4 with this step");
  app.add_option("--parallel", opt.parallel, "concurrent sweep members")->check(CLI::PositiveNumber);

  app.add_subcommand("detect", "record eigenvalues at fixed resolution")->fallthrough();
  app.add_subcommand("refine", "refine on the |detB| trigger until N_final")->fallthrough();
  app.add_subcommand("follow", "refine, then continue with the reduced model")->fallthrough();
  auto* calibrate = app.add_subcommand("calibrate", "reduce TOL until S1 and S2 agree")->fallthrough();
  calibrate->add_option("digits", opt.target_digits, "target digits (default from config)")
      ->check(CLI::Range(0, 16));
  auto* oracle = app.add_subcommand("oracle", "exact entropy solution at the given times")->fallthrough();
  oracle->add_option("times", opt.times, "times (default from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    return run_command(opt, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace renormesh::cli

#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "renormesh/errors.hpp"
#include "renormesh/oracle.hpp"

namespace renormesh::cli {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

void write_trace(std::ostream& out, std::span<const TraceRecord> trace) {
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace) {
    out << format_real(r.t) << ',' << r.n_current << ',' << format_real(r.eig1.real()) << ','
        << format_real(r.eig1.imag()) << ',' << format_real(r.eig2.real()) << ','
        << format_real(r.eig2.imag()) << ',' << format_real(r.detB) << ',' << r.digits1 << ','
        << r.digits2 << ',' << format_real(r.E1_full) << ',' << format_real(r.E2_full) << ','
        << format_real(r.E1_reduced) << ',' << format_real(r.E2_reduced) << ','
        << (r.refinement_event ? 1 : 0) << ',' << (r.switchover_event ? 1 : 0) << '\n';
  }
}

void write_trace(const std::filesystem::path& path, std::span<const TraceRecord> trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_trace(out, trace);
  if (!out) throw ConfigError("write failed: " + path.string());
}

nlohmann::json summarize(const RunResult& r, const ExperimentConfig& c) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json s;
  s["stop"] = r.stop == StopReason::reached_end ? "reached_end"
              : r.stop == StopReason::exhausted ? "exhausted"
                                                : "underflow";
  s["t_final"] = r.t_final;
  s["steps"] = r.steps;
  s["rows"] = r.trace.size();
  s["refinement_times"] = r.refinement_times;
  s["exhaustion_time"] = opt(r.exhaustion_time);
  s["switchover_time"] = opt(r.switchover_time);
  s["identified"] = r.identified ? json{{"a1", r.identified->a1}, {"a2", r.identified->a2}}
                                 : json(nullptr);
  const auto tp = detect_turning_point(r.trace);
  s["t_turn"] = tp ? json(tp->t_turn) : json(nullptr);

  const Quantities q = quantities(r.final_field, r.final_field.range());
  s["final_N"] = r.final_field.size();
  s["final_E1"] = q.e1;
  s["final_E2"] = q.e2;
  if (c.nu == 0.0) s["oracle_E1"] = oracle_energy(r.t_final);

  int max_digits = 0;
  double eig1_dev = 0.0;
  for (const TraceRecord& row : r.trace) {
    if (row.b_singular || row.reduced_only) continue;
    const int digits = std::max(row.digits1, row.digits2);
    max_digits = std::max(max_digits, digits);
    // eig1 deviation over rows agreeing to 10 or more digits.
    if (digits >= 10) eig1_dev = std::max(eig1_dev, std::abs(row.eig1 - 1.0));
  }
  s["max_digits"] = max_digits;
  s["max_eig1_dev"] = eig1_dev;
  s["wall_seconds"] = r.wall_seconds;
  return s;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << doc.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace renormesh::cli

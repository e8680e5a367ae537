#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "renormesh/tracker.hpp"

namespace renormesh::cli {

using nlohmann::json;

/// One varied parameter of a sweep. Each value produces its own run and CSV.
struct Sweep {
  enum class Parameter { none, n, tol, nu };
  Parameter parameter = Parameter::none;
  std::vector<double> values;
};

struct RunConfig {
  std::string name = "run";
  ExperimentConfig experiment;
  Sweep sweep;
  int target_digits = 5;
  std::vector<double> oracle_times{0.0};
  int oracle_samples = 64;
  /// Expectations evaluated under --check.
  json check = json::object();
  /// The merged document the run was built from.
  json document = json::object();
};

/// Parses a JSON document. Throws ConfigError with a line:column location for
/// syntax errors and the line of the offending key for schema errors.
json parse_document(const std::string& text, const std::string& source);

/// Builds a run from a parsed document. `text` is used only to locate keys in
/// diagnostics and may be empty.
RunConfig build_config(const json& doc, const std::string& text = {},
                       const std::string& source = "config");

/// Directories searched for --preset, in order: $RENORMESH_PRESET_DIR, the
/// source tree and the install prefix.
std::vector<std::filesystem::path> preset_dirs();
std::filesystem::path find_preset(const std::string& name);
std::vector<std::string> preset_names();

std::string read_file(const std::filesystem::path& path);

/// Experiment config for one sweep member.
ExperimentConfig sweep_member(const RunConfig& cfg, double value);
std::string sweep_label(const RunConfig& cfg, double value);

json to_json(const ExperimentConfig& c);

}  // namespace renormesh::cli

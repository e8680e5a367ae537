#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "renormesh/tracker.hpp"

namespace renormesh::cli {

inline constexpr const char* kTraceHeader =
    "t,N,eig1_re,eig1_im,eig2_re,eig2_im,detB,digits1,digits2,E1_full,E2_full,E1_red,E2_red,"
    "refine,switch";

/// 17 significant digits in scientific notation.
std::string format_real(double x);

void write_trace(std::ostream& out, std::span<const TraceRecord> trace);
void write_trace(const std::filesystem::path& path, std::span<const TraceRecord> trace);

/// Per-run summary scalars for the manifest.
nlohmann::json summarize(const RunResult& r, const ExperimentConfig& c);

/// Writes to a temporary file, then renames it into place.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace renormesh::cli

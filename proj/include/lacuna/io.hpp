#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "lacuna/circleset.hpp"
#include "lacuna/construct.hpp"
#include "lacuna/plan.hpp"
#include "lacuna/trigpoly.hpp"
#include "lacuna/verify.hpp"

namespace lacuna {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

// Compact single-line JSON; floats use 17 significant digits.
std::string dump_json(const json& value);
// Indented variant used for the standalone documents.
std::string dump_json_pretty(const json& value);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

json plan_to_json(const FrequencyPlan& plan);
FrequencyPlan plan_from_json(const json& j);

json profile_to_json(const ConstantProfile& profile);
ConstantProfile profile_from_json(const json& j);

json options_to_json(const ConstructOptions& options);
ConstructOptions options_from_json(const json& j);

json arcset_to_json(const ArcSet& set);
ArcSet arcset_from_json(const json& j);

json record_to_json(const StepRecord& record);
StepRecord record_from_json(const json& j);

json report_to_json(const VerificationReport& report);
VerificationReport report_from_json(const json& j);

// "LACF" | u16 version = 1 | i64 min_freq | u64 count | count x (f64 re, f64 im),
// all little-endian.
std::string encode_lacf(const TrigPoly& p);
TrigPoly decode_lacf(const std::string& bytes);
void write_lacf(const std::filesystem::path& path, const TrigPoly& p);
TrigPoly read_lacf(const std::filesystem::path& path);

std::string delta_filename(std::size_t n);
std::string sum_filename(std::size_t n);

struct RunManifestInfo {
  std::string plan_source;  // e.g. "preset dyadic" or a path
  double wall_clock_seconds = 0.0;
  std::size_t threads = 1;
  json config = json::object();  // effective settings, echoed verbatim
};

// plan.json, profile.json, delta_NNN.lacf, sum_NNN.lacf (final partial sum),
// records.jsonl, manifest.json.
void save_run(const std::filesystem::path& dir, const RunState& state, const RunManifestInfo& info);

// Rebuilds deltas, envelopes and partial sums from the coefficient files and
// reads the step records as stored.
RunState load_run(const std::filesystem::path& dir);

}  // namespace lacuna

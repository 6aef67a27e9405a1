// Serialization of reports and shot records.
#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "iontrap/analysis.hpp"
#include "iontrap/readout.hpp"

namespace iontrap {

/// Report as an ordered JSON object: schema_version, config_digest, seed,
/// experiment, estimates, errors, counts, runtime_ms (null when not timed).
nlohmann::ordered_json report_to_json(const ExperimentReport& report);

/// Inverse of report_to_json. Throws std::runtime_error on a schema mismatch.
ExperimentReport report_from_json(const nlohmann::ordered_json& doc);

inline constexpr const char* kShotCsvHeader =
    "shot_index,setting_index,stream_id,phi1_rad,phi2_rad,true_outcome,photon_count,"
    "classified_bright";

/// One row per shot, LF line endings. Phase fields are empty when the setting
/// has no analysis pulse; photon_count is empty for the flip readout.
void write_shots_csv(std::ostream& out, std::span<const ShotRecord> shots);

/// Writes `<experiment>_report.json` and, when shots are present,
/// `<experiment>_shots.csv` into `dir` (created if missing).
void write_outputs(const std::filesystem::path& dir, const ExperimentReport& report,
                   std::span<const ShotRecord> shots);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace iontrap

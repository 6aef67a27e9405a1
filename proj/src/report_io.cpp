#include "iontrap/report_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "iontrap/config.hpp"

namespace iontrap {

nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["config_digest"] = report.config_digest;
  doc["seed"] = report.seed;
  doc["experiment"] = report.experiment;
  auto& est = doc["estimates"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.estimates) est[k] = v;
  auto& err = doc["errors"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.errors) err[k] = v;
  auto& counts = doc["counts"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.counts) counts[k] = v;
  doc["runtime_ms"] = report.runtime_ms ? nlohmann::ordered_json(*report.runtime_ms) : nullptr;
  return doc;
}

ExperimentReport report_from_json(const nlohmann::ordered_json& doc) {
  if (doc.value("schema_version", "") != kReportSchemaVersion) {
    throw std::runtime_error("report has an unknown schema_version");
  }
  ExperimentReport report;
  report.config_digest = doc.at("config_digest").get<std::string>();
  report.seed = doc.at("seed").get<std::uint64_t>();
  report.experiment = doc.at("experiment").get<std::string>();
  for (const auto& [k, v] : doc.at("estimates").items()) report.estimates[k] = v.get<double>();
  for (const auto& [k, v] : doc.at("errors").items()) report.errors[k] = v.get<double>();
  for (const auto& [k, v] : doc.at("counts").items()) report.counts[k] = v.get<std::uint64_t>();
  if (!doc.at("runtime_ms").is_null()) report.runtime_ms = doc.at("runtime_ms").get<double>();
  return report;
}

void write_shots_csv(std::ostream& out, std::span<const ShotRecord> shots) {
  out << kShotCsvHeader << '\n';
  for (const auto& s : shots) {
    const std::string phi1 = s.settings.size() > 0 ? fmt::format("{}", s.settings[0]) : "";
    const std::string phi2 = s.settings.size() > 1 ? fmt::format("{}", s.settings[1]) : "";
    const std::string photons = s.photon_count ? fmt::format("{}", *s.photon_count) : "";
    out << fmt::format("{},{},{},{},{},{},{},{}\n", s.shot_index, s.setting_index, s.stream_id,
                       phi1, phi2, s.true_outcome, photons, s.classified_bright);
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

void write_outputs(const std::filesystem::path& dir, const ExperimentReport& report,
                   std::span<const ShotRecord> shots) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / (report.experiment + "_report.json"),
                  report_to_json(report).dump(2) + "\n");
  if (shots.empty()) return;
  std::ostringstream csv;
  write_shots_csv(csv, shots);
  write_text_file(dir / (report.experiment + "_shots.csv"), csv.str());
}

}  // namespace iontrap

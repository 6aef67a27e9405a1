// Experiment configuration: defaults, INI loading, validation and a stable
// digest of the effective settings.
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "iontrap/analysis.hpp"
#include "iontrap/noise.hpp"
#include "iontrap/readout.hpp"

namespace iontrap {

/// Thrown for malformed or inconsistent configuration; the CLI maps it to
/// exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kReportSchemaVersion = "iontrap-report/1";

enum class ExperimentKind { kEntangle, kBell, kDfs };
enum class DfsMode { kEncoded, kTest, kBoth };

/// Half-open grid start, start + step, ... < stop.
struct PhaseGrid {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  std::vector<double> values() const;
};

struct DfsSettings {
  /// Per-pulse preparation angle; two pulses give ion 2 a total rotation of
  /// 2*beta, so pi/4 yields |a| = |b| = 1/sqrt(2).
  double beta = 0.7853981633974483;
  double alpha = 0.0;
  PhaseGrid alpha_prime{0.0, 6.283185307179586, 6.283185307179586 / 16.0};
  /// Noise exposure per grid point. For engineered noise this is the part of
  /// the fixed encode-decode delay during which the noise beam is on; for
  /// ambient noise it is the whole delay.
  std::vector<double> delay_us{0.0, 2.5, 5.0, 7.5, 10.0, 12.5};
  DfsMode mode = DfsMode::kBoth;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kEntangle;
  int n_ions = 2;
  std::uint64_t shots_per_setting = 20000;
  std::uint64_t seed = 1;
  int runs = 5;
  bool analytic = false;
  int workers = 1;

  NoiseConfig noise;
  ReadoutConfig readout;
  /// Parity sweep; empty step means one period of cos(N phi) in 16 points.
  PhaseGrid sweep;
  BellSettings bell;
  DfsSettings dfs;

  PhaseGrid effective_sweep() const;
  /// Readout with the symmetric flip probability taken from the noise block.
  ReadoutConfig effective_readout() const;
  /// Throws ConfigError.
  void validate() const;
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

ExperimentConfig default_config(ExperimentKind kind);

/// Parses an angle: a plain number or a multiple of pi such as "-pi/8",
/// "3pi/8", "0.5*pi". Throws ConfigError.
double parse_angle(const std::string& text);

/// Loads an INI file whose [experiment] section names the experiment; keys
/// not present keep the defaults for that experiment. Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Canonical key=value rendering of every effective setting.
std::string canonical_config_text(const ExperimentConfig& cfg);
/// 16 hex digits of FNV-1a-64 over canonical_config_text.
std::string config_digest(const ExperimentConfig& cfg);

}  // namespace iontrap

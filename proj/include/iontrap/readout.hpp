// State-selective fluorescence readout: projective z-basis sampling followed
// by either a per-ion misclassification model or a Poisson photon-count model
// with threshold discrimination into 0..N bright ions.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iontrap/register.hpp"
#include "iontrap/rng.hpp"

namespace iontrap {

enum class ReadoutModel { kIdealFlip, kPhotonCount };

struct ReadoutConfig {
  ReadoutModel model = ReadoutModel::kIdealFlip;
  /// Symmetric per-ion misclassification probability.
  double flip_eps = 0.0;
  /// Optional direction-specific overrides (bright = |down>).
  std::optional<double> eps_bright_to_dark;
  std::optional<double> eps_dark_to_bright;

  double lambda_bright = 10.0;
  double lambda_dark = 0.1;
  /// Ascending count boundaries; class c is the number of thresholds <= count.
  std::vector<int> thresholds;

  double bright_to_dark() const { return eps_bright_to_dark.value_or(flip_eps); }
  double dark_to_bright() const { return eps_dark_to_bright.value_or(flip_eps); }

  /// Throws std::invalid_argument when parameters are out of range or the
  /// photon model's thresholds are not strictly ascending with length n_ions.
  void validate(int n_ions) const;
};

struct ShotRecord {
  std::uint64_t shot_index = 0;
  std::uint64_t setting_index = 0;
  std::uint64_t stream_id = 0;
  /// Analysis-pulse phases (ion 1, ion 2); empty when no pulse was applied.
  std::vector<double> settings;
  std::size_t true_outcome = 0;
  std::optional<int> photon_count;
  int classified_bright = 0;
};

/// Born-rule draw of a basis index from outcome probabilities.
std::size_t sample_outcome(std::span<const double> probabilities, ShotEngine& rng);
std::size_t sample_outcome(const PureState& psi, ShotEngine& rng);
std::size_t sample_outcome(const DensityMatrix& rho, ShotEngine& rng);

/// Flips each ion's bright/dark reading independently with probability eps.
int classify_ideal_flip(std::size_t outcome, int n_ions, double eps, ShotEngine& rng);
/// Direction-aware variant using the config's two flip probabilities.
int classify_ideal_flip(std::size_t outcome, int n_ions, const ReadoutConfig& cfg,
                        ShotEngine& rng);

/// Mean detected counts for k bright ions out of n.
double photon_mean(int bright, int n_ions, const ReadoutConfig& cfg);
int sample_photon_counts(std::size_t outcome, int n_ions, const ReadoutConfig& cfg,
                         ShotEngine& rng);

int classify_threshold(int count, std::span<const int> thresholds);

/// P(X <= k) for X ~ Poisson(mean); 0 for k < 0.
double poisson_cdf(int k, double mean);

/// P(classified = c | true bright count = k) as a (N+1)x(N+1) row-stochastic
/// table indexed [k][c].
std::vector<std::vector<double>> confusion_matrix(int n_ions, const ReadoutConfig& cfg);

/// Exact distribution of the classified bright count given z-basis outcome
/// probabilities.
std::vector<double> class_distribution(std::span<const double> probabilities, int n_ions,
                                       const ReadoutConfig& cfg);

/// Total misclassification probability of the photon model with the true
/// class drawn uniformly from 0..N.
double misclassification_rate(const ReadoutConfig& cfg, int n_ions);

/// Thresholds minimizing misclassification_rate for the given count means.
/// Each boundary only affects its two neighbouring classes, so the boundaries
/// are optimized independently.
std::vector<int> optimal_thresholds(int n_ions, double lambda_bright, double lambda_dark);

struct ReadoutCalibration {
  ReadoutConfig config;
  double window_scale = 1.0;
  double exact_rate = 0.0;
};

/// Scales the detection window (both count means) and re-optimizes the
/// thresholds until the exact misclassification rate is within `tolerance`
/// of `target`. Throws std::runtime_error if no window reaches it.
ReadoutCalibration calibrate_readout(int n_ions, double lambda_bright, double lambda_dark,
                                     double target = 0.02, double tolerance = 0.002);

/// One complete shot: outcome draw plus classification. Fills true_outcome,
/// photon_count and classified_bright.
ShotRecord read_shot(std::span<const double> probabilities, int n_ions,
                     const ReadoutConfig& cfg, ShotEngine& rng);

}  // namespace iontrap

// Estimators and fits used to turn counts into physics numbers: parity
// fringes, GHZ fidelity, CHSH correlations, coherence and decay rates.
#pragma once

#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace iontrap {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// y = offset + amplitude * cos(2 pi phi / period_rad - phase_offset).
struct SinusoidFit {
  double amplitude = 0.0;
  double phase_offset = 0.0;
  double offset = 0.0;
  double period_rad = 0.0;
  double residual_rms = 0.0;
  double amplitude_stderr = 0.0;
  double offset_stderr = 0.0;
};

/// Linear least squares on (1, cos, sin) with the period held fixed.
/// When `y_errors` is given, standard errors are propagated from those
/// per-point uncertainties; otherwise they are estimated from the residuals.
/// Throws FitError for fewer than 4 points or a rank-deficient design.
SinusoidFit fit_sinusoid(std::span<const double> phi, std::span<const double> y,
                         double period_rad,
                         std::optional<std::span<const double>> y_errors = std::nullopt);

/// Largest coherence accepted by fidelity_from_parts; sampled estimates may
/// exceed the physical bound 1/2 by statistical fluctuation.
inline constexpr double kCoherenceSlack = 0.05;

/// F = (p_all_down + p_all_up) / 2 + |rho_{down..down, up..up}|.
double fidelity_from_parts(double p_all_down, double p_all_up, double coherence_mag);

/// q = ((n0 + n2) - n1) / (n0 + n1 + n2).
double correlation_q(std::uint64_t n0, std::uint64_t n1, std::uint64_t n2);

/// B = |q(delta1, gamma2) - q(alpha1, gamma2)| + |q(delta1, beta2) + q(alpha1, beta2)|.
double bell_signal(double q_dg, double q_ag, double q_db, double q_ab);

/// Standard error of a +/-1 correlation estimated from n_tot shots.
double binomial_error(double q, std::uint64_t n_tot);

struct BellSettings {
  double alpha1 = -std::numbers::pi / 8.0;
  double delta1 = 3.0 * std::numbers::pi / 8.0;
  double beta2 = -std::numbers::pi / 8.0;
  double gamma2 = 3.0 * std::numbers::pi / 8.0;
};

struct CoherenceEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  SinusoidFit fit;
};

/// Coherence of ion 2 from a P2(alpha') sweep. P2 swings between
/// (1 - C)/2 and (1 + C)/2 for an ideal readout rotation, so C is twice the
/// fitted amplitude.
CoherenceEstimate coherence_from_sweep(
    std::span<const double> alpha_prime_values, std::span<const double> p2_values,
    std::optional<std::span<const double>> p2_errors = std::nullopt);

struct ExponentialFit {
  double rate = 0.0;       // 1/us
  double amplitude = 0.0;
  double rate_stderr = 0.0;
};

/// Unweighted least squares of log C = log amplitude - rate * t.
/// With `c_errors` the rate error is propagated from the per-point errors
/// (through sigma_C / C); otherwise it comes from the residuals.
/// Throws FitError for fewer than 3 points, non-positive C, or a degenerate
/// time grid.
ExponentialFit fit_exponential(std::span<const double> times_us,
                               std::span<const double> c_values,
                               std::optional<std::span<const double>> c_errors = std::nullopt);

/// Aggregated experiment output; keys are stable and serialized sorted.
struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::map<std::string, double> estimates;
  std::map<std::string, double> errors;
  std::map<std::string, std::uint64_t> counts;
  std::optional<double> runtime_ms;
};

}  // namespace iontrap

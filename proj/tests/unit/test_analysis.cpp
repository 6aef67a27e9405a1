#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "iontrap/analysis.hpp"

namespace iontrap {
namespace {

using std::numbers::pi;

std::vector<double> grid(double period, int points) {
  std::vector<double> phi;
  for (int i = 0; i < points; ++i) phi.push_back(period * i / points);
  return phi;
}

TEST(FitSinusoid, ExactCosine) {
  const auto phi = grid(pi, 16);
  std::vector<double> y;
  for (double p : phi) y.push_back(std::cos(2 * p));
  const auto fit = fit_sinusoid(phi, y, pi);
  EXPECT_NEAR(fit.amplitude, 1.0, 1e-12);
  EXPECT_NEAR(fit.offset, 0.0, 1e-12);
  EXPECT_NEAR(fit.phase_offset, 0.0, 1e-12);
  EXPECT_LT(fit.residual_rms, 1e-12);
  EXPECT_DOUBLE_EQ(fit.period_rad, pi);
}

TEST(FitSinusoid, RecoversCoherenceScaledAmplitudes) {
  const auto phi2 = grid(pi, 16);
  std::vector<double> y2;
  for (double p : phi2) y2.push_back(2 * 0.43 * std::cos(2 * p));
  EXPECT_NEAR(fit_sinusoid(phi2, y2, pi).amplitude, 0.86, 1e-12);

  const auto phi4 = grid(pi / 2, 16);
  std::vector<double> y4;
  for (double p : phi4) y4.push_back(2 * 0.215 * std::cos(4 * p));
  EXPECT_NEAR(fit_sinusoid(phi4, y4, pi / 2).amplitude, 0.43, 1e-12);
}

TEST(FitSinusoid, NegativeAmplitudeGoesIntoPhase) {
  const auto phi = grid(2 * pi, 12);
  std::vector<double> y;
  for (double p : phi) y.push_back(0.3 - 0.5 * std::cos(p - 0.4));
  const auto fit = fit_sinusoid(phi, y, 2 * pi);
  EXPECT_NEAR(fit.amplitude, 0.5, 1e-12);
  EXPECT_NEAR(fit.offset, 0.3, 1e-12);
  EXPECT_NEAR(std::cos(fit.phase_offset - (0.4 + pi)), 1.0, 1e-12);
}

TEST(FitSinusoid, PropagatedErrorMatchesScatter) {
  // Oracle: the amplitude's spread over many noisy realizations.
  const auto phi = grid(pi, 16);
  const double sigma = 0.01;
  std::vector<double> errs(phi.size(), sigma);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, sigma);
  double sum = 0.0;
  double sum2 = 0.0;
  double reported = 0.0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> y;
    for (double p : phi) y.push_back(0.8 * std::cos(2 * p) + noise(rng));
    const auto fit = fit_sinusoid(phi, y, pi, std::span<const double>(errs));
    sum += fit.amplitude;
    sum2 += fit.amplitude * fit.amplitude;
    reported = fit.amplitude_stderr;
  }
  const double spread = std::sqrt(sum2 / trials - (sum / trials) * (sum / trials));
  EXPECT_NEAR(reported, sigma * std::sqrt(2.0 / 16.0), 1e-12);
  EXPECT_NEAR(spread / reported, 1.0, 0.06);
}

TEST(FitSinusoid, RejectsTooFewOrDegeneratePoints) {
  const std::vector<double> phi = {0.0, 1.0, 2.0};
  const std::vector<double> y = {1.0, 0.0, -1.0};
  EXPECT_THROW(fit_sinusoid(phi, y, pi), FitError);
  const std::vector<double> same = {0.0, 0.0, 0.0, 0.0};
  EXPECT_THROW(fit_sinusoid(same, same, pi), FitError);
  const std::vector<double> mismatch = {0.0, 1.0, 2.0, 3.0, 4.0};
  EXPECT_THROW(fit_sinusoid(mismatch, same, pi), FitError);
}

TEST(FidelityFromParts, TableValues) {
  EXPECT_NEAR(fidelity_from_parts(0.5, 0.5, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(fidelity_from_parts(0.35, 0.35, 0.215), 0.565, 1e-12);
  EXPECT_NEAR(fidelity_from_parts(0.46, 0.385, 0.43), 0.8525, 1e-12);
}

TEST(FidelityFromParts, RejectsUnphysicalInputs) {
  EXPECT_THROW(fidelity_from_parts(1.2, 0.5, 0.1), std::invalid_argument);
  EXPECT_THROW(fidelity_from_parts(-0.1, 0.5, 0.1), std::invalid_argument);
  EXPECT_THROW(fidelity_from_parts(0.5, 0.5, -0.1), std::invalid_argument);
  EXPECT_THROW(fidelity_from_parts(0.5, 0.5, 0.5 + kCoherenceSlack + 0.01), std::invalid_argument);
}

TEST(CorrelationQ, Examples) {
  EXPECT_DOUBLE_EQ(correlation_q(10, 0, 10), 1.0);
  EXPECT_DOUBLE_EQ(correlation_q(0, 20, 0), -1.0);
  // (n0 + n2) - n1 = 10820 out of 20000.
  EXPECT_NEAR(correlation_q(9000, 4590, 6410), 0.541, 1e-15);
  EXPECT_THROW(correlation_q(0, 0, 0), std::invalid_argument);
}

TEST(BellSignal, Examples) {
  EXPECT_NEAR(bell_signal(-0.573, 0.539, 0.569, 0.541), 2.222, 1e-12);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(bell_signal(-r, r, r, r), 2 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(bell_signal(0.5, -0.5, 0.5, 0.5), 2.0, 1e-15);
}

TEST(BinomialError, Examples) {
  EXPECT_NEAR(binomial_error(0.55, 20000), 0.0059, 5e-5);
  EXPECT_NEAR(binomial_error(0.0, 10000), 0.01, 1e-15);
  EXPECT_EQ(binomial_error(1.0, 20000), 0.0);
  EXPECT_THROW(binomial_error(0.5, 0), std::invalid_argument);
}

TEST(CoherenceFromSweep, AmplitudeIsHalfTheContrast) {
  const auto alpha = grid(2 * pi, 16);
  for (double c : {1.0, 0.43, 0.0}) {
    std::vector<double> p2;
    for (double a : alpha) p2.push_back(0.5 * (1 - c * std::cos(a - 0.7)));
    EXPECT_NEAR(coherence_from_sweep(alpha, p2).value, c, 1e-12);
  }
}

TEST(FitExponential, SyntheticDecays) {
  const std::vector<double> t = {0.0, 2.5, 5.0, 7.5, 10.0, 12.5};
  for (double rate : {0.18, 0.0079}) {
    std::vector<double> c;
    for (double ti : t) c.push_back(std::exp(-rate * ti));
    const auto fit = fit_exponential(t, c);
    EXPECT_NEAR(fit.rate, rate, 1e-6);
    EXPECT_NEAR(fit.amplitude, 1.0, 1e-9);
  }
  const std::vector<double> flat(t.size(), 0.43);
  const auto fit = fit_exponential(t, flat);
  EXPECT_NEAR(fit.rate, 0.0, 1e-10);
  EXPECT_NEAR(fit.amplitude, 0.43, 1e-12);
}

TEST(FitExponential, PropagatedRateError) {
  // Oracle: delta-method variance sum_i (lever_i * sigma_i / C_i)^2.
  const std::vector<double> t = {0.0, 10.0, 20.0, 30.0};
  std::vector<double> c;
  for (double ti : t) c.push_back(std::exp(-0.05 * ti));
  const std::vector<double> err(t.size(), 0.01);
  const auto fit = fit_exponential(t, c, std::span<const double>(err));
  const double mean_t = 15.0;
  double sxx = 0.0;
  for (double ti : t) sxx += (ti - mean_t) * (ti - mean_t);
  double var = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) var += std::pow((t[i] - mean_t) / sxx * err[i] / c[i], 2);
  EXPECT_NEAR(fit.rate_stderr, std::sqrt(var), 1e-12);
}

TEST(FitExponential, RejectsBadInput) {
  const std::vector<double> two = {0.0, 1.0};
  EXPECT_THROW(fit_exponential(two, two), FitError);
  const std::vector<double> t = {0.0, 1.0, 2.0};
  const std::vector<double> neg = {1.0, -0.1, 0.5};
  EXPECT_THROW(fit_exponential(t, neg), FitError);
  const std::vector<double> same_t = {1.0, 1.0, 1.0};
  const std::vector<double> c = {1.0, 0.9, 0.8};
  EXPECT_THROW(fit_exponential(same_t, c), FitError);
}

}  // namespace
}  // namespace iontrap

// Randomized invariants. Generators are seeded, so failures reproduce.
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "iontrap/experiments.hpp"
#include "iontrap/gates.hpp"
#include "iontrap/noise.hpp"
#include "iontrap/report_io.hpp"
#include "test_support.hpp"

namespace iontrap {
namespace {

using std::numbers::pi;

CarrierPulse random_pulse(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-2 * pi, 2 * pi);
  std::vector<double> phases;
  for (int k = 0; k < n; ++k) phases.push_back(angle(rng));
  return CarrierPulse::per_ion(angle(rng), phases);
}

void expect_valid_density(const DensityMatrix& rho) {
  const Matrix& m = rho.elements();
  EXPECT_NEAR(m.trace().real(), 1.0, 1e-12);
  EXPECT_NEAR((m - m.adjoint()).norm(), 0.0, 1e-12);
  EXPECT_TRUE(rho.is_positive());
}

TEST(Invariants, GatesAreUnitaryAndPreserveNorm) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = (trial % 2 == 0) ? 2 : 4;
    const Matrix ops[] = {carrier_matrix(random_pulse(n, rng), n),
                          ms_matrix({n, trial % 3 ? GateDirection::kForward : GateDirection::kInverse}),
                          collective_dephase_unitary(std::uniform_real_distribution<double>(-9, 9)(rng), n)};
    const Matrix u = compose(ops);
    EXPECT_TRUE(is_unitary(u));
    const auto psi = apply_unitary(testing::random_state(n, rng), u);
    EXPECT_NEAR(psi.amplitudes().squaredNorm(), 1.0, 1e-12);
  }
}

TEST(Invariants, ChannelsPreserveDensityMatrices) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    auto rho = testing::random_mixed(n, rng);
    rho = apply_unitary(rho, carrier_matrix(random_pulse(n, rng), n));
    expect_valid_density(rho);
    std::vector<int> targets;
    for (int ion = 1; ion <= n; ++ion)
      if (unit(rng) < 0.6 || targets.empty()) targets.push_back(ion);
    rho = depolarize(rho, unit(rng), targets);
    expect_valid_density(rho);
    rho = collective_dephase_channel(rho, 5.0 * unit(rng));
    expect_valid_density(rho);
    DephasingProcess ambient;
    ambient.kind = DephasingKind::kAmbient;
    ambient.rate_gamma = unit(rng);
    ambient.duration_us = 10.0 * unit(rng);
    rho = dephase(rho, ambient);
    expect_valid_density(rho);
    double total = 0.0;
    for (double p : z_basis_probabilities(rho)) {
      EXPECT_GE(p, -1e-12);
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

// Correlation <Z Z> after analysis pulses (pi/2, phi1) and (pi/2, phi2).
double correlation(const DensityMatrix& rho, double phi1, double phi2) {
  const double phases[] = {phi1, phi2};
  const auto p = z_basis_probabilities(apply_unitary(rho, carrier_matrix(CarrierPulse::per_ion(pi / 2, phases), 2)));
  return p[0] + p[3] - p[1] - p[2];
}

TEST(Invariants, TsirelsonBound) {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> angle(-pi, pi);
  double largest = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto rho = trial % 2 ? to_density(testing::random_state(2, rng)) : testing::random_mixed(2, rng);
    const double a1 = angle(rng), d1 = angle(rng), b2 = angle(rng), g2 = angle(rng);
    const double b = bell_signal(correlation(rho, d1, g2), correlation(rho, a1, g2),
                                 correlation(rho, d1, b2), correlation(rho, a1, b2));
    EXPECT_LE(b, 2 * std::sqrt(2.0) + 1e-12);
    largest = std::max(largest, b);
  }
  // The ideal entangled state at the standard angles attains the bound.
  const auto ghz = to_density(apply_unitary(new_ground(2), ms_matrix({2, GateDirection::kForward})));
  const double ref = entangler_phase_reference(2);
  const BellSettings s;
  const double ideal =
      bell_signal(correlation(ghz, s.delta1 + ref, s.gamma2 + ref), correlation(ghz, s.alpha1 + ref, s.gamma2 + ref),
                  correlation(ghz, s.delta1 + ref, s.beta2 + ref), correlation(ghz, s.alpha1 + ref, s.beta2 + ref));
  EXPECT_NEAR(ideal, 2 * std::sqrt(2.0), 1e-12);
  EXPECT_GT(largest, 2.0);
}

TEST(Invariants, EncodeDecodeRoundTrip) {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> angle(-pi, pi);
  for (int trial = 0; trial < 100; ++trial) {
    const auto input = prepare_input(angle(rng), angle(rng));
    EXPECT_GT(fidelity(decode_dfs(encode_dfs(input)), input), 1.0 - 1e-10);
    const auto noisy = apply_unitary(encode_dfs(input), collective_dephase_unitary(angle(rng) * 5, 2));
    EXPECT_GT(fidelity(decode_dfs(noisy), input), 1.0 - 1e-10);
  }
}

TEST(Invariants, GaussianDephasingSemigroup) {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> var(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    const auto rho = testing::random_mixed(n, rng);
    const double s1 = var(rng);
    const double s2 = var(rng);
    const auto sequential = collective_dephase_channel(collective_dephase_channel(rho, s1), s2);
    const auto combined = collective_dephase_channel(rho, s1 + s2);
    EXPECT_NEAR((sequential.elements() - combined.elements()).norm(), 0.0, 1e-13);
  }
}

TEST(Invariants, EncodedCoherenceIgnoresAnyCollectiveNoise) {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto clean = default_config(ExperimentKind::kDfs);
  clean.analytic = true;
  clean.dfs.mode = DfsMode::kEncoded;
  clean.dfs.delay_us = {0.0, 40.0, 400.0};
  const double reference = run_dfs(clean).report.estimates.at("encoded.coherence.00");
  for (int trial = 0; trial < 10; ++trial) {
    auto cfg = clean;
    DephasingProcess noise;
    noise.kind = trial % 2 ? DephasingKind::kAmbient : DephasingKind::kEngineeredWhite;
    noise.rate_gamma = unit(rng);
    noise.start_time_us = 1000 * unit(rng);
    cfg.noise.dephasing = noise;
    const auto est = run_dfs(cfg).report.estimates;
    for (int d = 0; d < 3; ++d) {
      EXPECT_NEAR(est.at(fmt::format("encoded.coherence.{:02d}", d)), reference, 1e-9);
    }
  }
}

std::string serialize(const ExperimentOutput& out) {
  std::ostringstream s;
  s << report_to_json(out.report).dump(2);
  write_shots_csv(s, out.shots);
  return s.str();
}

TEST(Invariants, DeterministicAcrossRunsAndWorkers) {
  auto cfg = default_config(ExperimentKind::kDfs);
  cfg.shots_per_setting = 200;
  cfg.dfs.delay_us = {0.0, 5.0, 10.0};
  DephasingProcess noise;
  noise.rate_gamma = 0.18;
  cfg.noise.dephasing = noise;
  cfg.noise.detection_flip_eps = 0.02;
  const auto first = serialize(run_dfs(cfg));
  EXPECT_EQ(first, serialize(run_dfs(cfg)));
  cfg.workers = 4;
  EXPECT_EQ(first, serialize(run_dfs(cfg)));
  cfg.seed = 2;
  EXPECT_NE(first, serialize(run_dfs(cfg)));
}

TEST(Invariants, SampledConvergesToAnalytic) {
  auto cfg = default_config(ExperimentKind::kEntangle);
  cfg.shots_per_setting = 20000;
  cfg.noise.gate_depolarize_p = 0.15;
  cfg.noise.detection_flip_eps = 0.02;
  DephasingProcess noise;
  noise.rate_gamma = 0.01;
  noise.duration_us = 5.0;
  cfg.noise.dephasing = noise;
  const auto sampled = run_entangle(cfg).report.estimates;
  cfg.analytic = true;
  const auto exact = run_entangle(cfg).report.estimates;
  const double tol = 4.0 / std::sqrt(20000.0);
  for (const auto& [key, value] : exact) {
    if (key.starts_with("sweep_phi") || key == "parity_period_rad") continue;
    EXPECT_NEAR(sampled.at(key), value, tol) << key;
  }
}

}  // namespace
}  // namespace iontrap

#include "iontrap/noise.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace iontrap {

using std::numbers::pi;

std::vector<AmbientHarmonic> DephasingProcess::default_harmonics() {
  return {{60.0, 1.0}, {120.0, 0.5}, {180.0, 0.25}};
}

void DephasingProcess::validate() const {
  if (!(rate_gamma >= 0.0) || !std::isfinite(rate_gamma)) {
    throw std::invalid_argument(fmt::format("dephasing rate must be >= 0, got {}", rate_gamma));
  }
  if (!(duration_us >= 0.0) || !std::isfinite(duration_us)) {
    throw std::invalid_argument(fmt::format("dephasing duration must be >= 0, got {}", duration_us));
  }
  if (kind == DephasingKind::kAmbient) {
    if (harmonics.empty()) throw std::invalid_argument("ambient dephasing needs harmonics");
    double w2 = 0.0;
    for (const auto& h : harmonics) w2 += h.weight * h.weight;
    if (w2 <= 0.0) throw std::invalid_argument("ambient harmonic weights are all zero");
  }
}

double DephasingProcess::phase_variance() const { return 2.0 * rate_gamma * duration_us; }

std::vector<double> DephasingProcess::ambient_amplitudes() const {
  double w2 = 0.0;
  for (const auto& h : harmonics) w2 += h.weight * h.weight;
  // Var(A sin u) = A^2 / 2, summed over independent harmonics.
  const double scale = w2 > 0.0 ? std::sqrt(2.0 * phase_variance() / w2) : 0.0;
  std::vector<double> amps;
  amps.reserve(harmonics.size());
  for (const auto& h : harmonics) amps.push_back(scale * h.weight);
  return amps;
}

void NoiseConfig::validate() const {
  if (dephasing) dephasing->validate();
  if (!(detection_flip_eps >= 0.0 && detection_flip_eps < 0.5)) {
    throw std::invalid_argument(
        fmt::format("detection_flip_eps must be in [0, 0.5), got {}", detection_flip_eps));
  }
  if (!(gate_depolarize_p >= 0.0 && gate_depolarize_p <= 1.0)) {
    throw std::invalid_argument(
        fmt::format("gate_depolarize_p must be in [0, 1], got {}", gate_depolarize_p));
  }
  if (!(phase_jitter_sigma >= 0.0) || !std::isfinite(phase_jitter_sigma)) {
    throw std::invalid_argument("phase_jitter_sigma must be >= 0");
  }
}

double sample_collective_phase(const DephasingProcess& process, ShotEngine& rng) {
  const double variance = process.phase_variance();
  if (variance == 0.0) return 0.0;
  if (process.kind == DephasingKind::kEngineeredWhite) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance));
    return gauss(rng);
  }
  const auto amps = process.ambient_amplitudes();
  const double t0_s = process.start_time_us * 1e-6;
  double zeta = 0.0;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const double u = 2.0 * pi * rng.uniform();
    zeta += amps[k] * std::sin(2.0 * pi * process.harmonics[k].frequency_hz * t0_s + u);
  }
  return zeta;
}

Matrix collective_dephase_unitary(double zeta, int n_ions) {
  const auto dim = static_cast<Eigen::Index>(dimension_for(n_ions));
  Vector diag(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    diag(i) = std::polar(1.0, zeta * up_count(static_cast<std::size_t>(i)));
  }
  return diag.asDiagonal();
}

namespace {

// rho_ij *= factor(|dm_ij|) for dm_ij in 0..N.
template <typename Factor>
DensityMatrix scale_by_up_difference(const DensityMatrix& rho, Factor factor) {
  const int n = rho.n_ions();
  std::vector<double> table(static_cast<std::size_t>(n) + 1);
  for (int dm = 0; dm <= n; ++dm) table[static_cast<std::size_t>(dm)] = factor(dm);
  Matrix out = rho.elements();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      const int dm = std::abs(up_count(static_cast<std::size_t>(i)) -
                              up_count(static_cast<std::size_t>(j)));
      out(i, j) *= table[static_cast<std::size_t>(dm)];
    }
  }
  return DensityMatrix(n, std::move(out));
}

}  // namespace

DensityMatrix collective_dephase_channel(const DensityMatrix& rho, double sigma2) {
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("dephasing variance must be >= 0");
  return scale_by_up_difference(
      rho, [sigma2](int dm) { return std::exp(-static_cast<double>(dm * dm) * sigma2 / 2.0); });
}

DensityMatrix dephase(const DensityMatrix& rho, const DephasingProcess& process) {
  process.validate();
  if (process.kind == DephasingKind::kEngineeredWhite) {
    return collective_dephase_channel(rho, process.phase_variance());
  }
  // E[exp(i k A sin(phi + u))] over uniform u is J0(k A).
  const auto amps = process.ambient_amplitudes();
  return scale_by_up_difference(rho, [&amps](int dm) {
    double f = 1.0;
    for (double a : amps) f *= std::cyl_bessel_j(0.0, static_cast<double>(dm) * a);
    return f;
  });
}

std::vector<Matrix> depolarizing_kraus(int n_ions, double p, std::span<const int> targets) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(fmt::format("depolarizing probability must be in [0, 1], got {}", p));
  }
  dimension_for(n_ions);
  if (targets.empty()) throw std::invalid_argument("depolarize: no target ions");
  for (int ion : targets) {
    if (ion < 1 || ion > n_ions) throw std::invalid_argument("depolarize: target out of range");
  }

  Matrix paulis[4] = {Matrix::Identity(2, 2), Matrix::Zero(2, 2), Matrix::Zero(2, 2),
                      Matrix::Zero(2, 2)};
  paulis[1] << 0, 1, 1, 0;
  paulis[2] << 0, Complex(0, -1), Complex(0, 1), 0;
  paulis[3] << 1, 0, 0, -1;

  const std::size_t strings = std::size_t{1} << (2 * targets.size());
  const double weight = p / static_cast<double>(strings);
  std::vector<Matrix> kraus;
  kraus.reserve(strings);
  for (std::size_t code = 0; code < strings; ++code) {
    Matrix op = Matrix::Identity(1, 1);
    for (int ion = 1; ion <= n_ions; ++ion) {
      Matrix factor = paulis[0];
      for (std::size_t t = 0; t < targets.size(); ++t) {
        if (targets[t] == ion) factor = paulis[(code >> (2 * t)) & 3U];
      }
      Matrix next(op.rows() * 2, op.cols() * 2);
      for (Eigen::Index i = 0; i < op.rows(); ++i) {
        for (Eigen::Index j = 0; j < op.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = op(i, j) * factor;
      }
      op = std::move(next);
    }
    const double w = code == 0 ? 1.0 - p + weight : weight;
    if (w > 0.0) kraus.push_back(std::sqrt(w) * op);
  }
  return kraus;
}

DensityMatrix depolarize(const DensityMatrix& rho, double p, std::span<const int> targets) {
  const auto kraus = depolarizing_kraus(rho.n_ions(), p, targets);
  if (p == 0.0) return rho;
  return apply_kraus(rho, kraus);
}

DensityMatrix depolarize_all(const DensityMatrix& rho, double p) {
  std::vector<int> all;
  for (int ion = 1; ion <= rho.n_ions(); ++ion) all.push_back(ion);
  return depolarize(rho, p, all);
}

}  // namespace iontrap

// Imperfection models: collective dephasing (engineered white Stark noise and
// ambient line-frequency field noise), per-gate depolarizing, and the sampled
// random phases feeding Monte Carlo shots.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "iontrap/register.hpp"
#include "iontrap/rng.hpp"

namespace iontrap {

enum class DephasingKind { kEngineeredWhite, kAmbient };

struct AmbientHarmonic {
  double frequency_hz = 60.0;
  /// Relative amplitude; only ratios between harmonics matter.
  double weight = 1.0;
};

/// Collective phase noise: every ion picks up the same phase zeta on |up>.
///
/// Engineered white noise draws zeta ~ N(0, 2 * rate_gamma * duration_us), so
/// the single-ion coherence decays as exp(-rate_gamma * t).
///
/// Ambient noise draws zeta = sum_f A_f sin(2 pi f t0 + u_f) with independent
/// uniform u_f per shot. The amplitudes are scaled so the phase variance
/// matches the white model at the same rate and duration; the resulting decay
/// is a product of Bessel functions rather than an exponential, so rates
/// quoted for this model are effective fit values.
struct DephasingProcess {
  DephasingKind kind = DephasingKind::kEngineeredWhite;
  double rate_gamma = 0.0;   // 1/us
  double duration_us = 0.0;
  std::vector<AmbientHarmonic> harmonics = default_harmonics();
  double start_time_us = 0.0;

  static std::vector<AmbientHarmonic> default_harmonics();
  /// Throws std::invalid_argument on negative rate/duration or empty harmonics.
  void validate() const;
  /// Variance of zeta, 2 * rate_gamma * duration_us for both kinds.
  double phase_variance() const;
  /// Per-harmonic amplitudes A_f in radians (ambient kind).
  std::vector<double> ambient_amplitudes() const;
};

struct NoiseConfig {
  std::optional<DephasingProcess> dephasing;
  double detection_flip_eps = 0.0;
  double gate_depolarize_p = 0.0;
  double phase_jitter_sigma = 0.0;  // rad

  void validate() const;
};

double sample_collective_phase(const DephasingProcess& process, ShotEngine& rng);

/// diag(e^{i zeta * up_count(index)}).
Matrix collective_dephase_unitary(double zeta, int n_ions);

/// Exact Gaussian average of the collective phase:
/// rho_ij -> rho_ij * exp(-(dm_ij)^2 * sigma2 / 2), dm = difference in up counts.
DensityMatrix collective_dephase_channel(const DensityMatrix& rho, double sigma2);

/// Exact average over the process's phase distribution (Gaussian or
/// harmonic sum), evaluated in closed form.
DensityMatrix dephase(const DensityMatrix& rho, const DephasingProcess& process);

/// Kraus operators of the depolarizing channel on `targets` (1-based):
/// sqrt(1 - p + p/4^|T|) I and sqrt(p/4^|T|) P for every non-identity Pauli
/// string P on the targets.
std::vector<Matrix> depolarizing_kraus(int n_ions, double p, std::span<const int> targets);

/// rho -> (1-p) rho + p * (I_T / 2^|T|) (x) tr_T(rho), implemented as the
/// uniform Pauli twirl over the targets T (1-based).
DensityMatrix depolarize(const DensityMatrix& rho, double p, std::span<const int> targets);
DensityMatrix depolarize_all(const DensityMatrix& rho, double p);

}  // namespace iontrap

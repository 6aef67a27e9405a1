// Unitaries driven on the register: carrier rotations and the collective
// Molmer-Sorensen entangling gate.
#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "iontrap/register.hpp"

namespace iontrap {

/// Resonant carrier rotation. On each target ion k:
///   |down> -> cos(theta/2)|down> + e^{i phi_k} sin(theta/2)|up>
///   |up>   -> cos(theta/2)|up>   - e^{-i phi_k} sin(theta/2)|down>
/// Non-target ions are left alone.
struct CarrierPulse {
  double theta = 0.0;
  /// One phase per target, in the same order as `targets`.
  std::vector<double> phases;
  /// 1-based ion indices.
  std::vector<int> targets;

  /// Same angle and phase on every ion of an n-ion register.
  static CarrierPulse uniform(double theta, double phase, int n_ions);
  /// Independent phases, one per ion, all ions targeted.
  static CarrierPulse per_ion(double theta, std::span<const double> phases);
  static CarrierPulse single(double theta, double phase, int ion);
};

enum class GateDirection { kForward, kInverse };

struct EntanglePulse {
  int n_ions = 2;
  GateDirection direction = GateDirection::kForward;
};

/// 2x2 single-ion carrier rotation in the (|down>, |up>) basis.
Matrix carrier_rotation(double theta, double phase);

/// Full-register carrier unitary. Throws std::invalid_argument on empty,
/// duplicated or out-of-range targets, or a phase/target count mismatch.
Matrix carrier_matrix(const CarrierPulse& pulse, int n_ions);

/// Molmer-Sorensen gate exp(i (pi/4) sum_{j<k} X_j X_k) on 2 or 4 ions, or
/// its adjoint. For 2 ions this is (I + i XX)/sqrt(2), so
/// |dd> -> (|dd> + i|uu>)/sqrt(2). For 4 ions it sends |dddd> to
/// (|dddd> + e^{i chi}|uuuu>)/sqrt(2) up to a global phase, with
/// chi = ghz_relative_phase(4) = -pi/2.
///
/// Built by diagonalizing sum_k X_k with Hadamards (the collective spin is
/// diagonal in the product |+>/|-> basis).
Matrix ms_matrix(const EntanglePulse& pulse);

/// Relative phase chi between the |up...up> and |down...down> amplitudes
/// produced by the forward gate acting on |down...down>.
double ghz_relative_phase(int n_ions);

/// Per-ion phase of the entangler's reference frame, chi / N. Analysis pulses
/// use phases measured relative to this reference, which makes the parity
/// fringe cos(N phi) and the two-ion correlation cos(phi_1 + phi_2).
double entangler_phase_reference(int n_ions);

/// Pulse-sequence product in application order: compose({A, B, C}) = C * B * A,
/// so A acts first. Throws std::invalid_argument on an empty list or
/// mismatched dimensions.
Matrix compose(std::span<const Matrix> ops);

/// Diagonal phase frame D(phi) = diag(1, e^{i phi}) applied to every ion.
Matrix phase_frame(double phase, int n_ions);

}  // namespace iontrap

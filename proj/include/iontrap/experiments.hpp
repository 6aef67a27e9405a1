// End-to-end experiment drivers: GHZ generation and fidelity, the CHSH Bell
// test, and decoherence-free-subspace storage, plus the pulse sequences they
// share.
#pragma once

#include <vector>

#include "iontrap/analysis.hpp"
#include "iontrap/config.hpp"
#include "iontrap/gates.hpp"
#include "iontrap/readout.hpp"
#include "iontrap/register.hpp"

namespace iontrap {

/// Two carrier pulses of angle beta on both ions: the first with phases
/// (0, alpha), the second with (pi, alpha). Ion 1's rotations cancel and ion 2
/// is left in a|down> + b|up> with a = cos(beta), b = e^{i alpha} sin(beta).
PureState prepare_input(double beta, double alpha);

/// Carrier pulse that maps the inverse-gate output onto span{|du>, |ud>}:
/// theta = pi/2 with phases (pi/2, 0).
CarrierPulse dfs_encode_pulse();

/// Inverse entangling gate, then dfs_encode_pulse. Input must have ion 1 in
/// |down> (its |up> population at most 1e-8), otherwise std::invalid_argument.
/// |down>(a|down> + b|up>) maps to
///   a(|du> + i|ud>)/sqrt(2) + b(|du> - i|ud>)/sqrt(2).
PureState encode_dfs(const PureState& psi);

/// Reverses the encode pulse, then applies the forward entangling gate.
PureState decode_dfs(const PureState& psi);

struct ExperimentOutput {
  ExperimentReport report;
  /// Per-shot records in (setting, shot) order; empty in analytic mode.
  std::vector<ShotRecord> shots;
};

ExperimentOutput run_entangle(const ExperimentConfig& cfg);
ExperimentOutput run_bell(const ExperimentConfig& cfg);
ExperimentOutput run_dfs(const ExperimentConfig& cfg);
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Finds the per-gate depolarizing probability at which the analytic
/// entangle experiment (with cfg's readout) reports fidelity `target`.
/// Throws std::runtime_error when the target is not bracketed by p in [0, 1].
double calibrate_gate_depolarizing(const ExperimentConfig& cfg, double target_fidelity);

}  // namespace iontrap

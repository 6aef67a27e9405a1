#include "iontrap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "iontrap/gates.hpp"
#include "iontrap/noise.hpp"
#include "iontrap/rng.hpp"

namespace iontrap {

using std::numbers::pi;

PureState prepare_input(double beta, double alpha) {
  const double first[] = {0.0, alpha};
  const double second[] = {pi, alpha};
  const Matrix ops[] = {carrier_matrix(CarrierPulse::per_ion(beta, first), 2),
                        carrier_matrix(CarrierPulse::per_ion(beta, second), 2)};
  return apply_unitary(new_ground(2), compose(ops));
}

CarrierPulse dfs_encode_pulse() {
  const double phases[] = {pi / 2.0, 0.0};
  return CarrierPulse::per_ion(pi / 2.0, phases);
}

namespace {

CarrierPulse dfs_decode_pulse() {
  // carrier(theta, phi + pi) is the inverse of carrier(theta, phi).
  const double phases[] = {pi / 2.0 + pi, pi};
  return CarrierPulse::per_ion(pi / 2.0, phases);
}

constexpr double kEncodePreconditionTol = 1e-8;

}  // namespace

PureState encode_dfs(const PureState& psi) {
  if (psi.n_ions() != 2) throw std::invalid_argument("encode_dfs needs a 2-ion state");
  const auto probs = z_basis_probabilities(psi);
  const double ion1_up = probs[2] + probs[3];
  if (ion1_up > kEncodePreconditionTol) {
    throw std::invalid_argument(
        fmt::format("encode_dfs: ion 1 must be in |down>, its |up> population is {}", ion1_up));
  }
  const Matrix ops[] = {ms_matrix({2, GateDirection::kInverse}),
                        carrier_matrix(dfs_encode_pulse(), 2)};
  return apply_unitary(psi, compose(ops));
}

PureState decode_dfs(const PureState& psi) {
  if (psi.n_ions() != 2) throw std::invalid_argument("decode_dfs needs a 2-ion state");
  const Matrix ops[] = {carrier_matrix(dfs_decode_pulse(), 2),
                        ms_matrix({2, GateDirection::kForward})};
  return apply_unitary(psi, compose(ops));
}

namespace {

// Linear map on raw density-matrix data, built from unitaries and Kraus sets.
// Works on the non-Hermitian phase-harmonic pieces used for per-shot noise.
class Pipeline {
 public:
  Pipeline& unitary(Matrix u) {
    stages_.push_back({std::vector<Matrix>{std::move(u)}});
    return *this;
  }
  Pipeline& kraus(std::vector<Matrix> ops) {
    stages_.push_back({std::move(ops)});
    return *this;
  }
  Pipeline& carrier(const CarrierPulse& pulse, int n_ions) {
    return unitary(carrier_matrix(pulse, n_ions));
  }
  /// Entangling gate followed by its depolarizing error.
  Pipeline& entangle(int n_ions, GateDirection direction, double depolarize_p) {
    unitary(ms_matrix({n_ions, direction}));
    if (depolarize_p > 0.0) {
      std::vector<int> all;
      for (int ion = 1; ion <= n_ions; ++ion) all.push_back(ion);
      kraus(depolarizing_kraus(n_ions, depolarize_p, all));
    }
    return *this;
  }

  Matrix apply(const Matrix& rho) const {
    Matrix out = rho;
    for (const auto& stage : stages_) {
      Matrix next = Matrix::Zero(out.rows(), out.cols());
      for (const auto& k : stage.ops) next += k * out * k.adjoint();
      out = std::move(next);
    }
    return out;
  }

 private:
  struct Stage {
    std::vector<Matrix> ops;
  };
  std::vector<Stage> stages_;
};

struct MeasuredSetting {
  /// Exact class probabilities (analytic) or observed frequencies (sampled).
  std::vector<double> class_probs;
  std::vector<std::uint64_t> class_counts;
  std::uint64_t shots = 0;
};

class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg)
      : cfg_(cfg), readout_(cfg.effective_readout()), plan_{cfg.seed} {}

  const ExperimentConfig& config() const { return cfg_; }
  std::vector<ShotRecord>& shots() { return shots_; }

  /// Measures `post(noise(pre))` in the z basis through the readout.
  /// `noise` has its duration already set for this setting.
  MeasuredSetting measure(const Matrix& pre, const Pipeline& post,
                          const std::optional<DephasingProcess>& noise,
                          std::uint64_t setting_index, std::vector<double> phases) {
    const int n = cfg_.n_ions;
    const bool dephased = noise && noise->phase_variance() > 0.0;
    MeasuredSetting out;
    if (cfg_.analytic) {
      Matrix rho = pre;
      if (dephased) rho = dephase(DensityMatrix(n, rho), *noise).elements();
      const auto probs = diagonal_probabilities(post.apply(rho));
      out.class_probs = class_distribution(probs, n, readout_);
      out.shots = cfg_.shots_per_setting;
      return out;
    }

    // Split pre into pieces with fixed up-count difference dm; a collective
    // phase zeta multiplies piece dm by e^{i zeta dm}, and post is linear.
    std::vector<Eigen::VectorXcd> harmonics;
    std::vector<double> fixed_probs;
    if (dephased) {
      for (int dm = -n; dm <= n; ++dm) {
        Matrix piece = Matrix::Zero(pre.rows(), pre.cols());
        for (Eigen::Index i = 0; i < pre.rows(); ++i) {
          for (Eigen::Index j = 0; j < pre.cols(); ++j) {
            if (up_count(static_cast<std::size_t>(i)) - up_count(static_cast<std::size_t>(j)) == dm) {
              piece(i, j) = pre(i, j);
            }
          }
        }
        harmonics.push_back(post.apply(piece).diagonal());
      }
    } else {
      fixed_probs = diagonal_probabilities(post.apply(pre));
    }

    const std::uint64_t shots = cfg_.shots_per_setting;
    const std::size_t base = shots_.size();
    shots_.resize(base + shots);
    const auto workers = static_cast<std::uint64_t>(cfg_.workers);
    const std::uint64_t chunk = (shots + workers - 1) / workers;

    auto work = [&](std::uint64_t begin, std::uint64_t end) {
      std::vector<double> probs(fixed_probs);
      probs.resize(std::size_t{1} << n);
      for (std::uint64_t s = begin; s < end; ++s) {
        const std::uint64_t stream = plan_.shot_stream(setting_index, s);
        ShotEngine rng(stream);
        if (dephased) {
          const double zeta = sample_collective_phase(*noise, rng);
          double total = 0.0;
          for (std::size_t k = 0; k < probs.size(); ++k) {
            Complex acc = 0.0;
            for (int dm = -n; dm <= n; ++dm) {
              acc += std::polar(1.0, zeta * dm) *
                     harmonics[static_cast<std::size_t>(dm + n)](static_cast<Eigen::Index>(k));
            }
            probs[k] = std::max(0.0, acc.real());
            total += probs[k];
          }
          for (auto& p : probs) p /= total;
        }
        ShotRecord rec = read_shot(probs, n, readout_, rng);
        rec.shot_index = s;
        rec.setting_index = setting_index;
        rec.stream_id = stream;
        rec.settings = phases;
        shots_[base + s] = std::move(rec);
      }
    };
    if (workers == 1) {
      work(0, shots);
    } else {
      std::vector<std::jthread> pool;
      for (std::uint64_t w = 0; w < workers; ++w) {
        const std::uint64_t begin = std::min(shots, w * chunk);
        const std::uint64_t end = std::min(shots, begin + chunk);
        if (begin < end) pool.emplace_back(work, begin, end);
      }
    }

    out.class_counts.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::uint64_t s = 0; s < shots; ++s) {
      ++out.class_counts[static_cast<std::size_t>(shots_[base + s].classified_bright)];
    }
    out.shots = shots;
    for (auto c : out.class_counts) {
      out.class_probs.push_back(static_cast<double>(c) / static_cast<double>(shots));
    }
    return out;
  }

  Matrix ground() const { return to_density(new_ground(cfg_.n_ions)).elements(); }

 private:
  static std::vector<double> diagonal_probabilities(const Matrix& rho) {
    std::vector<double> p(static_cast<std::size_t>(rho.rows()));
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = std::max(0.0, rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real());
      total += p[i];
    }
    for (auto& v : p) v /= total;
    return p;
  }

  const ExperimentConfig& cfg_;
  ReadoutConfig readout_;
  RngPlan plan_;
  std::vector<ShotRecord> shots_;
};

double parity_from_classes(const std::vector<double>& class_probs) {
  double parity = 0.0;
  for (std::size_t c = 0; c < class_probs.size(); ++c) {
    parity += (c % 2 == 0) ? class_probs[c] : -class_probs[c];
  }
  return parity;
}

std::uint64_t discarded(const MeasuredSetting& m) {
  std::uint64_t counted = 0;
  for (auto c : m.class_counts) counted += c;
  return m.class_counts.empty() ? 0 : m.shots - counted;
}

ExperimentReport base_report(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.experiment = to_string(cfg.kind);
  report.seed = cfg.seed;
  report.config_digest = config_digest(cfg);
  return report;
}

std::string index_key(std::string_view prefix, std::size_t i) {
  return fmt::format("{}.{:02d}", prefix, i);
}

}  // namespace

ExperimentOutput run_entangle(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_ions;
  Runner runner(cfg);
  ExperimentOutput out;
  out.report = base_report(cfg);
  auto& est = out.report.estimates;
  auto& err = out.report.errors;
  auto& counts = out.report.counts;

  Pipeline prep;
  prep.entangle(n, GateDirection::kForward, cfg.noise.gate_depolarize_p);
  const Matrix pre = prep.apply(runner.ground());
  const PureState target = apply_unitary(new_ground(n), ms_matrix({n, GateDirection::kForward}));
  est["state_fidelity"] = fidelity(DensityMatrix(n, pre), target);

  std::uint64_t dropped = 0;
  const auto pops = runner.measure(pre, Pipeline{}, cfg.noise.dephasing, 0, {});
  dropped += discarded(pops);
  const double p_down = pops.class_probs[static_cast<std::size_t>(n)];
  const double p_up = pops.class_probs[0];
  const auto shots = static_cast<double>(cfg.shots_per_setting);
  for (std::size_t c = 0; c < pops.class_counts.size(); ++c) {
    counts[fmt::format("populations.n{}", c)] = pops.class_counts[c];
  }

  const double reference = entangler_phase_reference(n);
  const auto phis = cfg.effective_sweep().values();
  std::vector<double> parity;
  std::vector<double> parity_err;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    Pipeline analysis;
    analysis.carrier(CarrierPulse::uniform(pi / 2.0, phis[i] + reference, n), n);
    const auto m = runner.measure(pre, analysis, cfg.noise.dephasing, i + 1, {phis[i], phis[i]});
    dropped += discarded(m);
    const double pi_val = parity_from_classes(m.class_probs);
    parity.push_back(pi_val);
    parity_err.push_back(std::sqrt(std::max(0.0, 1.0 - pi_val * pi_val) / shots));
    est[index_key("parity", i)] = pi_val;
    est[index_key("sweep_phi", i)] = phis[i];
    err[index_key("parity", i)] = parity_err.back();
  }
  const auto fit =
      fit_sinusoid(phis, parity, 2.0 * pi / n, std::span<const double>(parity_err));
  const double coherence = fit.amplitude / 2.0;

  est["p_all_down"] = p_down;
  est["p_all_up"] = p_up;
  est["parity_amplitude"] = fit.amplitude;
  est["parity_phase_offset"] = fit.phase_offset;
  est["parity_offset"] = fit.offset;
  est["parity_period_rad"] = fit.period_rad;
  est["coherence"] = coherence;
  est["fidelity"] = fidelity_from_parts(p_down, p_up, coherence);

  const double e_down = std::sqrt(p_down * (1.0 - p_down) / shots);
  const double e_up = std::sqrt(p_up * (1.0 - p_up) / shots);
  err["p_all_down"] = e_down;
  err["p_all_up"] = e_up;
  err["parity_amplitude"] = fit.amplitude_stderr;
  err["coherence"] = fit.amplitude_stderr / 2.0;
  err["fidelity"] = std::sqrt((e_down * e_down + e_up * e_up) / 4.0 +
                              std::pow(fit.amplitude_stderr / 2.0, 2));

  counts["n_ions"] = static_cast<std::uint64_t>(n);
  counts["shots_per_setting"] = cfg.shots_per_setting;
  counts["settings"] = phis.size() + 1;
  counts["shots_discarded"] = dropped;
  out.shots = std::move(runner.shots());
  return out;
}

ExperimentOutput run_bell(const ExperimentConfig& cfg) {
  cfg.validate();
  Runner runner(cfg);
  ExperimentOutput out;
  out.report = base_report(cfg);
  auto& est = out.report.estimates;
  auto& err = out.report.errors;
  auto& counts = out.report.counts;
  const RngPlan plan{cfg.seed};

  Pipeline prep;
  prep.entangle(2, GateDirection::kForward, cfg.noise.gate_depolarize_p);
  const Matrix pre = prep.apply(runner.ground());
  const double reference = entangler_phase_reference(2);
  const auto shots = cfg.shots_per_setting;

  struct Pair {
    const char* name;
    int first;   // 0 = alpha1, 1 = delta1
    int second;  // 0 = beta2, 1 = gamma2
  };
  constexpr Pair kPairs[] = {{"q_ab", 0, 0}, {"q_ag", 0, 1}, {"q_db", 1, 0}, {"q_dg", 1, 1}};

  std::vector<double> signals;
  std::vector<double> signal_errs;
  std::uint64_t dropped = 0;
  for (int run = 0; run < cfg.runs; ++run) {
    double offsets[4] = {0.0, 0.0, 0.0, 0.0};
    if (cfg.noise.phase_jitter_sigma > 0.0) {
      auto rng = plan.aux_engine(AuxStream::kPhaseJitter, static_cast<std::uint64_t>(run));
      std::normal_distribution<double> jitter(0.0, cfg.noise.phase_jitter_sigma);
      for (auto& o : offsets) o = jitter(rng);
    }
    const double ion1[2] = {cfg.bell.alpha1 + offsets[0], cfg.bell.delta1 + offsets[1]};
    const double ion2[2] = {cfg.bell.beta2 + offsets[2], cfg.bell.gamma2 + offsets[3]};

    std::map<std::string, double> q;
    double var_b = 0.0;
    for (std::size_t k = 0; k < std::size(kPairs); ++k) {
      const auto& pair = kPairs[k];
      const double phi1 = ion1[pair.first];
      const double phi2 = ion2[pair.second];
      const double phases[] = {phi1 + reference, phi2 + reference};
      Pipeline analysis;
      analysis.carrier(CarrierPulse::per_ion(pi / 2.0, phases), 2);
      const auto setting = static_cast<std::uint64_t>(run) * 4 + k;
      const auto m = runner.measure(pre, analysis, cfg.noise.dephasing, setting, {phi1, phi2});
      dropped += discarded(m);
      const double qv = m.class_counts.empty()
                            ? m.class_probs[0] + m.class_probs[2] - m.class_probs[1]
                            : correlation_q(m.class_counts[0], m.class_counts[1], m.class_counts[2]);
      const double qe = binomial_error(qv, shots);
      q[pair.name] = qv;
      var_b += qe * qe;
      const auto key = fmt::format("run{}.{}", run, pair.name);
      est[key] = qv;
      err[key] = qe;
      if (!m.class_counts.empty()) {
        for (std::size_t c = 0; c < 3; ++c) {
          counts[fmt::format("{}.n{}", key, c)] = m.class_counts[c];
        }
      }
    }
    const double b = bell_signal(q["q_dg"], q["q_ag"], q["q_db"], q["q_ab"]);
    signals.push_back(b);
    signal_errs.push_back(std::sqrt(var_b));
    est[fmt::format("run{}.B", run)] = b;
    err[fmt::format("run{}.B", run)] = signal_errs.back();
  }

  const auto runs = static_cast<double>(cfg.runs);
  double mean = 0.0;
  double mean_err = 0.0;
  double var_sum = 0.0;
  for (std::size_t r = 0; r < signals.size(); ++r) {
    mean += signals[r] / runs;
    mean_err += signal_errs[r] / runs;
    var_sum += signal_errs[r] * signal_errs[r];
  }
  double spread = 0.0;
  if (signals.size() > 1) {
    for (double b : signals) spread += (b - mean) * (b - mean);
    spread = std::sqrt(spread / (runs - 1.0));
  }
  // Significance uses the larger of the typical single-run statistical error
  // and the observed run-to-run spread.
  const double sigma = std::max(mean_err, spread);
  est["B_mean"] = mean;
  err["B_mean"] = std::sqrt(var_sum) / runs;
  est["B_single_run_error"] = mean_err;
  est["B_run_spread"] = spread;
  est["B_significance"] = sigma > 0.0 ? (mean - 2.0) / sigma : 0.0;

  counts["runs"] = static_cast<std::uint64_t>(cfg.runs);
  counts["shots_per_setting"] = shots;
  counts["shots_discarded"] = dropped;
  out.shots = std::move(runner.shots());
  return out;
}

ExperimentOutput run_dfs(const ExperimentConfig& cfg) {
  cfg.validate();
  Runner runner(cfg);
  ExperimentOutput out;
  out.report = base_report(cfg);
  auto& est = out.report.estimates;
  auto& err = out.report.errors;
  auto& counts = out.report.counts;

  std::vector<DfsMode> modes;
  if (cfg.dfs.mode != DfsMode::kTest) modes.push_back(DfsMode::kEncoded);
  if (cfg.dfs.mode != DfsMode::kEncoded) modes.push_back(DfsMode::kTest);

  const double p_gate = cfg.noise.gate_depolarize_p;
  const Matrix input = to_density(prepare_input(cfg.dfs.beta, cfg.dfs.alpha)).elements();
  const auto alphas = cfg.dfs.alpha_prime.values();
  const auto& delays = cfg.dfs.delay_us;
  const auto shots = static_cast<double>(cfg.shots_per_setting);
  std::uint64_t setting = 0;
  std::uint64_t dropped = 0;

  for (const auto mode : modes) {
    const bool encoded = mode == DfsMode::kEncoded;
    const std::string name = encoded ? "encoded" : "test";
    Pipeline encode;
    if (encoded) {
      encode.entangle(2, GateDirection::kInverse, p_gate).carrier(dfs_encode_pulse(), 2);
    }
    const Matrix pre = encode.apply(input);

    std::vector<double> coherence;
    std::vector<double> coherence_err;
    for (std::size_t d = 0; d < delays.size(); ++d) {
      std::optional<DephasingProcess> noise = cfg.noise.dephasing;
      if (noise) noise->duration_us = delays[d];
      std::vector<double> p2;
      std::vector<double> p2_err;
      for (double alpha_prime : alphas) {
        Pipeline post;
        if (encoded) post.carrier(dfs_decode_pulse(), 2).entangle(2, GateDirection::kForward, p_gate);
        const double first[] = {0.0, alpha_prime};
        const double second[] = {pi, alpha_prime};
        post.carrier(CarrierPulse::per_ion(cfg.dfs.beta, first), 2)
            .carrier(CarrierPulse::per_ion(cfg.dfs.beta, second), 2);
        const auto m = runner.measure(pre, post, noise, setting++, {0.0, alpha_prime});
        dropped += discarded(m);
        const double p = m.class_probs[2];
        p2.push_back(p);
        p2_err.push_back(std::sqrt(std::max(p * (1.0 - p), 0.0) / shots));
      }
      const auto c = coherence_from_sweep(alphas, p2, std::span<const double>(p2_err));
      coherence.push_back(c.value);
      coherence_err.push_back(c.stderr_);
      est[index_key(name + ".coherence", d)] = c.value;
      err[index_key(name + ".coherence", d)] = c.stderr_;
      est[index_key(name + ".delay_us", d)] = delays[d];
    }
    est[name + ".coherence_baseline"] = coherence.front();
    err[name + ".coherence_baseline"] = coherence_err.front();
    if (delays.size() >= 3) {
      const auto fit = fit_exponential(delays, coherence, std::span<const double>(coherence_err));
      est[name + ".decay_rate"] = fit.rate;
      err[name + ".decay_rate"] = fit.rate_stderr;
      est[name + ".decay_amplitude"] = fit.amplitude;
    }
  }
  counts["shots_per_setting"] = cfg.shots_per_setting;
  counts["settings"] = setting;
  counts["shots_discarded"] = dropped;
  out.shots = std::move(runner.shots());
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::kEntangle: return run_entangle(cfg);
    case ExperimentKind::kBell: return run_bell(cfg);
    case ExperimentKind::kDfs: return run_dfs(cfg);
  }
  throw std::logic_error("unknown experiment kind");
}

double calibrate_gate_depolarizing(const ExperimentConfig& cfg, double target_fidelity) {
  ExperimentConfig probe = cfg;
  probe.kind = ExperimentKind::kEntangle;
  probe.analytic = true;
  auto residual = [&](double p) {
    probe.noise.gate_depolarize_p = p;
    return run_entangle(probe).report.estimates.at("fidelity") - target_fidelity;
  };
  const double at_zero = residual(0.0);
  const double at_one = residual(1.0);
  if (at_zero < 0.0 || at_one > 0.0) {
    throw std::runtime_error(fmt::format(
        "fidelity target {} not reachable: F(0) = {}, F(1) = {}", target_fidelity,
        at_zero + target_fidelity, at_one + target_fidelity));
  }
  if (at_zero == 0.0) return 0.0;
  std::uintmax_t max_iter = 100;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      residual, 0.0, 1.0, at_zero, at_one, boost::math::tools::eps_tolerance<double>(50), max_iter);
  return 0.5 * (lo + hi);
}

}  // namespace iontrap

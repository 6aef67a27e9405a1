#include "iontrap/readout.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

namespace iontrap {

void ReadoutConfig::validate(int n_ions) const {
  dimension_for(n_ions);
  auto check_eps = [](double e, const char* name) {
    if (!(e >= 0.0 && e < 0.5)) {
      throw std::invalid_argument(fmt::format("{} must be in [0, 0.5), got {}", name, e));
    }
  };
  check_eps(flip_eps, "flip_eps");
  check_eps(bright_to_dark(), "eps_bright_to_dark");
  check_eps(dark_to_bright(), "eps_dark_to_bright");
  if (model != ReadoutModel::kPhotonCount) return;
  if (!(lambda_dark >= 0.0) || !(lambda_bright > lambda_dark)) {
    throw std::invalid_argument(fmt::format(
        "need lambda_bright > lambda_dark >= 0, got {} and {}", lambda_bright, lambda_dark));
  }
  if (thresholds.size() != static_cast<std::size_t>(n_ions)) {
    throw std::invalid_argument(fmt::format("photon readout of {} ions needs {} thresholds, got {}",
                                            n_ions, n_ions, thresholds.size()));
  }
  for (std::size_t k = 1; k < thresholds.size(); ++k) {
    if (thresholds[k] <= thresholds[k - 1]) {
      throw std::invalid_argument("thresholds must be strictly ascending");
    }
  }
}

std::size_t sample_outcome(std::span<const double> probabilities, ShotEngine& rng) {
  if (probabilities.empty()) throw std::invalid_argument("no outcome probabilities");
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0.0) continue;
    cumulative += probabilities[i];
    last_nonzero = i;
    if (u < cumulative) return i;
  }
  // Rounding left the cumulative sum slightly below 1.
  return last_nonzero;
}

std::size_t sample_outcome(const PureState& psi, ShotEngine& rng) {
  return sample_outcome(z_basis_probabilities(psi), rng);
}

std::size_t sample_outcome(const DensityMatrix& rho, ShotEngine& rng) {
  return sample_outcome(z_basis_probabilities(rho), rng);
}

int classify_ideal_flip(std::size_t outcome, int n_ions, double eps, ShotEngine& rng) {
  ReadoutConfig cfg;
  cfg.flip_eps = eps;
  return classify_ideal_flip(outcome, n_ions, cfg, rng);
}

int classify_ideal_flip(std::size_t outcome, int n_ions, const ReadoutConfig& cfg,
                        ShotEngine& rng) {
  const double b2d = cfg.bright_to_dark();
  const double d2b = cfg.dark_to_bright();
  int bright = 0;
  for (int ion = 1; ion <= n_ions; ++ion) {
    const bool is_bright = !ion_is_up(outcome, ion, n_ions);
    // Always draw, so the stream layout does not depend on eps.
    const double u = rng.uniform();
    const bool flipped = u < (is_bright ? b2d : d2b);
    bright += (is_bright != flipped) ? 1 : 0;
  }
  return bright;
}

double photon_mean(int bright, int n_ions, const ReadoutConfig& cfg) {
  return bright * cfg.lambda_bright + (n_ions - bright) * cfg.lambda_dark;
}

int sample_photon_counts(std::size_t outcome, int n_ions, const ReadoutConfig& cfg,
                         ShotEngine& rng) {
  const double mean = photon_mean(bright_count(outcome, n_ions), n_ions, cfg);
  if (mean <= 0.0) return 0;
  std::poisson_distribution<int> poisson(mean);
  return poisson(rng);
}

int classify_threshold(int count, std::span<const int> thresholds) {
  return static_cast<int>(std::count_if(thresholds.begin(), thresholds.end(),
                                        [count](int t) { return t <= count; }));
}

double poisson_cdf(int k, double mean) {
  if (k < 0) return 0.0;
  if (mean <= 0.0) return 1.0;
  return boost::math::gamma_q(static_cast<double>(k) + 1.0, mean);
}

namespace {

// P(t_lo <= X < t_hi), with missing bounds meaning -inf / +inf.
double poisson_window(double mean, std::optional<int> t_lo, std::optional<int> t_hi) {
  const double below_hi = t_hi ? poisson_cdf(*t_hi - 1, mean) : 1.0;
  const double below_lo = t_lo ? poisson_cdf(*t_lo - 1, mean) : 0.0;
  return std::max(0.0, below_hi - below_lo);
}

std::vector<double> photon_class_row(int bright, int n_ions, const ReadoutConfig& cfg) {
  const double mean = photon_mean(bright, n_ions, cfg);
  const auto& t = cfg.thresholds;
  std::vector<double> row(static_cast<std::size_t>(n_ions) + 1);
  for (int c = 0; c <= n_ions; ++c) {
    std::optional<int> lo = c == 0 ? std::nullopt : std::optional<int>(t[c - 1]);
    std::optional<int> hi = c == n_ions ? std::nullopt : std::optional<int>(t[c]);
    row[static_cast<std::size_t>(c)] = poisson_window(mean, lo, hi);
  }
  return row;
}

// Distribution of the classified count for one true z outcome under flips.
std::vector<double> flip_class_row(std::size_t outcome, int n_ions, const ReadoutConfig& cfg) {
  std::vector<double> dist(static_cast<std::size_t>(n_ions) + 1, 0.0);
  dist[0] = 1.0;
  for (int ion = 1; ion <= n_ions; ++ion) {
    const bool is_bright = !ion_is_up(outcome, ion, n_ions);
    const double p_read_bright = is_bright ? 1.0 - cfg.bright_to_dark() : cfg.dark_to_bright();
    for (int c = ion; c >= 0; --c) {
      const auto i = static_cast<std::size_t>(c);
      const double stay = dist[i] * (1.0 - p_read_bright);
      const double move = c > 0 ? dist[i - 1] * p_read_bright : 0.0;
      dist[i] = stay + move;
    }
  }
  return dist;
}

}  // namespace

std::vector<std::vector<double>> confusion_matrix(int n_ions, const ReadoutConfig& cfg) {
  cfg.validate(n_ions);
  std::vector<std::vector<double>> table;
  for (int k = 0; k <= n_ions; ++k) {
    if (cfg.model == ReadoutModel::kPhotonCount) {
      table.push_back(photon_class_row(k, n_ions, cfg));
    } else {
      // The flip model depends on which ions are bright only through the
      // count, so use the outcome with the first k ions bright.
      const std::size_t dim = dimension_for(n_ions);
      const std::size_t outcome = (dim - 1) >> k;
      table.push_back(flip_class_row(outcome, n_ions, cfg));
    }
  }
  return table;
}

std::vector<double> class_distribution(std::span<const double> probabilities, int n_ions,
                                       const ReadoutConfig& cfg) {
  if (probabilities.size() != dimension_for(n_ions)) {
    throw std::invalid_argument("class_distribution: probability vector has wrong length");
  }
  const auto table = confusion_matrix(n_ions, cfg);
  std::vector<double> out(static_cast<std::size_t>(n_ions) + 1, 0.0);
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const auto& row = table[static_cast<std::size_t>(bright_count(i, n_ions))];
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += probabilities[i] * row[c];
  }
  return out;
}

double misclassification_rate(const ReadoutConfig& cfg, int n_ions) {
  ReadoutConfig photon = cfg;
  photon.model = ReadoutModel::kPhotonCount;
  photon.validate(n_ions);
  double wrong = 0.0;
  for (int k = 0; k <= n_ions; ++k) {
    wrong += 1.0 - photon_class_row(k, n_ions, photon)[static_cast<std::size_t>(k)];
  }
  return wrong / static_cast<double>(n_ions + 1);
}

std::vector<int> optimal_thresholds(int n_ions, double lambda_bright, double lambda_dark) {
  dimension_for(n_ions);
  std::vector<int> thresholds;
  for (int k = 1; k <= n_ions; ++k) {
    const double lo_mean = (k - 1) * lambda_bright + (n_ions - k + 1) * lambda_dark;
    const double hi_mean = k * lambda_bright + (n_ions - k) * lambda_dark;
    const int t_max = static_cast<int>(std::ceil(hi_mean + 20.0 * std::sqrt(hi_mean) + 20.0));
    int best_t = 1;
    double best_err = 2.0;
    for (int t = 1; t <= t_max; ++t) {
      const double err = (1.0 - poisson_cdf(t - 1, lo_mean)) + poisson_cdf(t - 1, hi_mean);
      if (err < best_err) {
        best_err = err;
        best_t = t;
      }
    }
    if (!thresholds.empty() && best_t <= thresholds.back()) best_t = thresholds.back() + 1;
    thresholds.push_back(best_t);
  }
  return thresholds;
}

namespace {

ReadoutCalibration calibration_at(int n_ions, double lambda_bright, double lambda_dark,
                                  double scale) {
  ReadoutCalibration cal;
  cal.window_scale = scale;
  cal.config.model = ReadoutModel::kPhotonCount;
  cal.config.lambda_bright = lambda_bright * scale;
  cal.config.lambda_dark = lambda_dark * scale;
  cal.config.thresholds = optimal_thresholds(n_ions, cal.config.lambda_bright,
                                             cal.config.lambda_dark);
  cal.exact_rate = misclassification_rate(cal.config, n_ions);
  return cal;
}

}  // namespace

ReadoutCalibration calibrate_readout(int n_ions, double lambda_bright, double lambda_dark,
                                     double target, double tolerance) {
  if (!(lambda_bright > lambda_dark && lambda_dark >= 0.0)) {
    throw std::invalid_argument("calibrate_readout: need lambda_bright > lambda_dark >= 0");
  }
  if (!(target > 0.0 && target < 1.0)) throw std::invalid_argument("target rate must be in (0, 1)");

  // Longer windows separate the count distributions, so the rate falls with
  // scale (up to integer-threshold ripple). Bracket, then bisect in log scale.
  double lo = 1.0;
  double hi = 1.0;
  for (int i = 0; i < 60 && calibration_at(n_ions, lambda_bright, lambda_dark, lo).exact_rate < target; ++i) {
    lo /= 2.0;
  }
  for (int i = 0; i < 60 && calibration_at(n_ions, lambda_bright, lambda_dark, hi).exact_rate > target; ++i) {
    hi *= 2.0;
  }
  ReadoutCalibration best = calibration_at(n_ions, lambda_bright, lambda_dark, hi);
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = std::sqrt(lo * hi);
    auto cal = calibration_at(n_ions, lambda_bright, lambda_dark, mid);
    if (std::abs(cal.exact_rate - target) < std::abs(best.exact_rate - target)) best = cal;
    if (cal.exact_rate > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(best.exact_rate - target) > tolerance) {
    throw std::runtime_error(fmt::format(
        "readout calibration reached rate {} but target is {} +/- {}", best.exact_rate, target,
        tolerance));
  }
  return best;
}

ShotRecord read_shot(std::span<const double> probabilities, int n_ions,
                     const ReadoutConfig& cfg, ShotEngine& rng) {
  ShotRecord rec;
  rec.true_outcome = sample_outcome(probabilities, rng);
  if (cfg.model == ReadoutModel::kPhotonCount) {
    rec.photon_count = sample_photon_counts(rec.true_outcome, n_ions, cfg, rng);
    rec.classified_bright = classify_threshold(*rec.photon_count, cfg.thresholds);
  } else {
    rec.classified_bright = classify_ideal_flip(rec.true_outcome, n_ions, cfg, rng);
  }
  return rec;
}

}  // namespace iontrap

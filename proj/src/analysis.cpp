#include "iontrap/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace iontrap {

using std::numbers::pi;

SinusoidFit fit_sinusoid(std::span<const double> phi, std::span<const double> y,
                         double period_rad, std::optional<std::span<const double>> y_errors) {
  const auto n = static_cast<Eigen::Index>(phi.size());
  if (phi.size() != y.size()) throw FitError("fit_sinusoid: phi and y lengths differ");
  if (y_errors && y_errors->size() != y.size()) {
    throw FitError("fit_sinusoid: error vector length differs from data");
  }
  if (n < 4) throw FitError(fmt::format("fit_sinusoid needs at least 4 points, got {}", n));
  if (!(period_rad > 0.0)) throw FitError("fit_sinusoid: period must be positive");

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd obs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double arg = 2.0 * pi * phi[static_cast<std::size_t>(i)] / period_rad;
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(arg);
    design(i, 2) = std::sin(arg);
    obs(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Matrix3d normal = design.transpose() * design;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(normal);
  const auto& sv = svd.singularValues();
  if (sv(2) <= 1e-10 * sv(0)) {
    throw FitError("fit_sinusoid: sample phases do not determine a sinusoid");
  }
  const Eigen::Matrix3d normal_inv = normal.inverse();
  const Eigen::Vector3d beta = normal_inv * design.transpose() * obs;

  SinusoidFit fit;
  fit.period_rad = period_rad;
  fit.offset = beta(0);
  fit.amplitude = std::hypot(beta(1), beta(2));
  fit.phase_offset = std::atan2(beta(2), beta(1));
  const Eigen::VectorXd resid = obs - design * beta;
  fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n));

  Eigen::Matrix3d cov;
  if (y_errors) {
    const Eigen::MatrixXd pinv = normal_inv * design.transpose();
    Eigen::VectorXd var(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = (*y_errors)[static_cast<std::size_t>(i)];
      var(i) = e * e;
    }
    cov = pinv * var.asDiagonal() * pinv.transpose();
  } else {
    const double dof = static_cast<double>(n - 3);
    cov = (resid.squaredNorm() / dof) * normal_inv;
  }
  fit.offset_stderr = std::sqrt(std::max(0.0, cov(0, 0)));
  if (fit.amplitude > 0.0) {
    const double gc = beta(1) / fit.amplitude;
    const double gs = beta(2) / fit.amplitude;
    const double var_amp = gc * gc * cov(1, 1) + 2.0 * gc * gs * cov(1, 2) + gs * gs * cov(2, 2);
    fit.amplitude_stderr = std::sqrt(std::max(0.0, var_amp));
  } else {
    fit.amplitude_stderr = std::sqrt(std::max(0.0, 0.5 * (cov(1, 1) + cov(2, 2))));
  }
  return fit;
}

double fidelity_from_parts(double p_all_down, double p_all_up, double coherence_mag) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(p_all_down) || !in_unit(p_all_up)) {
    throw std::invalid_argument(
        fmt::format("populations must lie in [0, 1], got {} and {}", p_all_down, p_all_up));
  }
  if (!(coherence_mag >= 0.0 && coherence_mag <= 0.5 + kCoherenceSlack)) {
    throw std::invalid_argument(fmt::format("coherence {} outside [0, 1/2]", coherence_mag));
  }
  return (p_all_down + p_all_up) / 2.0 + coherence_mag;
}

double correlation_q(std::uint64_t n0, std::uint64_t n1, std::uint64_t n2) {
  const std::uint64_t total = n0 + n1 + n2;
  if (total == 0) throw std::invalid_argument("correlation_q: no events");
  const double even = static_cast<double>(n0 + n2);
  return (even - static_cast<double>(n1)) / static_cast<double>(total);
}

double bell_signal(double q_dg, double q_ag, double q_db, double q_ab) {
  for (double q : {q_dg, q_ag, q_db, q_ab}) {
    if (!(std::abs(q) <= 1.0 + 1e-12)) {
      throw std::invalid_argument(fmt::format("correlation {} outside [-1, 1]", q));
    }
  }
  return std::abs(q_dg - q_ag) + std::abs(q_db + q_ab);
}

double binomial_error(double q, std::uint64_t n_tot) {
  if (n_tot == 0) throw std::invalid_argument("binomial_error: n_tot must be positive");
  return std::sqrt(std::max(0.0, 1.0 - q * q) / static_cast<double>(n_tot));
}

CoherenceEstimate coherence_from_sweep(std::span<const double> alpha_prime_values,
                                       std::span<const double> p2_values,
                                       std::optional<std::span<const double>> p2_errors) {
  CoherenceEstimate est;
  est.fit = fit_sinusoid(alpha_prime_values, p2_values, 2.0 * pi, p2_errors);
  est.value = 2.0 * est.fit.amplitude;
  est.stderr_ = 2.0 * est.fit.amplitude_stderr;
  return est;
}

ExponentialFit fit_exponential(std::span<const double> times_us,
                               std::span<const double> c_values,
                               std::optional<std::span<const double>> c_errors) {
  if (times_us.size() != c_values.size()) throw FitError("fit_exponential: length mismatch");
  if (c_errors && c_errors->size() != c_values.size()) {
    throw FitError("fit_exponential: error vector length differs from data");
  }
  const std::size_t n = times_us.size();
  if (n < 3) throw FitError(fmt::format("fit_exponential needs at least 3 points, got {}", n));
  double t_mean = 0.0;
  double l_mean = 0.0;
  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(c_values[i] > 0.0)) {
      throw FitError(fmt::format("fit_exponential: non-positive value {} at t = {}", c_values[i],
                                 times_us[i]));
    }
    logs[i] = std::log(c_values[i]);
    t_mean += times_us[i];
    l_mean += logs[i];
  }
  t_mean /= static_cast<double>(n);
  l_mean /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (times_us[i] - t_mean) * (times_us[i] - t_mean);
    sxy += (times_us[i] - t_mean) * (logs[i] - l_mean);
  }
  if (!(sxx > 0.0)) throw FitError("fit_exponential: all times are equal");
  const double slope = sxy / sxx;
  const double intercept = l_mean - slope * t_mean;

  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = logs[i] - (intercept + slope * times_us[i]);
    rss += r * r;
  }
  ExponentialFit fit;
  fit.rate = -slope;
  fit.amplitude = std::exp(intercept);
  if (c_errors) {
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sigma_log = (*c_errors)[i] / c_values[i];
      const double lever = (times_us[i] - t_mean) / sxx;
      var += lever * lever * sigma_log * sigma_log;
    }
    fit.rate_stderr = std::sqrt(var);
  } else {
    fit.rate_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

}  // namespace iontrap

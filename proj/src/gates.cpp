#include "iontrap/gates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace iontrap {

namespace {

using std::numbers::pi;

// Kronecker product of per-ion 2x2 factors, ion 1 leftmost (most significant).
Matrix kron_all(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) {
    Matrix next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

CarrierPulse CarrierPulse::uniform(double theta, double phase, int n_ions) {
  CarrierPulse p;
  p.theta = theta;
  for (int ion = 1; ion <= n_ions; ++ion) {
    p.targets.push_back(ion);
    p.phases.push_back(phase);
  }
  return p;
}

CarrierPulse CarrierPulse::per_ion(double theta, std::span<const double> phases) {
  CarrierPulse p;
  p.theta = theta;
  p.phases.assign(phases.begin(), phases.end());
  for (std::size_t k = 0; k < phases.size(); ++k) p.targets.push_back(static_cast<int>(k) + 1);
  return p;
}

CarrierPulse CarrierPulse::single(double theta, double phase, int ion) {
  return CarrierPulse{theta, {phase}, {ion}};
}

Matrix carrier_rotation(double theta, double phase) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  const Complex e = std::polar(1.0, phase);
  Matrix r(2, 2);
  r << c, -std::conj(e) * s,
       e * s, c;
  return r;
}

Matrix carrier_matrix(const CarrierPulse& pulse, int n_ions) {
  dimension_for(n_ions);
  if (!std::isfinite(pulse.theta)) throw std::invalid_argument("carrier angle is not finite");
  if (pulse.targets.empty()) throw std::invalid_argument("carrier pulse has no targets");
  if (pulse.phases.size() != pulse.targets.size()) {
    throw std::invalid_argument(fmt::format("carrier pulse has {} phases for {} targets",
                                            pulse.phases.size(), pulse.targets.size()));
  }
  std::vector<Matrix> factors(static_cast<std::size_t>(n_ions), Matrix::Identity(2, 2));
  std::vector<bool> seen(static_cast<std::size_t>(n_ions), false);
  for (std::size_t k = 0; k < pulse.targets.size(); ++k) {
    const int ion = pulse.targets[k];
    if (ion < 1 || ion > n_ions) {
      throw std::invalid_argument(fmt::format("target ion {} outside register of {}", ion, n_ions));
    }
    const auto slot = static_cast<std::size_t>(ion - 1);
    if (seen[slot]) throw std::invalid_argument(fmt::format("target ion {} repeated", ion));
    seen[slot] = true;
    factors[slot] = carrier_rotation(pulse.theta, pulse.phases[k]);
  }
  return kron_all(factors);
}

Matrix ms_matrix(const EntanglePulse& pulse) {
  const int n = pulse.n_ions;
  if (n != 2 && n != 4) {
    throw std::invalid_argument(fmt::format("entangling gate supports 2 or 4 ions, got {}", n));
  }
  const auto dim = static_cast<Eigen::Index>(dimension_for(n));

  Matrix h1(2, 2);
  h1 << 1.0, 1.0, 1.0, -1.0;
  h1 /= std::sqrt(2.0);
  const Matrix h = kron_all(std::vector<Matrix>(static_cast<std::size_t>(n), h1));

  // In the Hadamard basis, X_k is diagonal with eigenvalue +1 on bit 0, -1 on
  // bit 1. sum_{j<k} X_j X_k = (m^2 - n) / 2 with m = sum_k X_k.
  Vector diag(dim);
  const double sign = pulse.direction == GateDirection::kForward ? 1.0 : -1.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const int m = n - 2 * up_count(static_cast<std::size_t>(i));
    const double pair_sum = (m * m - n) / 2.0;
    diag(i) = std::polar(1.0, sign * (pi / 4.0) * pair_sum);
  }
  return h * diag.asDiagonal() * h;
}

double ghz_relative_phase(int n_ions) {
  const Matrix u = ms_matrix({n_ions, GateDirection::kForward});
  const auto last = u.rows() - 1;
  return std::arg(u(last, 0) / u(0, 0));
}

double entangler_phase_reference(int n_ions) {
  return ghz_relative_phase(n_ions) / static_cast<double>(n_ions);
}

Matrix compose(std::span<const Matrix> ops) {
  if (ops.empty()) throw std::invalid_argument("compose: empty operator list");
  Matrix out = ops.front();
  for (std::size_t k = 1; k < ops.size(); ++k) {
    if (ops[k].rows() != out.rows() || ops[k].cols() != out.cols()) {
      throw std::invalid_argument("compose: dimension mismatch");
    }
    out = ops[k] * out;
  }
  return out;
}

Matrix phase_frame(double phase, int n_ions) {
  Matrix d = Matrix::Identity(2, 2);
  d(1, 1) = std::polar(1.0, phase);
  return kron_all(std::vector<Matrix>(static_cast<std::size_t>(n_ions), d));
}

}  // namespace iontrap

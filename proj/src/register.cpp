#include "iontrap/register.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace iontrap {

std::size_t dimension_for(int n_ions) {
  if (n_ions < kMinIons || n_ions > kMaxIons) {
    throw std::invalid_argument(
        fmt::format("n_ions must be in [{}, {}], got {}", kMinIons, kMaxIons, n_ions));
  }
  return std::size_t{1} << n_ions;
}

int up_count(std::size_t basis_index) { return std::popcount(basis_index); }

int bright_count(std::size_t basis_index, int n_ions) {
  return n_ions - up_count(basis_index);
}

bool ion_is_up(std::size_t basis_index, int ion, int n_ions) {
  return ((basis_index >> (n_ions - ion)) & 1U) != 0;
}

PureState::PureState(int n_ions, Vector amplitudes)
    : n_ions_(n_ions), amplitudes_(std::move(amplitudes)) {
  const auto dim = dimension_for(n_ions_);
  if (static_cast<std::size_t>(amplitudes_.size()) != dim) {
    throw std::invalid_argument(fmt::format(
        "state of {} ions needs {} amplitudes, got {}", n_ions_, dim, amplitudes_.size()));
  }
  const double norm2 = amplitudes_.squaredNorm();
  if (std::abs(norm2 - 1.0) > kArithmeticTol) {
    throw std::invalid_argument(fmt::format("state is not normalized (|psi|^2 = {})", norm2));
  }
}

Complex PureState::amplitude(std::size_t index) const {
  if (index >= dim()) throw std::out_of_range("amplitude index out of range");
  return amplitudes_(static_cast<Eigen::Index>(index));
}

DensityMatrix::DensityMatrix(int n_ions, Matrix elements)
    : n_ions_(n_ions), elements_(std::move(elements)) {
  const auto dim = static_cast<Eigen::Index>(dimension_for(n_ions_));
  if (elements_.rows() != dim || elements_.cols() != dim) {
    throw std::invalid_argument(fmt::format("density matrix of {} ions must be {}x{}",
                                            n_ions_, dim, dim));
  }
  const double herm = (elements_ - elements_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kArithmeticTol) {
    throw std::invalid_argument(fmt::format("density matrix not Hermitian (deviation {})", herm));
  }
  if (std::abs(trace() - 1.0) > kArithmeticTol) {
    throw std::invalid_argument(fmt::format("density matrix trace is {}", trace()));
  }
}

double DensityMatrix::trace() const { return elements_.trace().real(); }

double DensityMatrix::purity() const { return (elements_ * elements_).trace().real(); }

bool DensityMatrix::is_positive(double tol) const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(elements_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -tol;
}

PureState new_ground(int n_ions) {
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(dimension_for(n_ions)));
  amps(0) = 1.0;
  return PureState(n_ions, std::move(amps));
}

PureState make_state(int n_ions, Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (norm == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
  return PureState(n_ions, amplitudes / norm);
}

DensityMatrix to_density(const PureState& psi) {
  const Vector& a = psi.amplitudes();
  Matrix rho = a * a.adjoint();
  // Exact Hermiticity; the outer product is already Hermitian up to rounding.
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(psi.n_ions(), std::move(rho));
}

bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const Matrix id = Matrix::Identity(u.rows(), u.cols());
  return (u.adjoint() * u - id).cwiseAbs().maxCoeff() < tol;
}

namespace {

void check_operator(const Matrix& u, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  if (u.rows() != d || u.cols() != d) {
    throw std::invalid_argument(
        fmt::format("operator is {}x{}, register needs {}x{}", u.rows(), u.cols(), d, d));
  }
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

PureState apply_unitary(const PureState& psi, const Matrix& u) {
  check_operator(u, psi.dim());
  if (!is_unitary(u)) throw std::invalid_argument("operator is not unitary");
  Vector out = u * psi.amplitudes();
  // Remove accumulated rounding so long pulse sequences stay normalized.
  out /= out.norm();
  return PureState(psi.n_ions(), std::move(out));
}

DensityMatrix apply_unitary(const DensityMatrix& rho, const Matrix& u) {
  check_operator(u, rho.dim());
  if (!is_unitary(u)) throw std::invalid_argument("operator is not unitary");
  Matrix out = hermitize(u * rho.elements() * u.adjoint());
  out /= out.trace().real();
  return DensityMatrix(rho.n_ions(), std::move(out));
}

DensityMatrix apply_kraus(const DensityMatrix& rho, std::span<const Matrix> kraus) {
  if (kraus.empty()) throw std::invalid_argument("empty Kraus set");
  const auto d = static_cast<Eigen::Index>(rho.dim());
  Matrix completeness = Matrix::Zero(d, d);
  for (const auto& k : kraus) {
    check_operator(k, rho.dim());
    completeness += k.adjoint() * k;
  }
  if ((completeness - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kStructuralTol) {
    throw std::invalid_argument("Kraus operators violate completeness");
  }
  Matrix out = Matrix::Zero(d, d);
  for (const auto& k : kraus) out += k * rho.elements() * k.adjoint();
  out = hermitize(out);
  out /= out.trace().real();
  return DensityMatrix(rho.n_ions(), std::move(out));
}

Complex matrix_element(const DensityMatrix& rho, std::size_t i, std::size_t j) {
  if (i >= rho.dim() || j >= rho.dim()) {
    throw std::out_of_range(fmt::format("matrix element ({}, {}) outside dimension {}", i, j,
                                        rho.dim()));
  }
  return rho.elements()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

std::vector<double> z_basis_probabilities(const PureState& psi) {
  std::vector<double> p(psi.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(psi.amplitude(i));
  return p;
}

std::vector<double> z_basis_probabilities(const DensityMatrix& rho) {
  std::vector<double> p(rho.dim());
  for (std::size_t i = 0; i < p.size(); ++i) {
    // Clamp tiny negative diagonals produced by rounding.
    p[i] = std::max(0.0, matrix_element(rho, i, i).real());
  }
  return p;
}

namespace {

double parity_from_probabilities(const std::vector<double>& probs, int n_ions) {
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += (bright_count(i, n_ions) % 2 == 0) ? probs[i] : -probs[i];
  }
  return total;
}

}  // namespace

double parity_expectation(const PureState& psi) {
  return parity_from_probabilities(z_basis_probabilities(psi), psi.n_ions());
}

double parity_expectation(const DensityMatrix& rho) {
  return parity_from_probabilities(z_basis_probabilities(rho), rho.n_ions());
}

double fidelity(const DensityMatrix& rho, const PureState& psi) {
  if (rho.dim() != psi.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const Vector& a = psi.amplitudes();
  return (a.adjoint() * rho.elements() * a)(0, 0).real();
}

double fidelity(const PureState& a, const PureState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

Matrix reduced_density(const DensityMatrix& rho, std::span<const int> keep) {
  const int n = rho.n_ions();
  for (int ion : keep) {
    if (ion < 1 || ion > n) throw std::invalid_argument("reduced_density: ion out of range");
  }
  auto kept_bits = [&](std::size_t index) {
    std::size_t out = 0;
    for (int ion : keep) out = (out << 1) | (ion_is_up(index, ion, n) ? 1U : 0U);
    return out;
  };
  std::size_t keep_mask = 0;
  for (int ion : keep) keep_mask |= std::size_t{1} << (n - ion);

  const auto rd = static_cast<Eigen::Index>(std::size_t{1} << keep.size());
  Matrix out = Matrix::Zero(rd, rd);
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    for (std::size_t j = 0; j < rho.dim(); ++j) {
      if ((i & ~keep_mask) != (j & ~keep_mask)) continue;
      out(static_cast<Eigen::Index>(kept_bits(i)), static_cast<Eigen::Index>(kept_bits(j))) +=
          matrix_element(rho, i, j);
    }
  }
  return out;
}

}  // namespace iontrap

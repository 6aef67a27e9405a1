// Shared helpers for the test suites: random states and unitaries, and
// independent reference constructions built from matrix exponentials.
#pragma once

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "iontrap/register.hpp"

namespace iontrap::testing {

inline Vector random_amplitudes(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

inline PureState random_state(int n_ions, std::mt19937_64& rng) {
  return PureState(n_ions, random_amplitudes(dimension_for(n_ions), rng));
}

/// Haar-ish random unitary from the QR decomposition of a Gaussian matrix.
inline Matrix random_unitary(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(d, d);
}

inline DensityMatrix random_mixed(int n_ions, std::mt19937_64& rng) {
  const auto d = static_cast<Eigen::Index>(dimension_for(n_ions));
  Matrix a = Matrix::Zero(d, d);
  for (int k = 0; k < 3; ++k) {
    const Vector v = random_amplitudes(static_cast<std::size_t>(d), rng);
    a += v * v.adjoint();
  }
  a /= a.trace().real();
  return DensityMatrix(n_ions, 0.5 * (a + a.adjoint()));
}

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

/// Operator `op` on ion `ion` (1-based, ion 1 most significant) of n ions.
inline Matrix embed(const Matrix& op, int ion, int n_ions) {
  Matrix out = Matrix::Identity(1, 1);
  for (int k = 1; k <= n_ions; ++k) {
    const Matrix f = k == ion ? op : Matrix::Identity(2, 2);
    Matrix next = Matrix::Zero(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * f;
    out = next;
  }
  return out;
}

/// exp(i pi/4 sum_{j<k} X_j X_k) by direct matrix exponential.
inline Matrix reference_entangler(int n_ions) {
  const auto d = static_cast<Eigen::Index>(dimension_for(n_ions));
  Matrix h = Matrix::Zero(d, d);
  for (int j = 1; j <= n_ions; ++j)
    for (int k = j + 1; k <= n_ions; ++k)
      h += embed(pauli_x(), j, n_ions) * embed(pauli_x(), k, n_ions);
  const Matrix gen = Complex(0.0, M_PI / 4.0) * h;
  return gen.exp();
}

/// Single-ion carrier rotation as exp(theta/2 (e^{i phi} s+ - e^{-i phi} s-)),
/// with s+ = |up><down|.
inline Matrix reference_carrier(double theta, double phi) {
  Matrix sp = Matrix::Zero(2, 2);
  sp(1, 0) = 1.0;
  const Complex e = std::polar(1.0, phi);
  const Matrix gen = (theta / 2.0) * (e * sp - std::conj(e) * sp.adjoint());
  return gen.exp();
}

/// |<a|b>|, insensitive to global phase.
inline double overlap(const Vector& a, const Vector& b) { return std::abs(a.dot(b)); }

}  // namespace iontrap::testing

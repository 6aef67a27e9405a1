// Dense state-space substrate for a register of 1 to 4 trapped-ion qubits.
//
// Basis convention (used everywhere in the library): basis index bit k is 0
// when ion k is in |down> and 1 when it is in |up>; ion 1 is the most
// significant bit. |down...down> is index 0 and |up...up> is index 2^N - 1.
// An ion in |down> fluoresces ("bright") under state-selective detection.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace iontrap {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMinIons = 1;
inline constexpr int kMaxIons = 4;

// Structural checks (unitarity, Kraus completeness).
inline constexpr double kStructuralTol = 1e-10;
// Arithmetic identities (normalization, trace, Hermiticity).
inline constexpr double kArithmeticTol = 1e-12;
// Smallest eigenvalue tolerated for a density matrix.
inline constexpr double kPositivityTol = 1e-10;

/// Hilbert-space dimension for n ions; throws std::invalid_argument outside [1, 4].
std::size_t dimension_for(int n_ions);

/// Number of ions in |up> for a basis index.
int up_count(std::size_t basis_index);
/// Number of bright (|down>) ions for a basis index of an n-ion register.
int bright_count(std::size_t basis_index, int n_ions);
/// True when ion `ion` (1-based) is |up> in `basis_index`.
bool ion_is_up(std::size_t basis_index, int ion, int n_ions);

class PureState {
 public:
  /// Validates dimension and normalization (within kArithmeticTol).
  PureState(int n_ions, Vector amplitudes);

  int n_ions() const { return n_ions_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::size_t index) const;

 private:
  int n_ions_;
  Vector amplitudes_;
};

class DensityMatrix {
 public:
  /// Validates shape, Hermiticity and unit trace (within kArithmeticTol).
  /// Positivity is not checked here; see is_positive().
  DensityMatrix(int n_ions, Matrix elements);

  int n_ions() const { return n_ions_; }
  std::size_t dim() const { return static_cast<std::size_t>(elements_.rows()); }
  const Matrix& elements() const { return elements_; }

  double trace() const;
  double purity() const;
  /// Smallest eigenvalue is >= -tol.
  bool is_positive(double tol = kPositivityTol) const;

 private:
  int n_ions_;
  Matrix elements_;
};

PureState new_ground(int n_ions);
/// Builds a normalized state from raw amplitudes, normalizing them first.
PureState make_state(int n_ions, Vector amplitudes);
DensityMatrix to_density(const PureState& psi);

bool is_unitary(const Matrix& u, double tol = kStructuralTol);

/// psi -> U psi. Throws std::invalid_argument on dimension mismatch or a
/// non-unitary U.
PureState apply_unitary(const PureState& psi, const Matrix& u);
/// rho -> U rho U^dagger.
DensityMatrix apply_unitary(const DensityMatrix& rho, const Matrix& u);

/// rho -> sum_i K_i rho K_i^dagger. The Kraus set must satisfy
/// sum K^dagger K = I within kStructuralTol.
DensityMatrix apply_kraus(const DensityMatrix& rho, std::span<const Matrix> kraus);

Complex matrix_element(const DensityMatrix& rho, std::size_t i, std::size_t j);

/// Probability of each z-basis outcome, indexed by basis index.
std::vector<double> z_basis_probabilities(const PureState& psi);
std::vector<double> z_basis_probabilities(const DensityMatrix& rho);

/// Expectation of the detection parity: +1 when the number of |down> ions is
/// even, -1 when it is odd.
double parity_expectation(const PureState& psi);
double parity_expectation(const DensityMatrix& rho);

/// <psi| rho |psi>.
double fidelity(const DensityMatrix& rho, const PureState& psi);
/// |<a|b>|^2.
double fidelity(const PureState& a, const PureState& b);

/// Traces out every ion not listed in `keep` (1-based, ascending order kept).
Matrix reduced_density(const DensityMatrix& rho, std::span<const int> keep);

}  // namespace iontrap

#pragma once

/// @file
/// Complex state vectors, sparse operators and the action of exp(-iHt).

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mbcert {

using cplx = std::complex<double>;

/// Numerical tolerances shared by every engine and test.
namespace tol {
inline constexpr double kNorm = 1e-10;        ///< normalization and trace checks
inline constexpr double kHermitian = 1e-10;   ///< Hermiticity, unitarity, idempotence
inline constexpr double kOracle = 1e-9;       ///< agreement with independent oracles
inline constexpr double kPsdFloor = 1e-9;     ///< smallest eigenvalue treated as non-negative
inline constexpr double kStrict = 1e-12;      ///< margin for strict inequalities
inline constexpr double kPostSelection = 1e-12;
}  // namespace tol

/// Raised when an input violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class BasisTag { kGeneric, kFullChain, kChainAncilla, kDomainWall };

const char* to_string(BasisTag tag);

/// Complex amplitude vector over a labeled basis. Immutable once built.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::vector<cplx> amplitudes, BasisTag tag = BasisTag::kGeneric);

  static StateVector basis_state(std::size_t dim, std::size_t index,
                                 BasisTag tag = BasisTag::kGeneric);

  std::size_t dim() const { return amps_.size(); }
  BasisTag basis() const { return tag_; }
  std::span<const cplx> amplitudes() const { return amps_; }
  const cplx& operator[](std::size_t k) const { return amps_[k]; }

  double norm() const;
  bool is_normalized(double tolerance = tol::kNorm) const;
  StateVector normalized() const;
  StateVector scaled(cplx factor) const;
  StateVector retagged(BasisTag tag) const { return StateVector(amps_, tag); }

 private:
  std::vector<cplx> amps_;
  BasisTag tag_ = BasisTag::kGeneric;
};

/// <u|v>, conjugate-linear in u.
cplx inner(const StateVector& u, const StateVector& v);

/// Largest elementwise |u_k - v_k|.
double max_abs_deviation(const StateVector& u, const StateVector& v);

struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};

/// Square operator in compressed-row form. Duplicate entries are summed and
/// exact zeros dropped on construction. A Hermitian claim is verified.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(std::size_t dim, std::vector<Triplet> entries, bool hermitian = false);

  static SparseOperator identity(std::size_t dim);
  static SparseOperator zero(std::size_t dim);
  static SparseOperator from_dense(const Eigen::MatrixXcd& m, bool hermitian = false);
  /// |ket><ket|
  static SparseOperator projector_onto(const StateVector& ket);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return values_.size(); }
  bool hermitian() const { return hermitian_; }

  cplx at(std::size_t row, std::size_t col) const;
  std::vector<Triplet> entries() const;
  std::size_t row_nnz(std::size_t row) const { return row_ptr_[row + 1] - row_ptr_[row]; }

  /// out = A * in; `out` must not alias `in`.
  void multiply_into(std::span<const cplx> in, std::span<cplx> out) const;

  SparseOperator adjoint() const;
  SparseOperator scaled(cplx factor) const;
  Eigen::MatrixXcd to_dense() const;

  bool is_hermitian_within(double tolerance) const;
  /// Gershgorin enclosure [lo, hi] of the real spectrum; requires hermitian().
  std::pair<double, double> gershgorin_interval() const;

 private:
  std::size_t dim_ = 0;
  bool hermitian_ = false;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<cplx> values_;
};

/// A * v, no normalization.
StateVector apply(const SparseOperator& a, const StateVector& v);

SparseOperator multiply(const SparseOperator& a, const SparseOperator& b);
SparseOperator add(const SparseOperator& a, const SparseOperator& b, cplx b_scale = 1.0);

bool is_unitary(const SparseOperator& u, double tolerance = tol::kHermitian);
bool is_projector(const SparseOperator& p, double tolerance = tol::kHermitian);

enum class ExpmMethod { kAuto, kChebyshev, kDense };

/// kAuto switches to dense eigendecomposition at or below this dimension.
inline constexpr std::size_t kDenseExpmMaxDim = 512;

/// Applies exp(-iHt) for a fixed Hermitian H. Dense mode caches the
/// eigendecomposition; instances are immutable and safe to share.
class Propagator {
 public:
  explicit Propagator(SparseOperator hamiltonian, ExpmMethod method = ExpmMethod::kAuto);

  StateVector evolve(const StateVector& v, double t) const;
  const SparseOperator& hamiltonian() const { return *h_; }
  ExpmMethod method() const { return method_; }

 private:
  struct Eigensystem;

  StateVector evolve_chebyshev(const StateVector& v, double t) const;
  StateVector evolve_dense(const StateVector& v, double t) const;

  std::shared_ptr<const SparseOperator> h_;
  std::shared_ptr<const Eigensystem> eig_;
  ExpmMethod method_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

/// exp(-iHt) v. Rejects non-Hermitian H and non-finite t.
StateVector expm_apply(const SparseOperator& h, const StateVector& v, double t,
                       ExpmMethod method = ExpmMethod::kAuto);

/// J_0(x) .. J_kmax(x) by Miller's backward recurrence.
std::vector<double> bessel_j_sequence(double x, int kmax);

/// Ascending eigenvalues of a Hermitian matrix.
std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& m);

}  // namespace mbcert

#include "mbcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mbcert {

const char* to_string(BasisTag tag) {
  switch (tag) {
    case BasisTag::kGeneric: return "generic";
    case BasisTag::kFullChain: return "full-chain";
    case BasisTag::kChainAncilla: return "chain+ancilla";
    case BasisTag::kDomainWall: return "domain-wall";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(std::vector<cplx> amplitudes, BasisTag tag)
    : amps_(std::move(amplitudes)), tag_(tag) {
  if (amps_.empty()) throw InvalidArgument("StateVector: dimension must be positive");
}

StateVector StateVector::basis_state(std::size_t dim, std::size_t index, BasisTag tag) {
  if (index >= dim) throw InvalidArgument("StateVector::basis_state: index out of range");
  std::vector<cplx> a(dim, cplx{0.0, 0.0});
  a[index] = 1.0;
  return StateVector(std::move(a), tag);
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& z : amps_) s += std::norm(z);
  return std::sqrt(s);
}

bool StateVector::is_normalized(double tolerance) const {
  return std::abs(norm() - 1.0) <= tolerance;
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0 || !std::isfinite(n)) throw InvalidArgument("StateVector: cannot normalize a zero vector");
  return scaled(1.0 / n);
}

StateVector StateVector::scaled(cplx factor) const {
  std::vector<cplx> a(amps_);
  for (auto& z : a) z *= factor;
  return StateVector(std::move(a), tag_);
}

cplx inner(const StateVector& u, const StateVector& v) {
  if (u.dim() != v.dim() || u.basis() != v.basis()) {
    throw InvalidArgument("inner: dimension or basis mismatch (" + std::to_string(u.dim()) + "/" +
                          to_string(u.basis()) + " vs " + std::to_string(v.dim()) + "/" +
                          to_string(v.basis()) + ")");
  }
  cplx s{0.0, 0.0};
  for (std::size_t k = 0; k < u.dim(); ++k) s += std::conj(u[k]) * v[k];
  return s;
}

double max_abs_deviation(const StateVector& u, const StateVector& v) {
  if (u.dim() != v.dim()) throw InvalidArgument("max_abs_deviation: dimension mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < u.dim(); ++k) m = std::max(m, std::abs(u[k] - v[k]));
  return m;
}

// ---------------------------------------------------------------------------
// SparseOperator

SparseOperator::SparseOperator(std::size_t dim, std::vector<Triplet> entries, bool hermitian)
    : dim_(dim), hermitian_(hermitian) {
  if (dim == 0) throw InvalidArgument("SparseOperator: dimension must be positive");
  for (const auto& t : entries) {
    if (t.row >= dim || t.col >= dim) throw InvalidArgument("SparseOperator: entry index out of range");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  row_ptr_.assign(dim + 1, 0);
  col_idx_.reserve(entries.size());
  values_.reserve(entries.size());
  std::size_t k = 0;
  while (k < entries.size()) {
    const std::size_t r = entries[k].row;
    const std::size_t c = entries[k].col;
    cplx sum{0.0, 0.0};
    while (k < entries.size() && entries[k].row == r && entries[k].col == c) sum += entries[k++].value;
    if (sum != cplx{0.0, 0.0}) {
      col_idx_.push_back(c);
      values_.push_back(sum);
      ++row_ptr_[r + 1];
    }
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());

  if (hermitian_ && !is_hermitian_within(tol::kHermitian)) {
    throw InvalidArgument("SparseOperator: declared Hermitian but A != A^dagger");
  }
}

SparseOperator SparseOperator::identity(std::size_t dim) {
  std::vector<Triplet> e;
  e.reserve(dim);
  for (std::size_t k = 0; k < dim; ++k) e.push_back({k, k, 1.0});
  return SparseOperator(dim, std::move(e), true);
}

SparseOperator SparseOperator::zero(std::size_t dim) { return SparseOperator(dim, {}, true); }

SparseOperator SparseOperator::from_dense(const Eigen::MatrixXcd& m, bool hermitian) {
  if (m.rows() != m.cols()) throw InvalidArgument("SparseOperator::from_dense: matrix must be square");
  std::vector<Triplet> e;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(r, c) != cplx{0.0, 0.0})
        e.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), m(r, c)});
  return SparseOperator(static_cast<std::size_t>(m.rows()), std::move(e), hermitian);
}

SparseOperator SparseOperator::projector_onto(const StateVector& ket) {
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < ket.dim(); ++k)
    if (ket[k] != cplx{0.0, 0.0}) support.push_back(k);
  std::vector<Triplet> e;
  e.reserve(support.size() * support.size());
  for (auto r : support)
    for (auto c : support) e.push_back({r, c, ket[r] * std::conj(ket[c])});
  return SparseOperator(ket.dim(), std::move(e), true);
}

cplx SparseOperator::at(std::size_t row, std::size_t col) const {
  if (row >= dim_ || col >= dim_) throw InvalidArgument("SparseOperator::at: index out of range");
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return {0.0, 0.0};
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::vector<Triplet> SparseOperator::entries() const {
  std::vector<Triplet> e;
  e.reserve(values_.size());
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) e.push_back({r, col_idx_[k], values_[k]});
  return e;
}

void SparseOperator::multiply_into(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != dim_ || out.size() != dim_) throw InvalidArgument("SparseOperator: dimension mismatch");
  for (std::size_t r = 0; r < dim_; ++r) {
    cplx s{0.0, 0.0};
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * in[col_idx_[k]];
    out[r] = s;
  }
}

SparseOperator SparseOperator::adjoint() const {
  auto e = entries();
  for (auto& t : e) {
    std::swap(t.row, t.col);
    t.value = std::conj(t.value);
  }
  return SparseOperator(dim_, std::move(e), hermitian_);
}

SparseOperator SparseOperator::scaled(cplx factor) const {
  auto e = entries();
  for (auto& t : e) t.value *= factor;
  const bool stays_hermitian = hermitian_ && factor.imag() == 0.0;
  return SparseOperator(dim_, std::move(e), stays_hermitian);
}

Eigen::MatrixXcd SparseOperator::to_dense() const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_idx_[k])) = values_[k];
  return m;
}

bool SparseOperator::is_hermitian_within(double tolerance) const {
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const cplx a = values_[k];
      const cplx b = at(col_idx_[k], r);
      if (std::abs(a - std::conj(b)) > tolerance * std::max(1.0, std::abs(a))) return false;
    }
  }
  return true;
}

std::pair<double, double> SparseOperator::gershgorin_interval() const {
  if (!hermitian_) throw InvalidArgument("gershgorin_interval: operator is not Hermitian");
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t r = 0; r < dim_; ++r) {
    double centre = 0.0, radius = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_idx_[k] == r) centre = values_[k].real();
      else radius += std::abs(values_[k]);
    }
    if (first) {
      lo = centre - radius;
      hi = centre + radius;
      first = false;
    } else {
      lo = std::min(lo, centre - radius);
      hi = std::max(hi, centre + radius);
    }
  }
  return {lo, hi};
}

StateVector apply(const SparseOperator& a, const StateVector& v) {
  if (a.dim() != v.dim()) {
    throw InvalidArgument("apply: operator dim " + std::to_string(a.dim()) + " vs vector dim " +
                          std::to_string(v.dim()));
  }
  std::vector<cplx> out(v.dim());
  a.multiply_into(v.amplitudes(), out);
  return StateVector(std::move(out), v.basis());
}

SparseOperator multiply(const SparseOperator& a, const SparseOperator& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("multiply: dimension mismatch");
  const std::size_t n = a.dim();
  const auto ea = a.entries();
  const auto eb = b.entries();
  std::vector<std::size_t> b_row_ptr(n + 1, 0);
  for (const auto& t : eb) ++b_row_ptr[t.row + 1];
  std::partial_sum(b_row_ptr.begin(), b_row_ptr.end(), b_row_ptr.begin());

  // Gustavson row-by-row product with a dense accumulator.
  std::vector<cplx> acc(n, cplx{0.0, 0.0});
  std::vector<char> touched(n, 0);
  std::vector<std::size_t> cols;
  std::vector<Triplet> out;
  std::size_t k = 0;
  while (k < ea.size()) {
    const std::size_t r = ea[k].row;
    for (; k < ea.size() && ea[k].row == r; ++k) {
      const std::size_t mid = ea[k].col;
      for (std::size_t q = b_row_ptr[mid]; q < b_row_ptr[mid + 1]; ++q) {
        const std::size_t c = eb[q].col;
        if (!touched[c]) {
          touched[c] = 1;
          cols.push_back(c);
        }
        acc[c] += ea[k].value * eb[q].value;
      }
    }
    for (auto c : cols) {
      out.push_back({r, c, acc[c]});
      acc[c] = 0.0;
      touched[c] = 0;
    }
    cols.clear();
  }
  return SparseOperator(n, std::move(out), false);
}

SparseOperator add(const SparseOperator& a, const SparseOperator& b, cplx b_scale) {
  if (a.dim() != b.dim()) throw InvalidArgument("add: dimension mismatch");
  auto e = a.entries();
  for (auto t : b.entries()) {
    t.value *= b_scale;
    e.push_back(t);
  }
  return SparseOperator(a.dim(), std::move(e), false);
}

namespace {

double max_abs_entry(const SparseOperator& a) {
  double m = 0.0;
  for (const auto& t : a.entries()) m = std::max(m, std::abs(t.value));
  return m;
}

}  // namespace

bool is_unitary(const SparseOperator& u, double tolerance) {
  const auto gram = multiply(u.adjoint(), u);
  return max_abs_entry(add(gram, SparseOperator::identity(u.dim()), -1.0)) <= tolerance;
}

bool is_projector(const SparseOperator& p, double tolerance) {
  if (!p.is_hermitian_within(tolerance)) return false;
  return max_abs_entry(add(multiply(p, p), p, -1.0)) <= tolerance;
}

// ---------------------------------------------------------------------------
// Matrix-exponential action

std::vector<double> bessel_j_sequence(double x, int kmax) {
  if (kmax < 0) throw InvalidArgument("bessel_j_sequence: kmax must be non-negative");
  std::vector<double> j(static_cast<std::size_t>(kmax) + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }
  const double ax = std::abs(x);
  const double top = std::max<double>(kmax, ax);
  int start = static_cast<int>(top + 30.0 + std::sqrt(40.0 * top));
  start += start % 2;

  double jp1 = 0.0;
  double jk = 1e-300;
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    const double jm1 = (2.0 * k / ax) * jk - jp1;
    jp1 = jk;
    jk = jm1;
    if (k - 1 <= kmax) j[static_cast<std::size_t>(k - 1)] = jk;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * jk;
    if (std::abs(jk) > 1e250) {
      jk *= 1e-250;
      jp1 *= 1e-250;
      norm *= 1e-250;
      for (int q = k - 1; q <= kmax; ++q) j[static_cast<std::size_t>(q)] *= 1e-250;
    }
  }
  norm += jk;  // J_0 term
  for (auto& v : j) v /= norm;
  if (x < 0.0)
    for (std::size_t k = 1; k < j.size(); k += 2) j[k] = -j[k];
  return j;
}

std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eigenvalues: solver failed");
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

struct Propagator::Eigensystem {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

Propagator::Propagator(SparseOperator hamiltonian, ExpmMethod method)
    : h_(std::make_shared<const SparseOperator>(std::move(hamiltonian))), method_(method) {
  if (!h_->is_hermitian_within(tol::kHermitian)) {
    throw InvalidArgument("Propagator: Hamiltonian is not Hermitian");
  }
  if (method_ == ExpmMethod::kAuto) {
    method_ = h_->dim() <= kDenseExpmMaxDim ? ExpmMethod::kDense : ExpmMethod::kChebyshev;
  }
  if (method_ == ExpmMethod::kDense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h_->to_dense());
    if (solver.info() != Eigen::Success) throw std::runtime_error("Propagator: eigensolver failed");
    eig_ = std::make_shared<const Eigensystem>(Eigensystem{solver.eigenvalues(), solver.eigenvectors()});
  } else {
    // The Hermitian flag may be unset on operators assembled from sums.
    const SparseOperator herm(h_->dim(), h_->entries(), true);
    std::tie(lo_, hi_) = herm.gershgorin_interval();
  }
}

StateVector Propagator::evolve(const StateVector& v, double t) const {
  if (!std::isfinite(t)) throw InvalidArgument("Propagator::evolve: time must be finite");
  if (v.dim() != h_->dim()) throw InvalidArgument("Propagator::evolve: dimension mismatch");
  if (t == 0.0) return v;
  return method_ == ExpmMethod::kDense ? evolve_dense(v, t) : evolve_chebyshev(v, t);
}

StateVector Propagator::evolve_dense(const StateVector& v, double t) const {
  Eigen::Map<const Eigen::VectorXcd> in(v.amplitudes().data(), static_cast<Eigen::Index>(v.dim()));
  Eigen::VectorXcd coeffs = eig_->vectors.adjoint() * in;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs[k] *= std::exp(cplx{0.0, -eig_->values[k] * t});
  const Eigen::VectorXcd out = eig_->vectors * coeffs;
  return StateVector(std::vector<cplx>(out.data(), out.data() + out.size()), v.basis());
}

StateVector Propagator::evolve_chebyshev(const StateVector& v, double t) const {
  constexpr double kMaxArgumentPerStep = 200.0;
  constexpr double kCoefficientCutoff = 1e-18;

  const double centre = 0.5 * (hi_ + lo_);
  const double half_width = 0.5 * (hi_ - lo_) * (1.0 + 1e-8);
  const std::size_t n = v.dim();
  std::vector<cplx> state(v.amplitudes().begin(), v.amplitudes().end());

  if (half_width <= 0.0) {
    const cplx phase = std::exp(cplx{0.0, -centre * t});
    for (auto& z : state) z *= phase;
    return StateVector(std::move(state), v.basis());
  }

  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) * half_width / kMaxArgumentPerStep)));
  const double dt = t / steps;
  const double x = half_width * dt;
  const int kmax = static_cast<int>(std::abs(x) + 10.0 * std::cbrt(std::abs(x)) + 30.0);
  const auto bessel = bessel_j_sequence(x, kmax);

  int order = kmax;
  while (order > 1 && std::abs(bessel[static_cast<std::size_t>(order)]) < kCoefficientCutoff) --order;

  std::vector<cplx> coeff(static_cast<std::size_t>(order) + 1);
  cplx minus_i_pow{1.0, 0.0};
  for (int k = 0; k <= order; ++k) {
    coeff[static_cast<std::size_t>(k)] = (k == 0 ? 1.0 : 2.0) * minus_i_pow * bessel[static_cast<std::size_t>(k)];
    minus_i_pow *= cplx{0.0, -1.0};
  }
  const cplx step_phase = std::exp(cplx{0.0, -centre * dt});

  std::vector<cplx> prev(n), curr(n), next(n), hv(n), acc(n);
  // scaled operator: (H - centre) / half_width
  auto apply_scaled = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
    h_->multiply_into(in, hv);
    for (std::size_t q = 0; q < n; ++q) out[q] = (hv[q] - centre * in[q]) / half_width;
  };

  for (int s = 0; s < steps; ++s) {
    prev = state;
    apply_scaled(prev, curr);
    for (std::size_t q = 0; q < n; ++q) acc[q] = coeff[0] * prev[q] + coeff[1] * curr[q];
    for (int k = 2; k <= order; ++k) {
      apply_scaled(curr, next);
      const cplx c = coeff[static_cast<std::size_t>(k)];
      for (std::size_t q = 0; q < n; ++q) {
        next[q] = 2.0 * next[q] - prev[q];
        acc[q] += c * next[q];
      }
      std::swap(prev, curr);
      std::swap(curr, next);
    }
    for (std::size_t q = 0; q < n; ++q) state[q] = step_phase * acc[q];
  }
  return StateVector(std::move(state), v.basis());
}

StateVector expm_apply(const SparseOperator& h, const StateVector& v, double t, ExpmMethod method) {
  if (!std::isfinite(t)) throw InvalidArgument("expm_apply: time must be finite");
  return Propagator(h, method).evolve(v, t);
}

}  // namespace mbcert

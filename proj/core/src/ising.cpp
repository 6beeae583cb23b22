#include "mbcert/ising.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <string>

namespace mbcert {

void IsingParams::validate() const {
  if (N < 4) throw InvalidArgument("IsingParams: N must be >= 4 (sites 2 and N-1 must be distinct)");
  if (!std::isfinite(B) || B < 0.0) throw InvalidArgument("IsingParams: B must be finite and >= 0");
  if (!std::isfinite(J) || J <= 0.0) throw InvalidArgument("IsingParams: J must be finite and > 0");
}

namespace {

void check_exact_size(const IsingParams& p, int max_spins) {
  if (p.N < 2) throw InvalidArgument("build_hamiltonian: need at least 2 spins");
  if (!std::isfinite(p.B) || !std::isfinite(p.J)) throw InvalidArgument("build_hamiltonian: non-finite B or J");
  if (p.N > max_spins) {
    throw InvalidArgument("build_hamiltonian: N = " + std::to_string(p.N) + " exceeds the exact-engine cap of " +
                          std::to_string(max_spins) +
                          " spins; use the domain-wall walk engine for longer chains");
  }
}

double coupling_energy(std::uint64_t x, int n, double J) {
  double e = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    const bool a = (x >> k) & 1U;
    const bool b = (x >> (k + 1)) & 1U;
    e += (a == b) ? -J : J;
  }
  return e;
}

}  // namespace

SparseOperator build_hamiltonian(const IsingParams& p, int max_spins) {
  check_exact_size(p, max_spins);
  const std::uint64_t dim = std::uint64_t{1} << p.N;
  std::vector<Triplet> e;
  e.reserve(dim * static_cast<std::uint64_t>(p.N + 1));
  for (std::uint64_t x = 0; x < dim; ++x) {
    e.push_back({x, x, coupling_energy(x, p.N, p.J)});
    if (p.B != 0.0)
      for (int k = 0; k < p.N; ++k) e.push_back({x ^ (std::uint64_t{1} << k), x, p.B});
  }
  return SparseOperator(dim, std::move(e), true);
}

SparseOperator build_coupling_hamiltonian(const IsingParams& p, int max_spins) {
  check_exact_size(p, max_spins);
  const std::uint64_t dim = std::uint64_t{1} << p.N;
  std::vector<Triplet> e;
  e.reserve(dim);
  for (std::uint64_t x = 0; x < dim; ++x) e.push_back({x, x, coupling_energy(x, p.N, p.J)});
  return SparseOperator(dim, std::move(e), true);
}

StateVector ground_state(const IsingParams& p) {
  if (p.N < 1 || p.N > 30) throw InvalidArgument("ground_state: unsupported chain length");
  return StateVector::basis_state(std::size_t{1} << p.N, 0, BasisTag::kFullChain);
}

// ---------------------------------------------------------------------------

DomainWallBasis::DomainWallBasis(int n_spins) : n_(n_spins) {
  if (n_spins < 4) throw InvalidArgument("DomainWallBasis: N must be >= 4");
  const auto n = static_cast<std::size_t>(n_spins);
  size_ = (n - 2) * (n - 1) / 2;
  // row_start_[i] = index of (i, i)
  row_start_.assign(n + 1, 0);
  std::size_t offset = 0;
  for (int i = 2; i <= n_spins - 1; ++i) {
    row_start_[static_cast<std::size_t>(i)] = offset;
    offset += static_cast<std::size_t>(n_spins - i);
  }
}

std::size_t DomainWallBasis::index_of(int i, int j) const {
  if (!contains(i, j)) {
    throw InvalidArgument("DomainWallBasis: pair (" + std::to_string(i) + "," + std::to_string(j) +
                          ") outside 2 <= i <= j <= N-1");
  }
  return row_start_[static_cast<std::size_t>(i)] + static_cast<std::size_t>(j - i);
}

std::pair<int, int> DomainWallBasis::pair_of(std::size_t k) const {
  if (k >= size_) throw InvalidArgument("DomainWallBasis::pair_of: index out of range");
  int i = 2;
  while (i < n_ - 1 && row_start_[static_cast<std::size_t>(i + 1)] <= k) ++i;
  return {i, i + static_cast<int>(k - row_start_[static_cast<std::size_t>(i)])};
}

std::uint64_t flip_mask(int i, int j) {
  if (i < 1 || j < i || j > 63) throw InvalidArgument("flip_mask: invalid site range");
  const std::uint64_t upto_j = (std::uint64_t{1} << j) - 1;
  const std::uint64_t below_i = (std::uint64_t{1} << (i - 1)) - 1;
  return upto_j & ~below_i;
}

StateVector excitation_state(const DomainWallBasis& basis, int i, int j) {
  if (!basis.contains(i, j)) {
    throw InvalidArgument("excitation_state: pair (" + std::to_string(i) + "," + std::to_string(j) +
                          ") outside 2 <= i <= j <= N-1");
  }
  if (basis.N() > 30) throw InvalidArgument("excitation_state: chain too long for a full state vector");
  return StateVector::basis_state(std::size_t{1} << basis.N(), flip_mask(i, j), BasisTag::kFullChain);
}

std::string bitstring(std::uint64_t index, int n_spins) {
  std::string s(static_cast<std::size_t>(n_spins), '0');
  for (int k = 0; k < n_spins; ++k)
    if ((index >> k) & 1U) s[static_cast<std::size_t>(k)] = '1';
  return s;
}

SparseOperator local_sigma_x(int n_spins, int site) {
  if (n_spins < 1 || n_spins > kExactMaxSpins + 8) throw InvalidArgument("local_sigma_x: unsupported chain length");
  if (site < 1 || site > n_spins) throw InvalidArgument("local_sigma_x: site out of range 1..N");
  return LocalOperator::pauli_x(site).embed(n_spins);
}

int chain_length_of(std::size_t dim) {
  if (dim == 0 || !std::has_single_bit(dim)) throw InvalidArgument("chain state dimension must be a power of two");
  return std::countr_zero(dim);
}

// ---------------------------------------------------------------------------
// LocalOperator

LocalOperator::LocalOperator(std::vector<int> sites, SparseOperator matrix)
    : sites_(std::move(sites)), matrix_(std::move(matrix)) {
  if (sites_.empty() || sites_.size() > 20) throw InvalidArgument("LocalOperator: need 1..20 sites");
  std::set<int> seen;
  for (int s : sites_) {
    if (s < 1 || s > 63) throw InvalidArgument("LocalOperator: site index must be in 1..63");
    if (!seen.insert(s).second) throw InvalidArgument("LocalOperator: repeated site");
    site_mask_ |= std::uint64_t{1} << (s - 1);
  }
  if (matrix_.dim() != (std::size_t{1} << sites_.size())) {
    throw InvalidArgument("LocalOperator: matrix dimension must be 2^(number of sites)");
  }
  columns_.resize(matrix_.dim());
  for (const auto& t : matrix_.entries()) columns_[t.col].push_back({t.row, t.value});
}

LocalOperator LocalOperator::pauli_x(int site) {
  return LocalOperator({site}, SparseOperator(2, {{0, 1, 1.0}, {1, 0, 1.0}}, true));
}

LocalOperator LocalOperator::projector_zero(int site) {
  return LocalOperator({site}, SparseOperator(2, {{0, 0, 1.0}}, true));
}

bool LocalOperator::touches(int site) const {
  return std::find(sites_.begin(), sites_.end(), site) != sites_.end();
}

LocalOperator LocalOperator::adjoint() const { return LocalOperator(sites_, matrix_.adjoint()); }

std::uint64_t LocalOperator::gather(std::uint64_t x) const {
  std::uint64_t local = 0;
  for (std::size_t q = 0; q < sites_.size(); ++q)
    local |= ((x >> (sites_[q] - 1)) & 1U) << q;
  return local;
}

std::uint64_t LocalOperator::scatter(std::uint64_t x, std::uint64_t local) const {
  std::uint64_t y = x & ~site_mask_;
  for (std::size_t q = 0; q < sites_.size(); ++q)
    y |= ((local >> q) & 1U) << (sites_[q] - 1);
  return y;
}

StateVector LocalOperator::apply(const StateVector& v) const {
  const int n = chain_length_of(v.dim());
  for (int s : sites_)
    if (s > n) throw InvalidArgument("LocalOperator::apply: site beyond chain length");
  std::vector<cplx> out(v.dim(), cplx{0.0, 0.0});
  for (std::uint64_t x = 0; x < v.dim(); ++x) {
    const cplx a = v[x];
    if (a == cplx{0.0, 0.0}) continue;
    for (const auto& e : columns_[gather(x)]) out[scatter(x, e.row)] += e.value * a;
  }
  return StateVector(std::move(out), v.basis());
}

SparseOperator LocalOperator::embed(int n_spins) const {
  for (int s : sites_)
    if (s > n_spins) throw InvalidArgument("LocalOperator::embed: site beyond chain length");
  const std::uint64_t dim = std::uint64_t{1} << n_spins;
  std::vector<Triplet> e;
  e.reserve(dim * std::max<std::size_t>(1, matrix_.nnz() / matrix_.dim() + 1));
  for (std::uint64_t x = 0; x < dim; ++x)
    for (const auto& c : columns_[gather(x)]) e.push_back({scatter(x, c.row), x, c.value});
  return SparseOperator(dim, std::move(e), matrix_.hermitian());
}

}  // namespace mbcert

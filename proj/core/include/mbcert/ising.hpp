#pragma once

/// @file
/// Open transverse-field Ising chain H = B sum_i X_i - J sum_i Z_i Z_{i+1}.
///
/// Conventions: spins are numbered 1..N and spin k is bit (k-1) of the basis
/// index; bit value 0 is the +1 eigenstate of Z.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mbcert/linalg.hpp"

namespace mbcert {

/// Default cap for the exact (2^N) engine.
inline constexpr int kExactMaxSpins = 16;

struct IsingParams {
  int N = 8;
  double B = 0.1;
  double J = 1.0;
  /// B/J at or below which the domain-wall walk is considered a valid model.
  double walk_validity_ratio = 0.1;

  /// Chain/protocol validation: N >= 4, B >= 0, J > 0, all finite.
  /// B = 0 is accepted as the frozen-dynamics limit.
  void validate() const;
  double ratio() const { return B / J; }
  bool walk_approximation_valid() const { return ratio() <= walk_validity_ratio; }
};

/// Full 2^N Hamiltonian. Accepts N >= 2 so that small closed forms can be
/// checked; rejects N > max_spins.
SparseOperator build_hamiltonian(const IsingParams& p, int max_spins = kExactMaxSpins);

/// Classical part -J sum Z_i Z_{i+1} only.
SparseOperator build_coupling_hamiltonian(const IsingParams& p, int max_spins = kExactMaxSpins);

/// Product state |0...0>, the small-B/J approximate ground state.
StateVector ground_state(const IsingParams& p);

/// Pairs (i, j), 2 <= i <= j <= N-1, in lexicographic order. Pair (i, j)
/// labels the chain state with spins i..j flipped.
class DomainWallBasis {
 public:
  explicit DomainWallBasis(int n_spins);

  int N() const { return n_; }
  std::size_t size() const { return size_; }
  bool contains(int i, int j) const { return 2 <= i && i <= j && j <= n_ - 1; }
  std::size_t index_of(int i, int j) const;
  std::pair<int, int> pair_of(std::size_t k) const;

 private:
  int n_;
  std::size_t size_;
  std::vector<std::size_t> row_start_;
};

/// Chain basis index with spins i..j flipped.
std::uint64_t flip_mask(int i, int j);

/// Full-chain state prod_{i<=k<=j} X_k |g>.
StateVector excitation_state(const DomainWallBasis& basis, int i, int j);

/// Spin-ordered bit string (spin 1 first) of a chain basis index.
std::string bitstring(std::uint64_t index, int n_spins);

/// X on one site of an N-spin chain.
SparseOperator local_sigma_x(int n_spins, int site);

/// Operator supported on a few chain sites, stored as a 2^k x 2^k matrix.
/// Bit q of the local index is spin sites[q].
class LocalOperator {
 public:
  LocalOperator(std::vector<int> sites, SparseOperator matrix);

  static LocalOperator pauli_x(int site);
  static LocalOperator projector_zero(int site);

  const std::vector<int>& sites() const { return sites_; }
  const SparseOperator& matrix() const { return matrix_; }
  bool touches(int site) const;

  LocalOperator adjoint() const;
  /// Applies to a chain state of dimension 2^N, N >= max(site).
  StateVector apply(const StateVector& v) const;
  SparseOperator embed(int n_spins) const;

 private:
  struct ColumnEntry {
    std::size_t row;
    cplx value;
  };

  std::uint64_t gather(std::uint64_t x) const;
  std::uint64_t scatter(std::uint64_t x, std::uint64_t local) const;

  std::vector<int> sites_;
  SparseOperator matrix_;
  std::uint64_t site_mask_ = 0;
  std::vector<std::vector<ColumnEntry>> columns_;
};

/// Number of spins N of a chain state with dimension 2^N.
int chain_length_of(std::size_t dim);

}  // namespace mbcert

#pragma once

/// @file
/// Exact state-vector execution of the two-ancilla entangling protocol
///
///   C_B(U2) V_tau C_A(U1) |+>_A |+>_B |psi>
///
/// followed by post-selection on a projector P. The joint ancilla+chain
/// state is never built: the four conditional chain branches
/// |psi_ij> = U2^j V U1^i |psi> carry all of the information.

#include <array>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mbcert/density_matrix.hpp"
#include "mbcert/ising.hpp"
#include "mbcert/linalg.hpp"

namespace mbcert {

/// Product of local operators on pairwise disjoint site sets.
class LocalProduct {
 public:
  LocalProduct() = default;
  explicit LocalProduct(std::vector<LocalOperator> factors);

  /// |0><0| on every site 1..N, i.e. |g><g| in factorized form.
  static LocalProduct ground_projector(int n_spins);

  const std::vector<LocalOperator>& factors() const { return factors_; }
  std::vector<int> support() const;
  bool empty() const { return factors_.empty(); }

  StateVector apply(const StateVector& v) const;
  SparseOperator embed(int n_spins) const;
  /// Each factor is Hermitian and idempotent.
  bool is_projector(double tolerance = tol::kHermitian) const;

 private:
  std::vector<LocalOperator> factors_;
};

/// Everything the protocol needs: Hamiltonian, the two local unitaries, the
/// post-selection projector and the evolution time. Validated on
/// construction; immutable afterwards.
class ProtocolSpec {
 public:
  ProtocolSpec(SparseOperator hamiltonian, LocalOperator u1, LocalOperator u2, LocalProduct projector, double tau,
               ExpmMethod method = ExpmMethod::kAuto);

  int n_spins() const { return n_spins_; }
  double tau() const { return tau_; }
  const LocalOperator& u1() const { return u1_; }
  const LocalOperator& u2() const { return u2_; }
  const LocalProduct& projector() const { return projector_; }
  const Propagator& propagator() const { return *propagator_; }

  /// V_tau v
  StateVector evolve(const StateVector& v) const { return propagator_->evolve(v, tau_); }
  /// V_tau^dagger v
  StateVector evolve_back(const StateVector& v) const { return propagator_->evolve(v, -tau_); }

 private:
  int n_spins_;
  LocalOperator u1_;
  LocalOperator u2_;
  LocalProduct projector_;
  double tau_;
  std::shared_ptr<const Propagator> propagator_;
};

/// Thrown when the post-selection probability is numerically zero.
class PostSelectionError : public std::runtime_error {
 public:
  PostSelectionError(double p_select, const Eigen::Matrix4cd& gram);
  double p_select() const { return p_select_; }
  /// G_{ab} = <psi_b|P|psi_a>, before normalization.
  const Eigen::Matrix4cd& gram() const { return gram_; }

 private:
  double p_select_;
  Eigen::Matrix4cd gram_;
};

struct ProtocolOutcome {
  AncillaDensityMatrix rho;
  double p_select;
  /// Indexed by 2i + j.
  std::array<StateVector, 4> branches;
};

/// Post-selected ancilla state rho_{ij,i'j'} = <psi_i'j'|P|psi_ij> / (4 p).
ProtocolOutcome run_protocol(const ProtocolSpec& spec, const StateVector& psi0);

/// X on site 2 for ancilla A, X on site N-1 for ancilla B, P = |g><g|.
ProtocolSpec make_toy_protocol(const IsingParams& p, double tau, int max_spins = kExactMaxSpins);

struct ToyProtocolResult {
  /// <e_{N-1,N-1}| V_tau |e_{2,2}>
  cplx r;
  /// rho_{11,00} / rho_{00,00}: the post-selected |11> weight relative to |00>.
  cplx r_tilde;
  AncillaDensityMatrix rho;
  double p_select;
};

ToyProtocolResult toy_protocol_state(const IsingParams& p, double tau);

struct PurityFidelity {
  double purity;
  /// Best overlap with (e^{i theta}|00> + r|11>)/sqrt(1+|r|^2).
  double fidelity;
  double abs_r;
  double theta;
};

PurityFidelity purity_and_fidelity(const AncillaDensityMatrix& rho);

}  // namespace mbcert

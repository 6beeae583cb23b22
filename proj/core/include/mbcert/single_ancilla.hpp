#pragma once

/// @file
/// One-ancilla reductions of the inequality's right-hand side and full
/// ancilla-pair tomography from chain-only expectation values.
///
/// Joint ancilla+chain vectors have dimension 2^(N+1); the ancilla is the
/// most significant bit, so amplitude (a, x) sits at index a * 2^N + x.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mbcert/density_matrix.hpp"
#include "mbcert/protocol.hpp"

namespace mbcert {

/// One operator application while preparing a joint state.
struct PipelineStep {
  std::string label;
  /// Sites touched; empty for the global propagator V.
  std::vector<int> support;
  bool ancilla_controlled;
};

struct AncillaChainState {
  StateVector state;
  std::vector<PipelineStep> pipeline;

  StateVector ancilla_block(int a) const;
};

enum class AncillaPauli { kX, kY, kZ };

/// <phi| sigma (x) O |phi> with O a product of local Hermitian factors.
double ancilla_chain_expectation(const AncillaChainState& phi, AncillaPauli sigma, const LocalProduct& chain_op);

/// (|0> V|psi> + |1> U2 V U1|psi>) / sqrt(2): one ancilla controls both unitaries.
AncillaChainState build_phi(const ProtocolSpec& spec, const StateVector& psi0);

/// <V+ P U2 V U1> = <sigma_x (x) P> + i <sigma_y (x) P> on |phi>.
cplx estimate_rhs_via_phi(const ProtocolSpec& spec, const StateVector& psi0);

/// P2 U2 = B_plus + i B_minus with both parts Hermitian; P_1E is the rest of
/// a factorized projector (empty when only the local part is known).
struct ObservableDecomposition {
  LocalOperator b_plus;
  LocalOperator b_minus;
  LocalProduct p_rest;

  /// max |B_plus + i B_minus - P2 U2| over entries.
  double reconstruction_error(const LocalOperator& p2, const LocalOperator& u2) const;
};

ObservableDecomposition decompose_projected_unitary(const LocalOperator& p2, const LocalOperator& u2);

/// Splits spec's projector as P2 (on U2's sites) times the remaining factors
/// and decomposes P2 U2. Throws if no factor structure separates U2's sites.
ObservableDecomposition decompose_for(const ProtocolSpec& spec);

/// (|0> V|psi> + |1> V U1|psi>) / sqrt(2): the ancilla only touches U1's sites.
AncillaChainState build_phi_prime(const ProtocolSpec& spec, const StateVector& psi0);

/// <sigma_x B+ - sigma_y B-> + i <sigma_x B- + sigma_y B+> on |phi'>, each
/// B extended by P_1E.
cplx estimate_rhs_via_phi_prime(const ProtocolSpec& spec, const StateVector& psi0,
                                const ObservableDecomposition& decomp);

/// <V+ P U2 V U1> evaluated directly on the chain.
cplx direct_rhs_amplitude(const ProtocolSpec& spec, const StateVector& psi0);

/// All sixteen rho_{ij,i'j'} from <(U1+)^i' V+ (U2+)^j' P U2^j V U1^i>.
AncillaDensityMatrix tomography_from_expectations(const ProtocolSpec& spec, const StateVector& psi0);

}  // namespace mbcert

#pragma once

/// @file
/// Two-qubit entanglement tests for the post-selected ancilla pair, and the
/// equivalent inequality written purely in terms of chain expectation values:
///
///   <V+ U2+ P U2 V> <U1+ V+ P V U1>  <  |<V+ P U2 V U1>|^2
///
/// The left factors are the (01,01) and (10,10) entries of the unnormalized
/// ancilla state; the right side is |(11,00)|^2. Holding the inequality is
/// the same as the 2x2 principal minor of the partial transpose on rows
/// {01, 10} being negative.

#include <array>

#include <Eigen/Dense>

#include "mbcert/density_matrix.hpp"
#include "mbcert/protocol.hpp"

namespace mbcert {

/// rho^T_B: (ij, i'j') -> (ij', i'j).
Eigen::Matrix4cd partial_transpose(const Eigen::Matrix4cd& rho);
Eigen::Matrix4cd partial_transpose(const AncillaDensityMatrix& rho);

struct PptResult {
  bool entangled;
  double min_eigenvalue;
  double negativity;
  std::array<double, 4> eigenvalues;
};

/// Peres-Horodecki: entangled iff the partial transpose has an eigenvalue
/// below -tol::kPsdFloor. Exact for two qubits.
PptResult is_entangled_ppt(const AncillaDensityMatrix& rho);

struct MinorResult {
  double minor;
  /// minor < -tol::kStrict. Sufficient, not necessary, for entanglement.
  bool entangled_sufficient;
};

/// rho^G_{01,01} rho^G_{10,10} - rho^G_{01,10} rho^G_{10,01}
MinorResult sylvester_minor(const AncillaDensityMatrix& rho);

struct InequalityReport {
  double lhs_term_1;  ///< <V+ U2+ P U2 V>
  double lhs_term_2;  ///< <U1+ V+ P V U1>
  double rhs;         ///< |<V+ P U2 V U1>|^2
  cplx rhs_amplitude; ///< <V+ P U2 V U1>
  double margin;      ///< rhs - lhs_term_1 * lhs_term_2
  bool violated;      ///< margin > tol::kStrict
};

/// Evaluates both sides from chain-only expectation values over psi0.
InequalityReport evaluate_inequality(const ProtocolSpec& spec, const StateVector& psi0);

}  // namespace mbcert

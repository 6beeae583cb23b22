#include "mbcert/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbcert {

// ---------------------------------------------------------------------------
// AncillaDensityMatrix

AncillaDensityMatrix AncillaDensityMatrix::from_matrix(const Eigen::Matrix4cd& m) {
  if (!m.allFinite()) throw InvalidArgument("AncillaDensityMatrix: non-finite entries");
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol::kHermitian) {
    std::ostringstream os;
    os << "AncillaDensityMatrix: not Hermitian (max |rho - rho^dagger| = " << asym << ")";
    throw InvalidArgument(os.str());
  }
  const cplx tr = m.trace();
  if (std::abs(tr - 1.0) > tol::kNorm) {
    std::ostringstream os;
    os << "AncillaDensityMatrix: trace " << tr << " differs from 1";
    throw InvalidArgument(os.str());
  }
  const auto ev = hermitian_eigenvalues(m);
  if (ev.front() < -tol::kPsdFloor) {
    std::ostringstream os;
    os << "AncillaDensityMatrix: negative eigenvalue " << ev.front();
    throw InvalidArgument(os.str());
  }
  return AncillaDensityMatrix(m);
}

AncillaDensityMatrix AncillaDensityMatrix::from_pure(const Eigen::Vector4cd& ket) {
  const double n = ket.norm();
  if (n == 0.0) throw InvalidArgument("AncillaDensityMatrix::from_pure: zero vector");
  const Eigen::Vector4cd k = ket / n;
  return from_matrix(k * k.adjoint());
}

AncillaDensityMatrix AncillaDensityMatrix::correlated_pair(cplx r, double theta) {
  Eigen::Vector4cd ket = Eigen::Vector4cd::Zero();
  ket(index(0, 0)) = std::exp(cplx{0.0, theta});
  ket(index(1, 1)) = r;
  return from_pure(ket);
}

AncillaDensityMatrix AncillaDensityMatrix::maximally_mixed() {
  return AncillaDensityMatrix(Eigen::Matrix4cd::Identity() / 4.0);
}

AncillaDensityMatrix AncillaDensityMatrix::werner(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("AncillaDensityMatrix::werner: w must be in [0, 1]");
  Eigen::Vector4cd bell = Eigen::Vector4cd::Zero();
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  return from_matrix(w * bell * bell.adjoint() + (1.0 - w) * Eigen::Matrix4cd::Identity() / 4.0);
}

// ---------------------------------------------------------------------------

Eigen::Matrix4cd partial_transpose(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int ip = 0; ip < 2; ++ip)
        for (int jp = 0; jp < 2; ++jp)
          out(2 * i + j, 2 * ip + jp) = rho(2 * i + jp, 2 * ip + j);
  return out;
}

Eigen::Matrix4cd partial_transpose(const AncillaDensityMatrix& rho) { return partial_transpose(rho.matrix()); }

PptResult is_entangled_ppt(const AncillaDensityMatrix& rho) {
  const auto ev = hermitian_eigenvalues(partial_transpose(rho));
  PptResult out{false, ev.front(), 0.0, {ev[0], ev[1], ev[2], ev[3]}};
  for (double e : ev)
    if (e < 0.0) out.negativity += -e;
  out.entangled = out.min_eigenvalue < -tol::kPsdFloor;
  if (!out.entangled) out.negativity = 0.0;
  return out;
}

MinorResult sylvester_minor(const AncillaDensityMatrix& rho) {
  const Eigen::Matrix4cd g = partial_transpose(rho);
  constexpr int k01 = AncillaDensityMatrix::index(0, 1);
  constexpr int k10 = AncillaDensityMatrix::index(1, 0);
  const double minor = (g(k01, k01) * g(k10, k10) - g(k01, k10) * g(k10, k01)).real();
  return MinorResult{minor, minor < -tol::kStrict};
}

InequalityReport evaluate_inequality(const ProtocolSpec& spec, const StateVector& psi0) {
  if (!psi0.is_normalized()) throw InvalidArgument("evaluate_inequality: psi0 is not normalized");
  const auto& P = spec.projector();

  // <V+ U2+ P U2 V>: probability of P after V then U2.
  const StateVector v_psi = spec.evolve(psi0);
  const StateVector u2_v_psi = spec.u2().apply(v_psi);
  const double lhs1 = inner(u2_v_psi, P.apply(u2_v_psi)).real();

  // <U1+ V+ P V U1>: probability of P after U1 then V.
  const StateVector v_u1_psi = spec.evolve(spec.u1().apply(psi0));
  const double lhs2 = inner(v_u1_psi, P.apply(v_u1_psi)).real();

  // <V+ P U2 V U1>
  const cplx amp = inner(v_psi, P.apply(spec.u2().apply(v_u1_psi)));
  const double rhs = std::norm(amp);

  InequalityReport r{lhs1, lhs2, rhs, amp, rhs - lhs1 * lhs2, false};
  r.violated = r.margin > tol::kStrict;
  return r;
}

}  // namespace mbcert

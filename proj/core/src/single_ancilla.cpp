#include "mbcert/single_ancilla.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mbcert {

namespace {

AncillaChainState join_blocks(const StateVector& block0, const StateVector& block1, std::vector<PipelineStep> steps) {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<cplx> joint;
  joint.reserve(2 * block0.dim());
  for (const auto& z : block0.amplitudes()) joint.push_back(s * z);
  for (const auto& z : block1.amplitudes()) joint.push_back(s * z);
  return AncillaChainState{StateVector(std::move(joint), BasisTag::kChainAncilla), std::move(steps)};
}

Eigen::Matrix2cd pauli(AncillaPauli which) {
  Eigen::Matrix2cd m;
  switch (which) {
    case AncillaPauli::kX: m << 0.0, 1.0, 1.0, 0.0; break;
    case AncillaPauli::kY: m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0; break;
    case AncillaPauli::kZ: m << 1.0, 0.0, 0.0, -1.0; break;
  }
  return m;
}

/// A product of factors supported inside `region`, as one operator on the
/// region's sites (in the region's order).
LocalOperator merge_into_region(const std::vector<int>& region, const std::vector<const LocalOperator*>& factors) {
  const int k = static_cast<int>(region.size());
  SparseOperator merged = SparseOperator::identity(std::size_t{1} << k);
  for (const auto* f : factors) {
    std::vector<int> remapped;
    for (int s : f->sites()) {
      const auto it = std::find(region.begin(), region.end(), s);
      remapped.push_back(static_cast<int>(it - region.begin()) + 1);
    }
    merged = multiply(LocalOperator(remapped, f->matrix()).embed(k), merged);
  }
  return LocalOperator(region, SparseOperator(merged.dim(), merged.entries(), true));
}

}  // namespace

StateVector AncillaChainState::ancilla_block(int a) const {
  if (a != 0 && a != 1) throw InvalidArgument("ancilla_block: ancilla value must be 0 or 1");
  const std::size_t half = state.dim() / 2;
  const auto amps = state.amplitudes();
  const auto first = amps.begin() + static_cast<std::ptrdiff_t>(a * half);
  return StateVector(std::vector<cplx>(first, first + static_cast<std::ptrdiff_t>(half)), BasisTag::kFullChain);
}

double ancilla_chain_expectation(const AncillaChainState& phi, AncillaPauli sigma, const LocalProduct& chain_op) {
  const Eigen::Matrix2cd s = pauli(sigma);
  const StateVector blocks[2] = {phi.ancilla_block(0), phi.ancilla_block(1)};
  const StateVector applied[2] = {chain_op.apply(blocks[0]), chain_op.apply(blocks[1])};
  cplx total{0.0, 0.0};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (s(a, b) != cplx{0.0, 0.0}) total += s(a, b) * inner(blocks[a], applied[b]);
  return total.real();
}

AncillaChainState build_phi(const ProtocolSpec& spec, const StateVector& psi0) {
  const StateVector chain = psi0.retagged(BasisTag::kFullChain);
  const StateVector block0 = spec.evolve(chain);
  const StateVector block1 = spec.u2().apply(spec.evolve(spec.u1().apply(chain)));
  return join_blocks(block0, block1,
                     {{"C(U1)", spec.u1().sites(), true}, {"V", {}, false}, {"C(U2)", spec.u2().sites(), true}});
}

cplx estimate_rhs_via_phi(const ProtocolSpec& spec, const StateVector& psi0) {
  const auto phi = build_phi(spec, psi0);
  return {ancilla_chain_expectation(phi, AncillaPauli::kX, spec.projector()),
          ancilla_chain_expectation(phi, AncillaPauli::kY, spec.projector())};
}

double ObservableDecomposition::reconstruction_error(const LocalOperator& p2, const LocalOperator& u2) const {
  const Eigen::MatrixXcd target = p2.matrix().to_dense() * u2.matrix().to_dense();
  const Eigen::MatrixXcd rebuilt = b_plus.matrix().to_dense() + cplx{0.0, 1.0} * b_minus.matrix().to_dense();
  return (rebuilt - target).cwiseAbs().maxCoeff();
}

ObservableDecomposition decompose_projected_unitary(const LocalOperator& p2, const LocalOperator& u2) {
  if (p2.sites() != u2.sites()) throw InvalidArgument("decompose_projected_unitary: P2 and U2 act on different sites");
  const Eigen::MatrixXcd m = p2.matrix().to_dense() * u2.matrix().to_dense();
  const Eigen::MatrixXcd plus = 0.5 * (m + m.adjoint());
  const Eigen::MatrixXcd minus = (m - m.adjoint()) / cplx{0.0, 2.0};
  return ObservableDecomposition{LocalOperator(u2.sites(), SparseOperator::from_dense(plus, true)),
                                 LocalOperator(u2.sites(), SparseOperator::from_dense(minus, true)), LocalProduct{}};
}

ObservableDecomposition decompose_for(const ProtocolSpec& spec) {
  const auto& region = spec.u2().sites();
  const std::set<int> region_set(region.begin(), region.end());

  std::vector<const LocalOperator*> inside;
  std::vector<LocalOperator> rest;
  for (const auto& f : spec.projector().factors()) {
    const auto n_in = std::count_if(f.sites().begin(), f.sites().end(), [&](int s) { return region_set.count(s) > 0; });
    if (n_in == 0) {
      rest.push_back(f);
    } else if (n_in == static_cast<std::ptrdiff_t>(f.sites().size())) {
      inside.push_back(&f);
    } else {
      throw InvalidArgument(
          "decompose_for: projector does not factorize as P2 (x) P_1E across U2's sites; a factor straddles the "
          "boundary of U2's region, so the single-controlled-unitary measurement is unavailable");
    }
  }
  const LocalOperator p2 = merge_into_region(region, inside);
  auto d = decompose_projected_unitary(p2, spec.u2());
  d.p_rest = LocalProduct(std::move(rest));
  return d;
}

AncillaChainState build_phi_prime(const ProtocolSpec& spec, const StateVector& psi0) {
  const StateVector chain = psi0.retagged(BasisTag::kFullChain);
  const StateVector block0 = spec.evolve(chain);
  const StateVector block1 = spec.evolve(spec.u1().apply(chain));
  return join_blocks(block0, block1, {{"C(U1)", spec.u1().sites(), true}, {"V", {}, false}});
}

cplx estimate_rhs_via_phi_prime(const ProtocolSpec& spec, const StateVector& psi0,
                                const ObservableDecomposition& decomp) {
  if (decomp.b_plus.sites() != spec.u2().sites()) {
    throw InvalidArgument("estimate_rhs_via_phi_prime: decomposition is not on U2's sites");
  }
  const auto phi = build_phi_prime(spec, psi0);

  auto extended = [&](const LocalOperator& b) {
    std::vector<LocalOperator> f{b};
    f.insert(f.end(), decomp.p_rest.factors().begin(), decomp.p_rest.factors().end());
    return LocalProduct(std::move(f));
  };
  const LocalProduct plus = extended(decomp.b_plus);
  const LocalProduct minus = extended(decomp.b_minus);

  const double x_plus = ancilla_chain_expectation(phi, AncillaPauli::kX, plus);
  const double y_plus = ancilla_chain_expectation(phi, AncillaPauli::kY, plus);
  const double x_minus = ancilla_chain_expectation(phi, AncillaPauli::kX, minus);
  const double y_minus = ancilla_chain_expectation(phi, AncillaPauli::kY, minus);
  return {x_plus - y_minus, x_minus + y_plus};
}

cplx direct_rhs_amplitude(const ProtocolSpec& spec, const StateVector& psi0) {
  const StateVector right = spec.evolve(spec.u1().apply(psi0));
  return inner(spec.evolve(psi0), spec.projector().apply(spec.u2().apply(right)));
}

AncillaDensityMatrix tomography_from_expectations(const ProtocolSpec& spec, const StateVector& psi0) {
  if (!psi0.is_normalized()) throw InvalidArgument("tomography_from_expectations: psi0 is not normalized");
  const LocalOperator u1_dag = spec.u1().adjoint();
  const LocalOperator u2_dag = spec.u2().adjoint();

  Eigen::Matrix4cd raw;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int ip = 0; ip < 2; ++ip)
        for (int jp = 0; jp < 2; ++jp) {
          // (U1+)^i' V+ (U2+)^j' P U2^j V U1^i |psi>
          StateVector w = i ? spec.u1().apply(psi0) : psi0;
          w = spec.evolve(w);
          if (j) w = spec.u2().apply(w);
          w = spec.projector().apply(w);
          if (jp) w = u2_dag.apply(w);
          w = spec.evolve_back(w);
          if (ip) w = u1_dag.apply(w);
          raw(2 * i + j, 2 * ip + jp) = inner(psi0, w);
        }

  const double p = 0.25 * raw.trace().real();
  if (p < tol::kPostSelection) throw PostSelectionError(p, raw);
  return AncillaDensityMatrix::from_matrix(raw / (4.0 * p));
}

}  // namespace mbcert

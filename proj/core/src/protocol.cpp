#include "mbcert/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <sstream>

namespace mbcert {

// ---------------------------------------------------------------------------
// LocalProduct

LocalProduct::LocalProduct(std::vector<LocalOperator> factors) : factors_(std::move(factors)) {
  std::set<int> seen;
  for (const auto& f : factors_)
    for (int s : f.sites())
      if (!seen.insert(s).second) throw InvalidArgument("LocalProduct: factor supports must be disjoint");
}

LocalProduct LocalProduct::ground_projector(int n_spins) {
  if (n_spins < 1) throw InvalidArgument("LocalProduct::ground_projector: need at least one spin");
  std::vector<LocalOperator> f;
  f.reserve(static_cast<std::size_t>(n_spins));
  for (int s = 1; s <= n_spins; ++s) f.push_back(LocalOperator::projector_zero(s));
  return LocalProduct(std::move(f));
}

std::vector<int> LocalProduct::support() const {
  std::vector<int> s;
  for (const auto& f : factors_) s.insert(s.end(), f.sites().begin(), f.sites().end());
  std::sort(s.begin(), s.end());
  return s;
}

StateVector LocalProduct::apply(const StateVector& v) const {
  StateVector out = v;
  for (const auto& f : factors_) out = f.apply(out);
  return out;
}

SparseOperator LocalProduct::embed(int n_spins) const {
  SparseOperator out = SparseOperator::identity(std::size_t{1} << n_spins);
  for (const auto& f : factors_) out = multiply(f.embed(n_spins), out);
  return out;
}

bool LocalProduct::is_projector(double tolerance) const {
  return std::all_of(factors_.begin(), factors_.end(),
                     [&](const LocalOperator& f) { return mbcert::is_projector(f.matrix(), tolerance); });
}

// ---------------------------------------------------------------------------
// ProtocolSpec

ProtocolSpec::ProtocolSpec(SparseOperator hamiltonian, LocalOperator u1, LocalOperator u2, LocalProduct projector,
                           double tau, ExpmMethod method)
    : n_spins_(chain_length_of(hamiltonian.dim())),
      u1_(std::move(u1)),
      u2_(std::move(u2)),
      projector_(std::move(projector)),
      tau_(tau) {
  if (!std::isfinite(tau_)) throw InvalidArgument("ProtocolSpec: tau must be finite");
  if (!hamiltonian.is_hermitian_within(tol::kHermitian)) throw InvalidArgument("ProtocolSpec: H is not Hermitian");
  if (!is_unitary(u1_.matrix())) throw InvalidArgument("ProtocolSpec: U1 is not unitary");
  if (!is_unitary(u2_.matrix())) throw InvalidArgument("ProtocolSpec: U2 is not unitary");
  if (!projector_.is_projector()) throw InvalidArgument("ProtocolSpec: P is not a Hermitian idempotent");
  auto check_sites = [&](const std::vector<int>& sites, const char* what) {
    for (int s : sites)
      if (s > n_spins_) throw InvalidArgument(std::string("ProtocolSpec: ") + what + " acts beyond the chain");
  };
  check_sites(u1_.sites(), "U1");
  check_sites(u2_.sites(), "U2");
  check_sites(projector_.support(), "P");
  propagator_ = std::make_shared<const Propagator>(std::move(hamiltonian), method);
}

PostSelectionError::PostSelectionError(double p_select, const Eigen::Matrix4cd& gram)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "post-selection impossible: p_select = " << p_select << "; raw Gram matrix <psi_b|P|psi_a> =\n"
           << gram;
        return os.str();
      }()),
      p_select_(p_select),
      gram_(gram) {}

ProtocolOutcome run_protocol(const ProtocolSpec& spec, const StateVector& psi0) {
  if (psi0.dim() != (std::size_t{1} << spec.n_spins())) throw InvalidArgument("run_protocol: psi0 dimension mismatch");
  if (!psi0.is_normalized()) throw InvalidArgument("run_protocol: psi0 is not normalized");

  // V|psi> and V U1|psi> are independent propagations.
  auto excited = std::async(std::launch::async, [&] { return spec.evolve(spec.u1().apply(psi0)); });
  const StateVector ground_branch = spec.evolve(psi0);
  const StateVector excited_branch = excited.get();

  std::array<StateVector, 4> branches{ground_branch, spec.u2().apply(ground_branch), excited_branch,
                                      spec.u2().apply(excited_branch)};
  std::array<StateVector, 4> projected;
  for (std::size_t a = 0; a < 4; ++a) projected[a] = spec.projector().apply(branches[a]);

  Eigen::Matrix4cd gram;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      gram(a, b) = inner(branches[static_cast<std::size_t>(b)], projected[static_cast<std::size_t>(a)]);

  const double p_select = 0.25 * gram.trace().real();
  if (p_select < tol::kPostSelection) throw PostSelectionError(p_select, gram);

  const Eigen::Matrix4cd rho = gram / (4.0 * p_select);
  return ProtocolOutcome{AncillaDensityMatrix::from_matrix(rho), std::min(1.0, p_select), std::move(branches)};
}

ProtocolSpec make_toy_protocol(const IsingParams& p, double tau, int max_spins) {
  p.validate();
  return ProtocolSpec(build_hamiltonian(p, max_spins), LocalOperator::pauli_x(2), LocalOperator::pauli_x(p.N - 1),
                      LocalProduct::ground_projector(p.N), tau);
}

ToyProtocolResult toy_protocol_state(const IsingParams& p, double tau) {
  const auto spec = make_toy_protocol(p, tau);
  const DomainWallBasis basis(p.N);
  const StateVector g = ground_state(p);
  const auto outcome = run_protocol(spec, g);

  const cplx r = inner(excitation_state(basis, p.N - 1, p.N - 1), spec.evolve(excitation_state(basis, 2, 2)));
  const cplx diag = outcome.rho(0, 0, 0, 0);
  const cplx r_tilde = std::abs(diag) > 0.0 ? outcome.rho(1, 1, 0, 0) / diag : cplx{0.0, 0.0};
  return ToyProtocolResult{r, r_tilde, outcome.rho, outcome.p_select};
}

PurityFidelity purity_and_fidelity(const AncillaDensityMatrix& rho) {
  const auto& m = rho.matrix();
  const double purity = (m * m).trace().real();

  const double a = m(0, 0).real();
  const double d = m(3, 3).real();
  const cplx c = m(3, 0);
  const double lambda = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + std::norm(c));

  cplx alpha, beta;
  if (std::abs(c) > 0.0) {
    alpha = std::conj(c);
    beta = lambda - a;
  } else if (a >= d) {
    alpha = 1.0;
    beta = 0.0;
  } else {
    alpha = 0.0;
    beta = 1.0;
  }
  const double abs_r = std::abs(alpha) > 0.0 ? std::abs(beta) / std::abs(alpha) : INFINITY;
  const double theta = std::arg(alpha) - std::arg(beta);
  return PurityFidelity{purity, lambda, abs_r, theta};
}

}  // namespace mbcert

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mbcert/protocol.hpp"
#include "mbcert/walk.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace mbcert;
using testing_support::joint_oracle;

namespace {

LocalOperator identity_on(int site) { return LocalOperator({site}, SparseOperator::identity(2)); }

double max_dev(const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b) { return (a - b).cwiseAbs().maxCoeff(); }

void expect_valid_outcome(const ProtocolOutcome& out) {
  const auto& m = out.rho.matrix();
  EXPECT_NEAR(out.rho.trace(), 1.0, 1e-10);
  EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GE(hermitian_eigenvalues(m).front(), -1e-9);
  EXPECT_GE(out.p_select, 0.0);
  EXPECT_LE(out.p_select, 1.0);
}

double walk_tau0(const IsingParams& p) { return walk_peak(p).tau; }

}  // namespace

TEST(LocalProduct, GroundProjector) {
  const auto p = LocalProduct::ground_projector(5);
  EXPECT_EQ(p.factors().size(), 5u);
  EXPECT_TRUE(p.is_projector());
  const auto dense = p.embed(5).to_dense();
  Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(32, 32);
  ref(0, 0) = 1.0;
  EXPECT_EQ((dense - ref).cwiseAbs().maxCoeff(), 0.0);
  const auto support = p.support();
  EXPECT_EQ(support, (std::vector<int>{1, 2, 3, 4, 5}));
}

TEST(LocalProduct, RejectsOverlappingFactors) {
  EXPECT_THROW(LocalProduct({LocalOperator::projector_zero(2), LocalOperator::pauli_x(2)}), InvalidArgument);
}

TEST(ProtocolSpec, ValidatesInputs) {
  const IsingParams p{5, 0.1, 1.0};
  const auto h = build_hamiltonian(p);
  const auto x2 = LocalOperator::pauli_x(2);
  const auto x4 = LocalOperator::pauli_x(4);
  const auto proj = LocalProduct::ground_projector(5);
  EXPECT_NO_THROW(ProtocolSpec(h, x2, x4, proj, 1.0));
  EXPECT_THROW(ProtocolSpec(SparseOperator(32, {{0, 1, 1.0}}), x2, x4, proj, 1.0), InvalidArgument);
  EXPECT_THROW(ProtocolSpec(h, LocalOperator({2}, SparseOperator(2, {{0, 0, 2.0}, {1, 1, 1.0}})), x4, proj, 1.0),
               InvalidArgument);
  EXPECT_THROW(ProtocolSpec(h, x2, x4, LocalProduct({LocalOperator::pauli_x(1)}), 1.0), InvalidArgument);
  EXPECT_THROW(ProtocolSpec(h, LocalOperator::pauli_x(6), x4, proj, 1.0), InvalidArgument);
  EXPECT_THROW(ProtocolSpec(h, x2, x4, LocalProduct::ground_projector(6), 1.0), InvalidArgument);
  EXPECT_THROW(ProtocolSpec(h, x2, x4, proj, NAN), InvalidArgument);
}

TEST(RunProtocol, IdentityControlsGiveProductPlusState) {
  const IsingParams p{6, 0.3, 1.0};
  const ProtocolSpec spec(build_hamiltonian(p), identity_on(2), identity_on(5), LocalProduct::ground_projector(6), 3.7);
  const auto g = ground_state(p);
  const auto out = run_protocol(spec, g);
  expect_valid_outcome(out);
  EXPECT_LT(max_dev(out.rho.matrix(), Eigen::Matrix4cd::Constant(0.25)), 1e-12);
  EXPECT_NEAR(out.p_select, std::norm(inner(g, spec.evolve(g))), 1e-12);
}

TEST(RunProtocol, ToyAtTimeZeroKeepsOnlyUnflippedBranch) {
  const IsingParams p{6, 0.1, 1.0};
  const auto out = run_protocol(make_toy_protocol(p, 0.0), ground_state(p));
  Eigen::Matrix4cd ref = Eigen::Matrix4cd::Zero();
  ref(0, 0) = 1.0;
  EXPECT_LT(max_dev(out.rho.matrix(), ref), 1e-14);
  EXPECT_NEAR(out.p_select, 0.25, 1e-14);
}

TEST(RunProtocol, BranchesFollowDefinition) {
  const IsingParams p{5, 0.2, 1.0};
  const auto spec = make_toy_protocol(p, 2.0);
  const auto g = ground_state(p);
  const auto out = run_protocol(spec, g);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      StateVector w = i ? spec.u1().apply(g) : g;
      w = spec.evolve(w);
      if (j) w = spec.u2().apply(w);
      EXPECT_LT(max_abs_deviation(out.branches[static_cast<std::size_t>(2 * i + j)], w), 1e-14);
    }
  double p_sum = 0.0;
  for (const auto& b : out.branches) p_sum += inner(b, spec.projector().apply(b)).real();
  EXPECT_NEAR(out.p_select, 0.25 * p_sum, 1e-14);
}

TEST(RunProtocol, IdentityProjectorKeepsQuarterPopulations) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    auto inst = testing_support::random_instance(4, rng);
    const ProtocolSpec spec(inst.spec.propagator().hamiltonian(), inst.spec.u1(), inst.spec.u2(),
                            LocalProduct({identity_on(1)}), inst.spec.tau());
    const auto out = run_protocol(spec, inst.psi0);
    EXPECT_NEAR(out.p_select, 1.0, 1e-12);
    for (int a = 0; a < 4; ++a) EXPECT_NEAR(out.rho.matrix()(a, a).real(), 0.25, 1e-12);
  }
}

TEST(RunProtocol, MatchesJointSpaceOracleForToyModel) {
  for (int n = 4; n <= 8; ++n) {
    const IsingParams p{n, 0.1, 1.0};
    for (double tau : {0.0, 7.0, walk_tau0(p)}) {
      const auto spec = make_toy_protocol(p, tau);
      const auto g = ground_state(p);
      const auto out = run_protocol(spec, g);
      const auto ref = joint_oracle(spec, g);
      EXPECT_LT(max_dev(out.rho.matrix(), ref.rho), 1e-10) << "N=" << n << " tau=" << tau;
      EXPECT_NEAR(out.p_select, ref.p_select, 1e-12);
      expect_valid_outcome(out);
    }
  }
}

TEST(RunProtocol, MatchesJointSpaceOracleForRandomInstances) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = testing_support::random_instance(5, rng, trial % 2 == 0);
    const auto out = run_protocol(inst.spec, inst.psi0);
    const auto ref = joint_oracle(inst.spec, inst.psi0);
    EXPECT_LT(max_dev(out.rho.matrix(), ref.rho), 1e-10);
    expect_valid_outcome(out);
  }
}

TEST(RunProtocol, ImpossiblePostSelectionCarriesGram) {
  const IsingParams p{4, 0.0, 1.0};
  const LocalOperator p_one({1}, SparseOperator(2, {{1, 1, 1.0}}, true));
  const ProtocolSpec spec(build_hamiltonian(p), identity_on(2), identity_on(3), LocalProduct({p_one}), 1.0);
  try {
    run_protocol(spec, ground_state(p));
    FAIL() << "expected PostSelectionError";
  } catch (const PostSelectionError& e) {
    EXPECT_EQ(e.p_select(), 0.0);
    EXPECT_EQ(e.gram().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(RunProtocol, RejectsBadInitialState) {
  const IsingParams p{4, 0.1, 1.0};
  const auto spec = make_toy_protocol(p, 1.0);
  EXPECT_THROW(run_protocol(spec, ground_state(p).scaled(2.0)), InvalidArgument);
  EXPECT_THROW(run_protocol(spec, StateVector::basis_state(8, 0)), InvalidArgument);
}

TEST(ToyProtocol, FrozenDynamics) {
  const IsingParams p{6, 0.0, 1.0};
  const auto res = toy_protocol_state(p, 5.0);
  EXPECT_EQ(res.r, cplx(0.0, 0.0));
  EXPECT_NEAR(res.rho.matrix()(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(res.p_select, 0.25, 1e-14);
}

TEST(ToyProtocol, N8PeakStateIsCorrelatedPair) {
  const IsingParams p{8, 0.1, 1.0};
  const auto peak = walk_peak(p);
  const auto res = toy_protocol_state(p, peak.tau);
  const double rt = std::abs(res.r_tilde);
  EXPECT_NEAR(rt, peak.value, 0.25 * peak.value);
  EXPECT_NEAR(res.p_select, (1.0 + rt * rt) / 4.0, 0.05 * (1.0 + rt * rt) / 4.0);
  EXPECT_NEAR(std::abs(res.rho(0, 0, 1, 1)), rt / (1.0 + rt * rt), 0.02);
  const auto pf = purity_and_fidelity(res.rho);
  EXPECT_GE(pf.fidelity, 0.8);
  EXPECT_LE(pf.fidelity, 1.0 + 1e-12);
}

TEST(ToyProtocol, N10WeakFieldTracksWalk) {
  const IsingParams p{10, 0.05, 1.0};
  const auto peak = walk_peak(p);
  const auto res = toy_protocol_state(p, peak.tau);
  EXPECT_NEAR(std::abs(res.r), peak.value, 0.25 * peak.value);
}

TEST(PurityFidelity, ClosedForms) {
  const auto pure00 = purity_and_fidelity(AncillaDensityMatrix::correlated_pair(0.0));
  EXPECT_NEAR(pure00.purity, 1.0, 1e-15);
  EXPECT_NEAR(pure00.fidelity, 1.0, 1e-15);
  EXPECT_NEAR(pure00.abs_r, 0.0, 1e-15);

  EXPECT_NEAR(purity_and_fidelity(AncillaDensityMatrix::maximally_mixed()).purity, 0.25, 1e-15);

  const cplx r = std::polar(0.6, 0.4);
  const auto pair = purity_and_fidelity(AncillaDensityMatrix::correlated_pair(r, 1.1));
  EXPECT_NEAR(pair.fidelity, 1.0, 1e-12);
  EXPECT_NEAR(pair.abs_r, 0.6, 1e-12);
  EXPECT_NEAR(std::remainder(pair.theta - (1.1 - 0.4), 2.0 * M_PI), 0.0, 1e-12);
}

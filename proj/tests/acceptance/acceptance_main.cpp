// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mbcert/entanglement.hpp"
#include "mbcert/harness.hpp"
#include "mbcert/protocol.hpp"
#include "mbcert/single_ancilla.hpp"
#include "mbcert/walk.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace mbcert;

namespace {

// Pinned tolerances.
constexpr double kInvSlope = 0.08, kInvSlopeTol = 0.02;
constexpr double kInvIntercept = 0.55, kInvInterceptTol = 0.4;
constexpr double kTimeSlope = 0.52, kTimeSlopeTol = 0.08;
constexpr double kTimeIntercept = 2.02, kTimeInterceptTol = 1.0;
constexpr double kMinRSquared = 0.98;
constexpr double kPSelectRelTol = 0.05;
constexpr int kEquivalenceInstances = 50;
constexpr double kMinPSelect = 1e-6;
constexpr double kBranchOracleTol = 1e-10;
constexpr double kRhsTol = 1e-10;
constexpr int kFactorizingInstances = 20;
constexpr double kMinNegativity = 0.01;
constexpr double kNormTol = 1e-9;
constexpr double kTraceTol = 1e-10;
constexpr double kHeatmapTol = 1e-9;
constexpr double kFrontThreshold = 1e-3;

const std::vector<int> kSweepN{8, 16, 24, 32, 40, 48};

struct Gate {
  int failures = 0;
  void report(bool pass, const std::string& name, const std::string& detail) {
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

/// Worst deviations seen anywhere in the run, for the normalization line.
struct NormLedger {
  double norm = 0.0;
  double trace = 0.0;
  double heatmap = 0.0;
  int propagations = 0;
  int density_matrices = 0;
  int heatmaps = 0;

  void state(const StateVector& v) {
    norm = std::max(norm, std::abs(v.norm() - 1.0));
    ++propagations;
  }
  void rho(const AncillaDensityMatrix& r) {
    trace = std::max(trace, std::abs(r.trace() - 1.0));
    ++density_matrices;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within(double value, double centre, double tol) { return std::abs(value - centre) <= tol; }

ProtocolOutcome checked_run(const ProtocolSpec& spec, const StateVector& psi0, NormLedger& ledger) {
  auto out = run_protocol(spec, psi0);
  for (const auto& b : out.branches) ledger.state(b);
  ledger.rho(out.rho);
  return out;
}

void scaling(Gate& gate, NormLedger& ledger) {
  SweepOptions opt;  // B = 1, J = 10, window 1.5 N / B, dtau 0.05 / B
  const auto peaks = peak_scaling_sweep(kSweepN, opt);
  std::vector<std::pair<double, double>> inv, time;
  for (const auto& r : peaks) {
    inv.emplace_back(r.N, 1.0 / r.abs_r_peak);
    time.emplace_back(r.N, r.tau_peak * opt.B);
    ledger.norm = std::max(ledger.norm, r.max_norm_drift);
    ++ledger.propagations;
  }
  const auto a = linear_fit(inv);
  gate.report(within(a.slope, kInvSlope, kInvSlopeTol) && within(a.intercept, kInvIntercept, kInvInterceptTol) &&
                  a.r_squared >= kMinRSquared,
              "inverse_peak_amplitude_scaling",
              fmt("1/|r| = %.4f N + %.4f, r^2 = %.5f (want slope %.2f+-%.2f, intercept %.2f+-%.2f, r^2 >= %.2f)",
                  a.slope, a.intercept, a.r_squared, kInvSlope, kInvSlopeTol, kInvIntercept, kInvInterceptTol,
                  kMinRSquared));

  const auto b = linear_fit(time);
  gate.report(within(b.slope, kTimeSlope, kTimeSlopeTol) && within(b.intercept, kTimeIntercept, kTimeInterceptTol) &&
                  b.r_squared >= kMinRSquared,
              "peak_time_scaling",
              fmt("tau0 B = %.4f N + %.4f, r^2 = %.5f (want slope %.2f+-%.2f, intercept %.2f+-%.2f, r^2 >= %.2f)",
                  b.slope, b.intercept, b.r_squared, kTimeSlope, kTimeSlopeTol, kTimeIntercept, kTimeInterceptTol,
                  kMinRSquared));
}

void post_selection(Gate& gate, NormLedger& ledger) {
  const IsingParams p{8, 0.1, 1.0};
  const double tau0 = walk_peak(p).tau;
  const auto toy = toy_protocol_state(p, tau0);
  ledger.rho(toy.rho);
  const double rt = std::abs(toy.r_tilde);
  const double expected = (1.0 + rt * rt) / 4.0;
  const double rel = std::abs(toy.p_select - expected) / expected;
  gate.report(rel <= kPSelectRelTol, "post_selection_probability",
              fmt("N=8 B/J=0.1 tau0 B=%.4f: p_select=%.6f, (1+|r~|^2)/4=%.6f, rel. dev %.4f (want <= %.2f)",
                  tau0 * p.B, toy.p_select, expected, rel, kPSelectRelTol));
}

void equivalence(Gate& gate, NormLedger& ledger) {
  std::mt19937_64 rng(20240601);
  int tested = 0, agree = 0, violated = 0, skipped = 0;
  while (tested < kEquivalenceInstances) {
    const auto inst = testing_support::random_instance(6, rng);
    const auto out = checked_run(inst.spec, inst.psi0, ledger);
    if (out.p_select <= kMinPSelect) {
      ++skipped;
      continue;
    }
    const auto rep = evaluate_inequality(inst.spec, inst.psi0);
    const bool minor_flag = sylvester_minor(out.rho).entangled_sufficient;
    agree += rep.violated == minor_flag ? 1 : 0;
    violated += rep.violated ? 1 : 0;
    ++tested;
  }
  gate.report(agree == tested, "inequality_minor_equivalence",
              fmt("%d/%d random 6-spin instances agree (%d violated, %d skipped for p_select <= %g)", agree, tested,
                  violated, skipped, kMinPSelect));
}

void branch_oracle(Gate& gate, NormLedger& ledger) {
  double worst = 0.0;
  int cases = 0;
  for (int n = 4; n <= 8; ++n) {
    const IsingParams p{n, 0.1, 1.0};
    const double tau0 = walk_peak(p).tau;
    for (double tau : {0.0, 0.37 * tau0, tau0, 2.1 * tau0}) {
      const auto spec = make_toy_protocol(p, tau);
      const auto g = ground_state(p);
      const auto out = checked_run(spec, g, ledger);
      const auto ref = testing_support::joint_oracle(spec, g);
      worst = std::max(worst, (out.rho.matrix() - ref.rho).cwiseAbs().maxCoeff());
      ++cases;
    }
  }
  gate.report(worst <= kBranchOracleTol, "branch_vs_joint_oracle",
              fmt("%d toy instances N=4..8, max |rho_branch - rho_joint| = %.3e (want <= %.0e)", cases, worst,
                  kBranchOracleTol));
}

void single_ancilla(Gate& gate, NormLedger& ledger) {
  double worst_phi = 0.0, worst_prime = 0.0;
  auto check = [&](const ProtocolSpec& spec, const StateVector& psi0) {
    const cplx direct = direct_rhs_amplitude(spec, psi0);
    const auto phi = build_phi(spec, psi0);
    const auto phi_prime = build_phi_prime(spec, psi0);
    ledger.state(phi.state);
    ledger.state(phi_prime.state);
    worst_phi = std::max(worst_phi, std::abs(estimate_rhs_via_phi(spec, psi0) - direct));
    worst_prime = std::max(worst_prime, std::abs(estimate_rhs_via_phi_prime(spec, psi0, decompose_for(spec)) - direct));
  };
  const IsingParams p{8, 0.1, 1.0};
  check(make_toy_protocol(p, walk_peak(p).tau), ground_state(p));
  std::mt19937_64 rng(314159);
  for (int k = 0; k < kFactorizingInstances; ++k) {
    const auto inst = testing_support::random_instance(6, rng, true);
    check(inst.spec, inst.psi0);
  }
  gate.report(worst_phi <= kRhsTol && worst_prime <= kRhsTol, "single_ancilla_reductions",
              fmt("toy N=8 + %d factorizing instances: max dev phi %.3e, phi' %.3e (want <= %.0e)",
                  kFactorizingInstances, worst_phi, worst_prime, kRhsTol));
}

void walk_convergence(Gate& gate, NormLedger& ledger) {
  const int n = 10;
  std::vector<double> dev;
  std::string detail = "N=10 max | |r_walk| - |r_exact| |:";
  for (double ratio : {0.1, 0.05, 0.025}) {
    const IsingParams p{n, ratio, 1.0};
    const double tau_max = 1.5 * n / p.B;
    const double dtau = 0.05 / p.B;
    const auto walk = propagate_walk(build_walk_hamiltonian(p), tau_max, dtau);
    const auto exact = exact_transfer_amplitudes(p, tau_max, dtau);
    ledger.norm = std::max(ledger.norm, walk.max_norm_drift);
    ++ledger.propagations;
    double worst = 0.0;
    for (std::size_t k = 0; k < exact.size(); ++k)
      worst = std::max(worst, std::abs(std::abs(walk.r_values[k]) - std::abs(exact[k])));
    dev.push_back(worst);
    detail += fmt(" B/J=%g -> %.4e;", ratio, worst);
  }
  gate.report(dev[0] > dev[1] && dev[1] > dev[2], "walk_approximation_convergence", detail + " (want strictly decreasing)");
}

void entanglement(Gate& gate, NormLedger& ledger) {
  const IsingParams p{8, 0.05, 1.0};
  const double tau0 = walk_peak(p).tau;
  const auto spec = make_toy_protocol(p, tau0);
  const auto g = ground_state(p);
  const auto out = checked_run(spec, g, ledger);
  const auto ppt = is_entangled_ppt(out.rho);
  const auto rep = evaluate_inequality(spec, g);
  gate.report(ppt.entangled && ppt.negativity > kMinNegativity && rep.margin > 0.0, "entanglement_demonstrated",
              fmt("N=8 B/J=0.05 tau0 B=%.4f: PPT entangled=%s, negativity %.4f (want > %.2f), margin %.4e (want > 0)",
                  tau0 * p.B, ppt.entangled ? "true" : "false", ppt.negativity, kMinNegativity, rep.margin));
}

void heatmaps(Gate& gate, NormLedger& ledger) {
  const IsingParams p{32, 1.0, 10.0};
  const auto h = build_walk_hamiltonian(p);
  const double tau0 = walk_peak(p).tau;
  const std::vector<double> taus{0.0, 0.1 * tau0, 0.5 * tau0, 1.0 * tau0};
  const auto grids = occupation_heatmap(h, taus);
  for (const auto& g : grids) {
    ledger.heatmap = std::max(ledger.heatmap, std::abs(g.total() - 1.0));
    ++ledger.heatmaps;
  }
  const int r01 = occupation_front_radius(h.basis, grids[1], kFrontThreshold);
  const int r05 = occupation_front_radius(h.basis, grids[2], kFrontThreshold);
  const int r10 = occupation_front_radius(h.basis, grids[3], kFrontThreshold);
  gate.report(r05 > r01, "ballistic_front",
              fmt("N=32 support radius (p > %g) at 0.1/0.5/1.0 tau0: %d/%d/%d (want r(0.5) > r(0.1))", kFrontThreshold,
                  r01, r05, r10));
}

void normalization(Gate& gate, const NormLedger& ledger) {
  gate.report(ledger.norm <= kNormTol && ledger.trace <= kTraceTol && ledger.heatmap <= kHeatmapTol,
              "normalization_suite",
              fmt("%d propagations max norm drift %.3e (<= %.0e); %d rho max |tr-1| %.3e (<= %.0e); "
                  "%d heatmaps max |sum-1| %.3e (<= %.0e)",
                  ledger.propagations, ledger.norm, kNormTol, ledger.density_matrices, ledger.trace, kTraceTol,
                  ledger.heatmaps, ledger.heatmap, kHeatmapTol));
}

}  // namespace

int main() {
  Gate gate;
  NormLedger ledger;
  const std::vector<std::pair<const char*, std::function<void()>>> steps{
      {"inverse_peak_amplitude_scaling", [&] { scaling(gate, ledger); }},
      {"post_selection_probability", [&] { post_selection(gate, ledger); }},
      {"inequality_minor_equivalence", [&] { equivalence(gate, ledger); }},
      {"branch_vs_joint_oracle", [&] { branch_oracle(gate, ledger); }},
      {"single_ancilla_reductions", [&] { single_ancilla(gate, ledger); }},
      {"walk_approximation_convergence", [&] { walk_convergence(gate, ledger); }},
      {"entanglement_demonstrated", [&] { entanglement(gate, ledger); }},
      {"ballistic_front", [&] { heatmaps(gate, ledger); }},
  };
  for (const auto& [name, step] : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      gate.report(false, name, std::string("exception: ") + e.what());
    }
  }
  normalization(gate, ledger);
  std::printf("%s: %d criteria failed\n", gate.failures ? "FAILED" : "ALL PASSED", gate.failures);
  return gate.failures ? 1 : 0;
}

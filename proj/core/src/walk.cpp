#include "mbcert/walk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace mbcert {

namespace {

std::vector<double> sample_grid(double tau_max, double dtau) {
  if (!(tau_max > 0.0) || !std::isfinite(tau_max)) throw InvalidArgument("walk: tau_max must be positive and finite");
  if (!(dtau > 0.0) || !std::isfinite(dtau)) throw InvalidArgument("walk: dtau must be positive and finite");
  const auto steps = static_cast<std::size_t>(std::floor(tau_max / dtau + 1e-9));
  std::vector<double> grid(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) grid[k] = static_cast<double>(k) * dtau;
  return grid;
}

/// Visits exp(-iH tau_k) v for every grid time, in order.
template <typename Visitor>
void sweep_times(const Propagator& prop, const StateVector& v, std::span<const double> grid, Visitor&& visit) {
  if (prop.method() == ExpmMethod::kDense) {
    for (std::size_t k = 0; k < grid.size(); ++k) visit(k, prop.evolve(v, grid[k]));
    return;
  }
  StateVector state = v;
  double now = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    state = prop.evolve(state, grid[k] - now);
    now = grid[k];
    visit(k, state);
  }
}

}  // namespace

WalkHamiltonian build_walk_hamiltonian(const IsingParams& p) {
  p.validate();
  DomainWallBasis basis(p.N);
  std::vector<Triplet> e;
  e.reserve(basis.size() * 4);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto [i, j] = basis.pair_of(k);
    const int neighbours[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& q : neighbours)
      if (basis.contains(q[0], q[1])) e.push_back({k, basis.index_of(q[0], q[1]), p.B});
  }
  SparseOperator matrix(basis.size(), std::move(e), true);
  return WalkHamiltonian{p, std::move(basis), std::move(matrix), p.B};
}

StateVector walk_state(const WalkHamiltonian& h, int i, int j) {
  return StateVector::basis_state(h.basis.size(), h.basis.index_of(i, j), BasisTag::kDomainWall);
}

PeakEstimate locate_peak(std::span<const double> taus, std::span<const double> values) {
  if (taus.size() != values.size() || taus.empty()) throw InvalidArgument("locate_peak: empty or mismatched samples");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = k;

  PeakEstimate peak{best, taus[best], values[best]};
  if (best == 0 || best + 1 == values.size()) return peak;

  const double y0 = values[best - 1], y1 = values[best], y2 = values[best + 1];
  const double curvature = y0 - 2.0 * y1 + y2;
  if (curvature >= 0.0) return peak;
  const double shift = std::clamp(0.5 * (y0 - y2) / curvature, -0.5, 0.5);
  const double step = 0.5 * (taus[best + 1] - taus[best - 1]);
  peak.tau = taus[best] + shift * step;
  peak.value = y1 - 0.25 * (y0 - y2) * shift;
  return peak;
}

WalkTrace propagate_walk(const WalkHamiltonian& h, double tau_max, double dtau) {
  if (h.hop_amplitude > 0.0 && dtau > 0.5 / h.hop_amplitude) {
    throw InvalidArgument("propagate_walk: dtau exceeds 0.5/B; the grid would alias the hopping dynamics");
  }
  WalkTrace trace;
  trace.params = h.params;
  trace.tau_grid = sample_grid(tau_max, dtau);
  trace.r_values.resize(trace.tau_grid.size());

  const int n = h.params.N;
  const std::size_t target = h.basis.index_of(n - 1, n - 1);
  const Propagator prop(h.matrix);
  std::vector<double> magnitude(trace.tau_grid.size());
  sweep_times(prop, walk_state(h, 2, 2), trace.tau_grid, [&](std::size_t k, const StateVector& psi) {
    trace.r_values[k] = psi[target];
    magnitude[k] = std::abs(psi[target]);
    trace.max_norm_drift = std::max(trace.max_norm_drift, std::abs(psi.norm() - 1.0));
  });

  const auto peak = locate_peak(trace.tau_grid, magnitude);
  trace.tau_peak = peak.tau;
  trace.abs_r_peak = peak.value;
  trace.r_peak = trace.r_values[peak.grid_index];
  return trace;
}

double OccupationGrid::total() const {
  double s = 0.0;
  for (double p : probability) s += p;
  return s;
}

std::vector<OccupationGrid> occupation_heatmap(const WalkHamiltonian& h, std::span<const double> taus) {
  const Propagator prop(h.matrix);
  const StateVector start = walk_state(h, 2, 2);
  std::vector<OccupationGrid> grids;
  grids.reserve(taus.size());
  for (double tau : taus) {
    if (!std::isfinite(tau)) throw InvalidArgument("occupation_heatmap: non-finite time");
    const StateVector psi = prop.evolve(start, tau);
    OccupationGrid g{h.params.N, tau, std::vector<double>(psi.dim())};
    for (std::size_t k = 0; k < psi.dim(); ++k) g.probability[k] = std::norm(psi[k]);
    grids.push_back(std::move(g));
  }
  return grids;
}

int occupation_front_radius(const DomainWallBasis& basis, const OccupationGrid& grid, double threshold) {
  int radius = 0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (grid.probability[k] <= threshold) continue;
    const auto [i, j] = basis.pair_of(k);
    radius = std::max({radius, i - 2, j - 2});
  }
  return radius;
}

std::vector<PeakRecord> peak_scaling_sweep(std::span<const int> n_list, const SweepOptions& options) {
  if (!(options.B > 0.0)) throw InvalidArgument("peak_scaling_sweep: B must be positive");
  if (!(options.window_factor > 0.0)) throw InvalidArgument("peak_scaling_sweep: window factor must be positive");
  for (int n : n_list)
    if (n < 4) throw InvalidArgument("peak_scaling_sweep: every N must be >= 4");

  std::vector<PeakRecord> out(n_list.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    try {
      for (std::size_t k = next++; k < n_list.size(); k = next++) {
        IsingParams p{n_list[k], options.B, options.J};
        const auto h = build_walk_hamiltonian(p);
        const auto trace = propagate_walk(h, options.window_factor * p.N / p.B, options.dtau_B / p.B);
        out[k] = PeakRecord{p.N, trace.tau_peak, trace.abs_r_peak, trace.max_norm_drift};
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = n_list.size();
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, n_list.size())));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (error) std::rethrow_exception(error);

  std::stable_sort(out.begin(), out.end(), [](const PeakRecord& a, const PeakRecord& b) { return a.N < b.N; });
  return out;
}

PeakEstimate walk_peak(const IsingParams& p, double window_factor, double dtau_B) {
  if (!(p.B > 0.0)) throw InvalidArgument("walk_peak: B must be positive");
  const auto trace = propagate_walk(build_walk_hamiltonian(p), window_factor * p.N / p.B, dtau_B / p.B);
  std::vector<double> mag(trace.r_values.size());
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(trace.r_values[k]);
  return locate_peak(trace.tau_grid, mag);
}

std::vector<cplx> exact_transfer_amplitudes(const IsingParams& p, double tau_max, double dtau) {
  p.validate();
  const auto grid = sample_grid(tau_max, dtau);
  const DomainWallBasis basis(p.N);
  const Propagator prop(build_hamiltonian(p));
  const std::size_t target = flip_mask(p.N - 1, p.N - 1);
  std::vector<cplx> r(grid.size());
  sweep_times(prop, excitation_state(basis, 2, 2), grid,
              [&](std::size_t k, const StateVector& psi) { r[k] = psi[target]; });
  return r;
}

}  // namespace mbcert

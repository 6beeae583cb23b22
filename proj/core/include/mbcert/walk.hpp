#pragma once

/// @file
/// Two-domain-wall sector of the Ising chain treated as a continuous-time
/// quantum walk on the triangle 2 <= i <= j <= N-1.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "mbcert/ising.hpp"
#include "mbcert/linalg.hpp"

namespace mbcert {

/// Hop amplitude B between pairs differing by one unit in exactly one wall
/// position. The constant 4J manifold energy is dropped from the diagonal.
struct WalkHamiltonian {
  IsingParams params;
  DomainWallBasis basis;
  SparseOperator matrix;
  double hop_amplitude;
};

WalkHamiltonian build_walk_hamiltonian(const IsingParams& p);

/// |e_{i,j}> as a walk-basis vector.
StateVector walk_state(const WalkHamiltonian& h, int i, int j);

struct PeakEstimate {
  std::size_t grid_index = 0;
  double tau = 0.0;
  double value = 0.0;
};

/// Global maximum of sampled values (first index on ties), refined by a
/// parabola through the maximum and its two neighbours.
PeakEstimate locate_peak(std::span<const double> taus, std::span<const double> values);

struct WalkTrace {
  IsingParams params;
  std::vector<double> tau_grid;
  /// r(tau) = <e_{N-1,N-1}| V_tau |e_{2,2}>
  std::vector<cplx> r_values;
  double tau_peak = 0.0;
  double abs_r_peak = 0.0;
  /// r at the grid sample nearest the refined peak.
  cplx r_peak{0.0, 0.0};
  /// max over samples of | ||psi(tau)|| - 1 |
  double max_norm_drift = 0.0;
};

/// Samples r on tau = 0, dtau, ..., <= tau_max starting from |e_{2,2}>.
/// Rejects dtau > 0.5/B.
WalkTrace propagate_walk(const WalkHamiltonian& h, double tau_max, double dtau);

/// Occupation probabilities |<e_{i,j}|V_tau|e_{2,2}>|^2 at one time.
struct OccupationGrid {
  int N = 0;
  double tau = 0.0;
  std::vector<double> probability;  ///< indexed like DomainWallBasis

  double at(const DomainWallBasis& basis, int i, int j) const { return probability[basis.index_of(i, j)]; }
  double total() const;
};

std::vector<OccupationGrid> occupation_heatmap(const WalkHamiltonian& h, std::span<const double> taus);

/// Largest Chebyshev distance from (2,2) among pairs holding more than
/// `threshold` probability.
int occupation_front_radius(const DomainWallBasis& basis, const OccupationGrid& grid, double threshold);

struct PeakRecord {
  int N = 0;
  double tau_peak = 0.0;
  double abs_r_peak = 0.0;
  double max_norm_drift = 0.0;
};

struct SweepOptions {
  double B = 1.0;
  double J = 10.0;
  double window_factor = 1.5;  ///< peak window tau in [0, window_factor * N / B]
  double dtau_B = 0.05;        ///< grid step in units of 1/B
  unsigned threads = 0;        ///< 0 = hardware concurrency
};

/// Peak of |r| for every N, sorted by N. Independent per N; the result does
/// not depend on the thread count.
std::vector<PeakRecord> peak_scaling_sweep(std::span<const int> n_list, const SweepOptions& options);

/// Convenience: peak time of the walk for the chain described by p.
PeakEstimate walk_peak(const IsingParams& p, double window_factor = 1.5, double dtau_B = 0.05);

/// <e_{N-1,N-1}| exp(-iH tau) |e_{2,2}> under the full chain Hamiltonian, on
/// the same grid as propagate_walk.
std::vector<cplx> exact_transfer_amplitudes(const IsingParams& p, double tau_max, double dtau);

}  // namespace mbcert

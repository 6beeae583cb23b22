#include "mbcert/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mbcert/entanglement.hpp"
#include "mbcert/ising.hpp"
#include "mbcert/protocol.hpp"
#include "mbcert/single_ancilla.hpp"
#include "mbcert/walk.hpp"

namespace mbcert {

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ExperimentKind::kWalkSweep, "walk-sweep"},       {ExperimentKind::kHeatmap, "heatmap"},
    {ExperimentKind::kExactProtocol, "exact-protocol"}, {ExperimentKind::kInequality, "inequality"},
    {ExperimentKind::kTomography, "tomography"},      {ExperimentKind::kCrosscheck, "crosscheck"},
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected a number, got '" + value + "'");
  }
  if (used != value.size() || !std::isfinite(v)) throw ConfigError("'" + key + "': expected a finite number, got '" + value + "'");
  return v;
}

long parse_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected an integer, got '" + value + "'");
  }
  if (used != value.size()) throw ConfigError("'" + key + "': expected an integer, got '" + value + "'");
  return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<T>(parse(key, item)));
  }
  if (out.empty()) throw ConfigError("'" + key + "': empty list");
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

bool is_exact(ExperimentKind k) {
  return k == ExperimentKind::kExactProtocol || k == ExperimentKind::kInequality ||
         k == ExperimentKind::kTomography || k == ExperimentKind::kCrosscheck;
}

IsingParams params_of(const ExperimentConfig& cfg, int n) {
  IsingParams p{n, cfg.B, cfg.J, cfg.walk_validity_ratio};
  p.validate();
  return p;
}

/// Evolution time in units of 1/B: explicit, or the walk's peak time.
double resolve_tau_B(const ExperimentConfig& cfg, const IsingParams& p) {
  if (cfg.tau) return *cfg.tau;
  return walk_peak(p, cfg.window_factor, cfg.dtau).tau * p.B;
}

std::vector<std::string> param_cells(const IsingParams& p, double tau_B) {
  return {std::to_string(p.N), format_number(p.B), format_number(p.J), format_number(tau_B)};
}

CsvTable walk_sweep(const ExperimentConfig& cfg) {
  SweepOptions opt{cfg.B, cfg.J, cfg.window_factor, cfg.dtau, cfg.threads};
  const auto peaks = peak_scaling_sweep(cfg.N_list, opt);
  CsvTable t{{"N", "B", "J", "tau_peak", "abs_r_peak", "window_factor", "dtau"}, {}};
  for (const auto& r : peaks) {
    t.rows.push_back({std::to_string(r.N), format_number(cfg.B), format_number(cfg.J),
                      format_number(r.tau_peak * cfg.B), format_number(r.abs_r_peak),
                      format_number(cfg.window_factor), format_number(cfg.dtau)});
  }
  return t;
}

CsvTable heatmap(const ExperimentConfig& cfg) {
  const auto p = params_of(cfg, cfg.N);
  const double tau0_B = resolve_tau_B(cfg, p);
  const auto h = build_walk_hamiltonian(p);
  std::vector<double> taus;
  for (double f : cfg.heatmap_fractions) taus.push_back(f * tau0_B / p.B);
  const auto grids = occupation_heatmap(h, taus);

  CsvTable t{{"N", "tau", "i", "j", "probability"}, {}};
  for (const auto& g : grids)
    for (std::size_t k = 0; k < h.basis.size(); ++k) {
      const auto [i, j] = h.basis.pair_of(k);
      t.rows.push_back({std::to_string(p.N), format_number(g.tau * p.B), std::to_string(i), std::to_string(j),
                        format_number(g.probability[k])});
    }
  return t;
}

CsvTable exact_protocol(const ExperimentConfig& cfg) {
  const auto p = params_of(cfg, cfg.N);
  const double tau_B = resolve_tau_B(cfg, p);
  const auto toy = toy_protocol_state(p, tau_B / p.B);
  const auto pf = purity_and_fidelity(toy.rho);
  const auto ppt = is_entangled_ppt(toy.rho);
  const auto minor = sylvester_minor(toy.rho);

  CsvTable t{{"N", "B", "J", "tau", "p_select", "abs_r", "abs_r_tilde", "purity", "fidelity", "min_pt_eigenvalue",
              "negativity", "minor", "entangled"},
             {}};
  auto row = param_cells(p, tau_B);
  for (double v : {toy.p_select, std::abs(toy.r), std::abs(toy.r_tilde), pf.purity, pf.fidelity, ppt.min_eigenvalue,
                   ppt.negativity, minor.minor})
    row.push_back(format_number(v));
  row.push_back(fmt_bool(ppt.entangled));
  t.rows.push_back(std::move(row));
  return t;
}

CsvTable inequality(const ExperimentConfig& cfg) {
  const auto p = params_of(cfg, cfg.N);
  const double tau_B = resolve_tau_B(cfg, p);
  const auto spec = make_toy_protocol(p, tau_B / p.B);
  const auto rep = evaluate_inequality(spec, ground_state(p));

  CsvTable t{{"N", "B", "J", "tau", "lhs1", "lhs2", "rhs", "margin", "violated"}, {}};
  auto row = param_cells(p, tau_B);
  for (double v : {rep.lhs_term_1, rep.lhs_term_2, rep.rhs, rep.margin}) row.push_back(format_number(v));
  row.push_back(fmt_bool(rep.violated));
  t.rows.push_back(std::move(row));
  return t;
}

CsvTable tomography(const ExperimentConfig& cfg) {
  const auto p = params_of(cfg, cfg.N);
  const double tau_B = resolve_tau_B(cfg, p);
  const auto spec = make_toy_protocol(p, tau_B / p.B);
  const auto rho = tomography_from_expectations(spec, ground_state(p));

  CsvTable t{{"N", "B", "J", "tau"}, {}};
  auto row = param_cells(p, tau_B);
  const char* labels[] = {"00", "01", "10", "11"};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const std::string ab = std::string(labels[a]) + "_" + labels[b];
      t.header.push_back("re_rho_" + ab);
      t.header.push_back("im_rho_" + ab);
      row.push_back(format_number(rho.matrix()(a, b).real()));
      row.push_back(format_number(rho.matrix()(a, b).imag()));
    }
  t.rows.push_back(std::move(row));
  return t;
}

CsvTable crosscheck(const ExperimentConfig& cfg) {
  const auto p = params_of(cfg, cfg.N);
  const double tau = resolve_tau_B(cfg, p) / p.B;
  CsvTable t{{"check_name", "max_abs_deviation", "tolerance", "pass"}, {}};
  auto add = [&](const std::string& name, double dev, double tolerance) {
    t.rows.push_back({name, format_number(dev), format_number(tolerance), fmt_bool(dev < tolerance)});
  };

  const auto walk = build_walk_hamiltonian(p);
  const StateVector e22_walk = walk_state(walk, 2, 2);
  add("expm_chebyshev_vs_dense_walk",
      max_abs_deviation(expm_apply(walk.matrix, e22_walk, tau, ExpmMethod::kChebyshev),
                        expm_apply(walk.matrix, e22_walk, tau, ExpmMethod::kDense)),
      tol::kOracle);
  {
    const StateVector once = expm_apply(walk.matrix, expm_apply(walk.matrix, e22_walk, 0.3 * tau), 0.7 * tau);
    add("expm_group_law_walk", max_abs_deviation(once, expm_apply(walk.matrix, e22_walk, tau)), tol::kOracle);
  }

  const auto spec = make_toy_protocol(p, tau);
  const StateVector g = ground_state(p);
  if (p.N <= 10) {
    const DomainWallBasis basis(p.N);
    const StateVector e22 = excitation_state(basis, 2, 2);
    add("expm_chebyshev_vs_dense_chain",
        max_abs_deviation(expm_apply(spec.propagator().hamiltonian(), e22, tau, ExpmMethod::kChebyshev),
                          expm_apply(spec.propagator().hamiltonian(), e22, tau, ExpmMethod::kDense)),
        tol::kOracle);
  }

  const auto outcome = run_protocol(spec, g);
  add("rho_unit_trace", std::abs(outcome.rho.trace() - 1.0), tol::kNorm);
  const auto tomo = tomography_from_expectations(spec, g);
  add("branch_vs_expectation_tomography", (outcome.rho.matrix() - tomo.matrix()).cwiseAbs().maxCoeff(), tol::kOracle);

  const cplx direct = direct_rhs_amplitude(spec, g);
  add("phi_vs_direct", std::abs(estimate_rhs_via_phi(spec, g) - direct), tol::kOracle);
  const auto decomp = decompose_for(spec);
  add("phi_prime_vs_direct", std::abs(estimate_rhs_via_phi_prime(spec, g, decomp) - direct), tol::kOracle);
  add("decomposition_reconstruction",
      decomp.reconstruction_error(LocalOperator::projector_zero(p.N - 1), spec.u2()), tol::kOracle);

  const auto rep = evaluate_inequality(spec, g);
  const double scale = 16.0 * outcome.p_select * outcome.p_select;
  add("inequality_margin_vs_sylvester_minor", std::abs(sylvester_minor(outcome.rho).minor + rep.margin / scale),
      tol::kOracle);

  const auto trace = propagate_walk(walk, cfg.window_factor * p.N / p.B, cfg.dtau / p.B);
  add("walk_norm_drift", trace.max_norm_drift, tol::kOracle);
  std::vector<double> taus;
  for (double f : cfg.heatmap_fractions) taus.push_back(f * tau);
  double worst = 0.0;
  for (const auto& grid : occupation_heatmap(walk, taus)) worst = std::max(worst, std::abs(grid.total() - 1.0));
  add("heatmap_probability_sum", worst, tol::kOracle);
  return t;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  for (const auto& kn : kKindNames)
    if (kn.kind == kind) return kn.name;
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
  for (const auto& kn : kKindNames)
    if (name == kn.name) return kn.kind;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (!(B > 0.0)) throw ConfigError("B must be > 0");
  if (!(J > 0.0)) throw ConfigError("J must be > 0");
  if (N < 4) throw ConfigError("N must be >= 4");
  if (N_list.empty()) throw ConfigError("N_list must not be empty");
  for (int n : N_list)
    if (n < 4) throw ConfigError("every entry of N_list must be >= 4");
  if (!(dtau > 0.0) || dtau > 0.5) throw ConfigError("dtau must be in (0, 0.5] (units of 1/B)");
  if (!(window_factor > 0.0)) throw ConfigError("window_factor must be > 0");
  if (tau && !(*tau >= 0.0)) throw ConfigError("tau must be >= 0");
  if (heatmap_fractions.empty()) throw ConfigError("heatmap_fractions must not be empty");
  if (is_exact(experiment) && N > kExactMaxSpins) {
    throw ConfigError("N = " + std::to_string(N) + " exceeds the exact-engine cap of " +
                      std::to_string(kExactMaxSpins) + " spins");
  }
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "experiment") {
    const auto kind = parse_experiment_kind(value);
    if (!kind) throw ConfigError("unknown experiment '" + value + "'");
    cfg.experiment = *kind;
  } else if (key == "N") {
    cfg.N = static_cast<int>(parse_integer(key, value));
  } else if (key == "N_list") {
    cfg.N_list = parse_list<int>(key, value, parse_integer);
  } else if (key == "B") {
    cfg.B = parse_double(key, value);
  } else if (key == "J") {
    cfg.J = parse_double(key, value);
  } else if (key == "tau") {
    cfg.tau = parse_double(key, value);
  } else if (key == "window_factor") {
    cfg.window_factor = parse_double(key, value);
  } else if (key == "dtau") {
    cfg.dtau = parse_double(key, value);
  } else if (key == "heatmap_fractions") {
    cfg.heatmap_fractions = parse_list<double>(key, value, parse_double);
  } else if (key == "walk_validity_ratio") {
    cfg.walk_validity_ratio = parse_double(key, value);
  } else if (key == "output" || key == "out") {
    cfg.output_path = value;
  } else if (key == "threads") {
    const long n = parse_integer(key, value);
    if (n < 0) throw ConfigError("threads must be >= 0");
    cfg.threads = static_cast<unsigned>(n);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

FitResult linear_fit(std::span<const std::pair<double, double>> points) {
  const std::size_t n = points.size();
  if (n < 3) throw InvalidArgument("linear_fit: need at least three points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx <= 0.0) throw InvalidArgument("linear_fit: x values are all equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double e = y - (slope * x + intercept);
    ss_res += e * e;
  }
  const double r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return FitResult{slope, intercept, r2, n};
}

CsvTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.experiment) {
    case ExperimentKind::kWalkSweep: return walk_sweep(cfg);
    case ExperimentKind::kHeatmap: return heatmap(cfg);
    case ExperimentKind::kExactProtocol: return exact_protocol(cfg);
    case ExperimentKind::kInequality: return inequality(cfg);
    case ExperimentKind::kTomography: return tomography(cfg);
    case ExperimentKind::kCrosscheck: return crosscheck(cfg);
  }
  throw ConfigError("unhandled experiment kind");
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_csv(std::ostream& os, const CsvTable& table, const std::string& comment) {
  os << "# " << comment << '\n';
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
    os << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

}  // namespace mbcert

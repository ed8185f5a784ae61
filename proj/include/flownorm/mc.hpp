#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flownorm/dgp.hpp"
#include "flownorm/signal.hpp"

namespace flownorm::mc {

// One simulation's headline numbers: correlation of each normalized signal
// with realized returns.
struct SimulationResult {
  std::uint64_t sim_index;
  double rho_tv;
  double rho_mc;
};

SimulationResult run_simulation(const dgp::SimConfig& cfg, std::uint64_t sim_index);

// Paired t-test of mean(x - y) = 0. Requires equal lengths >= 2 and
// non-constant differences (x == y elementwise is degenerate, not t = 0).
struct PairedT {
  double t_stat;
  double df;
  double p_value;      // two-sided, floored at stats::kPValueFloor
  bool p_below_floor;
  double mean_diff;
};

PairedT paired_t_test(std::span<const double> x, std::span<const double> y);

struct MethodStats {
  double mean, std, min, max;  // std uses the n-1 convention
};

// Aggregate over n_sims independent simulations. `results` is kept in
// sim_index order so per-simulation artifacts serialize deterministically.
struct ExperimentSummary {
  int n_sims;
  MethodStats tv, mc;
  double ratio_mc_tv;     // mc.mean / tv.mean
  double paired_t;        // on (rho_mc - rho_tv)
  double p_value;
  bool p_below_floor;
  std::vector<SimulationResult> results;
};

// Runs cfg.n_sims simulations (n_sims >= 2 required) across `n_threads`
// workers (0 = hardware concurrency). Output is bit-identical for any
// thread count: each simulation's RNG stream depends only on (seed,
// sim_index) and results are gathered by index.
ExperimentSummary run_experiment(const dgp::SimConfig& cfg, int n_threads = 1);

// Parameter sweep over one axis.
enum class SweepAxis { sigma_alpha, sigma_zeta, turnover_range, n_stocks };

SweepAxis parse_sweep_axis(const std::string& name);  // ConfigError on unknown
std::string sweep_axis_name(SweepAxis axis);

// One sweep coordinate. `b` is meaningful only for turnover_range (the
// interval upper bound); for n_stocks, `a` holds the integer count.
struct SweepValue {
  double a = 0.0;
  double b = 0.0;
};

struct SweepRow {
  std::string scenario;     // e.g. "sigma_alpha=0.01", "turnover=0.0005..0.01"
  double value_a, value_b;  // value_b is NaN except for turnover_range
  int n_sims;
  double mean_rho_tv, std_rho_tv;
  double mean_rho_mc, std_rho_mc;
  double ratio;             // mean_rho_mc / mean_rho_tv
  double analytic_rho_tv, analytic_rho_mc, analytic_ratio;
};

// Runs sims_per_point simulations at each value of the axis, holding every
// other parameter at `base`. Simulation streams reuse (base.seed, sim_index)
// at every point, so sweep curves share common random numbers.
std::vector<SweepRow> run_sweep(const dgp::SimConfig& base, SweepAxis axis,
                                std::span<const SweepValue> values, int sims_per_point,
                                int n_threads = 1);

}  // namespace flownorm::mc

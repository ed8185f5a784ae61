#include "flownorm/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "flownorm/errors.hpp"
#include "flownorm/stats.hpp"

namespace flownorm::mc {

SimulationResult run_simulation(const dgp::SimConfig& cfg, std::uint64_t sim_index) {
  const dgp::CrossSection cs = dgp::generate_cross_section(cfg, sim_index);
  const std::vector<double> s_mc = signal::normalize_mc(cs.d, cs.m);
  const std::vector<double> s_tv = signal::normalize_tv(cs.d, cs.v);
  SimulationResult res;
  res.sim_index = sim_index;
  res.rho_tv = signal::pearson_correlation(s_tv, cs.r);
  res.rho_mc = signal::pearson_correlation(s_mc, cs.r);
  return res;
}

PairedT paired_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("paired_t_test: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw DataError("paired_t_test: need at least 2 pairs");

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
  if (stats::all_equal(d))
    throw NumericError("paired_t_test: differences have zero variance (degenerate)");

  PairedT out;
  out.mean_diff = stats::mean(d);
  const double sd = stats::sample_std(d);
  out.t_stat = out.mean_diff / (sd / std::sqrt(static_cast<double>(n)));
  out.df = static_cast<double>(n - 1);
  const stats::TwoSidedP p = stats::student_t_two_sided_p(out.t_stat, out.df);
  out.p_value = p.p;
  out.p_below_floor = p.below_floor;
  return out;
}

namespace {

// Runs simulations [0, n_sims) into a pre-sized vector indexed by
// sim_index. Static work split; any worker exception is rethrown on the
// calling thread.
std::vector<SimulationResult> run_all(const dgp::SimConfig& cfg, int n_sims, int n_threads) {
  std::vector<SimulationResult> results(n_sims);
  if (n_threads == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    n_threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  n_threads = std::clamp(n_threads, 1, n_sims);

  if (n_threads == 1) {
    for (int i = 0; i < n_sims; ++i)
      results[i] = run_simulation(cfg, static_cast<std::uint64_t>(i));
    return results;
  }

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) {
    workers.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < n_sims; i = next.fetch_add(1))
          results[i] = run_simulation(cfg, static_cast<std::uint64_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lk(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

MethodStats collect_stats(std::span<const double> xs) {
  MethodStats s;
  s.mean = stats::mean(xs);
  s.std = stats::sample_std(xs);
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  return s;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

ExperimentSummary run_experiment(const dgp::SimConfig& cfg, int n_threads) {
  cfg.validate();
  if (cfg.n_sims < 2)
    throw ConfigError("run_experiment: n_sims must be >= 2 (got " + std::to_string(cfg.n_sims) + ")");
  if (n_threads < 0) throw ConfigError("run_experiment: n_threads must be >= 0");

  ExperimentSummary sum;
  sum.n_sims = cfg.n_sims;
  sum.results = run_all(cfg, cfg.n_sims, n_threads);

  std::vector<double> tv(cfg.n_sims), mcv(cfg.n_sims);
  for (int i = 0; i < cfg.n_sims; ++i) {
    tv[i] = sum.results[i].rho_tv;
    mcv[i] = sum.results[i].rho_mc;
  }
  sum.tv = collect_stats(tv);
  sum.mc = collect_stats(mcv);
  sum.ratio_mc_tv = sum.mc.mean / sum.tv.mean;
  const PairedT t = paired_t_test(mcv, tv);
  sum.paired_t = t.t_stat;
  sum.p_value = t.p_value;
  sum.p_below_floor = t.p_below_floor;
  return sum;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "sigma_alpha") return SweepAxis::sigma_alpha;
  if (name == "sigma_zeta") return SweepAxis::sigma_zeta;
  if (name == "turnover_range") return SweepAxis::turnover_range;
  if (name == "n_stocks") return SweepAxis::n_stocks;
  throw ConfigError("unknown sweep axis '" + name +
                    "' (expected sigma_alpha, sigma_zeta, turnover_range or n_stocks)");
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::sigma_alpha: return "sigma_alpha";
    case SweepAxis::sigma_zeta: return "sigma_zeta";
    case SweepAxis::turnover_range: return "turnover_range";
    case SweepAxis::n_stocks: return "n_stocks";
  }
  return "?";
}

std::vector<SweepRow> run_sweep(const dgp::SimConfig& base, SweepAxis axis,
                                std::span<const SweepValue> values, int sims_per_point,
                                int n_threads) {
  base.validate();
  if (values.empty()) throw ConfigError("run_sweep: empty value list");
  if (sims_per_point < 2) throw ConfigError("run_sweep: sims_per_point must be >= 2");

  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (const SweepValue& val : values) {
    dgp::SimConfig cfg = base;
    cfg.n_sims = sims_per_point;
    SweepRow row;
    row.value_a = val.a;
    row.value_b = nan;
    switch (axis) {
      case SweepAxis::sigma_alpha:
        if (!(val.a >= 0.0) || !std::isfinite(val.a))
          throw ConfigError("run_sweep: sigma_alpha values must be finite and >= 0");
        cfg.sigma_alpha = val.a;
        row.scenario = "sigma_alpha=" + format_value(val.a);
        break;
      case SweepAxis::sigma_zeta:
        if (!(val.a >= 0.0) || !std::isfinite(val.a))
          throw ConfigError("run_sweep: sigma_zeta values must be finite and >= 0");
        cfg.sigma_zeta = val.a;
        row.scenario = "sigma_zeta=" + format_value(val.a);
        break;
      case SweepAxis::turnover_range:
        if (!(val.a > 0.0) || !(val.b > val.a) || !(val.b < 1.0))
          throw ConfigError("run_sweep: turnover ranges need 0 < min < max < 1");
        cfg.tau_min = val.a;
        cfg.tau_max = val.b;
        row.value_b = val.b;
        row.scenario = "turnover=" + format_value(val.a) + ".." + format_value(val.b);
        break;
      case SweepAxis::n_stocks: {
        const double rounded = std::nearbyint(val.a);
        if (!(val.a >= 2.0) || rounded != val.a)
          throw ConfigError("run_sweep: n_stocks values must be integers >= 2");
        cfg.n_stocks = static_cast<int>(rounded);
        row.scenario = "n_stocks=" + format_value(val.a);
        break;
      }
    }

    const ExperimentSummary sum = run_experiment(cfg, n_threads);
    row.n_sims = sum.n_sims;
    row.mean_rho_tv = sum.tv.mean;
    row.std_rho_tv = sum.tv.std;
    row.mean_rho_mc = sum.mc.mean;
    row.std_rho_mc = sum.mc.std;
    row.ratio = sum.ratio_mc_tv;

    const signal::SnrReport snr =
        signal::analytic_snr(cfg, signal::turnover_moments(cfg.tau_min, cfg.tau_max));
    row.analytic_rho_tv = snr.corr_tv;
    row.analytic_rho_mc = snr.corr_mc;
    row.analytic_ratio = snr.corr_ratio;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace flownorm::mc

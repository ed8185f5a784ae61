// Command-line front end: simulate, sweep, moments, analytic, estimate,
// report. Every run that produces files writes them under --out together
// with the fully resolved configuration for exact replay.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flownorm/dgp.hpp"
#include "flownorm/econo.hpp"
#include "flownorm/errors.hpp"
#include "flownorm/io.hpp"
#include "flownorm/mc.hpp"
#include "flownorm/signal.hpp"
#include "flownorm/stats.hpp"
#include "flownorm/version.hpp"

namespace fs = std::filesystem;
using namespace flownorm;

namespace {

std::string g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> sims;
  std::optional<int> stocks;
  int threads = 1;
};

void add_sim_overrides(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "Master RNG seed (overrides config)");
  cmd->add_option("--sims", o.sims,
                  "Simulation count (n_sims; for sweep runs, sims per sweep point)");
  cmd->add_option("--stocks", o.stocks, "Stocks per cross-section (overrides config)");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
}

io::RunConfig load_config(const CommonOpts& o, bool sims_means_sweep_points = false) {
  io::RunConfig rc = o.config_path.empty() ? io::default_config() : io::read_config(o.config_path);
  if (o.seed) {
    rc.sim.seed = *o.seed;
    rc.provenance["sim.seed"] = "cli";
  }
  if (o.sims) {
    if (sims_means_sweep_points) {
      rc.sweep.sims_per_point = *o.sims;
      rc.provenance["sweep.sims_per_point"] = "cli";
    } else {
      rc.sim.n_sims = *o.sims;
      rc.provenance["sim.n_sims"] = "cli";
    }
  }
  if (o.stocks) {
    rc.sim.n_stocks = *o.stocks;
    rc.provenance["sim.n_stocks"] = "cli";
  }
  return rc;
}

fs::path ensure_out_dir(const std::string& out) {
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

// ----------------------------------------------------------- subcommands

int cmd_simulate(const CommonOpts& o) {
  io::RunConfig rc = load_config(o);
  const fs::path dir = ensure_out_dir(o.out_dir);

  const mc::ExperimentSummary sum = mc::run_experiment(rc.sim, o.threads);

  io::write_config(rc, dir / "resolved.cfg");
  const io::SidecarInfo meta{rc.sim.seed, io::config_hash(rc)};
  io::write_experiment_table(dir / "experiment.csv", sum, meta);
  io::write_correlation_table(dir / "correlations.csv", sum.results, meta);
  io::write_histogram_table(dir / "hist_correlations.csv", sum.results, 30, meta);
  io::write_ci_table(dir / "ci_means.csv", sum, meta);

  std::cout << "simulate: n_sims=" << sum.n_sims << " n_stocks=" << rc.sim.n_stocks
            << " seed=" << rc.sim.seed << "\n";
  std::cout << "rho_tv: mean=" << g6(sum.tv.mean) << " std=" << g6(sum.tv.std)
            << " min=" << g6(sum.tv.min) << " max=" << g6(sum.tv.max) << "\n";
  std::cout << "rho_mc: mean=" << g6(sum.mc.mean) << " std=" << g6(sum.mc.std)
            << " min=" << g6(sum.mc.min) << " max=" << g6(sum.mc.max) << "\n";
  std::cout << "ratio_mc_tv=" << g6(sum.ratio_mc_tv) << " paired_t=" << g6(sum.paired_t)
            << " p=" << (sum.p_below_floor ? "<" : "") << g6(sum.p_value) << "\n";
  std::cout << "wrote " << (dir / "experiment.csv").string() << " (+ correlations, plot data, "
            << "resolved.cfg)\n";
  return kExitOk;
}

int cmd_sweep(const CommonOpts& o) {
  io::RunConfig rc = load_config(o, /*sims_means_sweep_points=*/true);
  if (rc.sweep.axis.empty())
    throw ConfigError("sweep axis not configured (set 'axis' in the [sweep] section)");
  if (rc.sweep.values.empty())
    throw ConfigError("sweep values not configured (set 'values' in the [sweep] section)");
  const fs::path dir = ensure_out_dir(o.out_dir);

  const mc::SweepAxis axis = mc::parse_sweep_axis(rc.sweep.axis);
  const std::vector<mc::SweepRow> rows =
      mc::run_sweep(rc.sim, axis, rc.sweep.values, rc.sweep.sims_per_point, o.threads);

  io::write_config(rc, dir / "resolved.cfg");
  const io::SidecarInfo meta{rc.sim.seed, io::config_hash(rc)};
  io::write_sweep_table(dir / "sweep.csv", rows, meta);
  io::write_sweep_curve_table(dir / "sweep_curve.csv", rows, meta);

  std::cout << "sweep: axis=" << rc.sweep.axis << " points=" << rows.size()
            << " sims_per_point=" << rc.sweep.sims_per_point << "\n";
  for (const mc::SweepRow& r : rows)
    std::cout << r.scenario << ": mean_rho_tv=" << g6(r.mean_rho_tv)
              << " mean_rho_mc=" << g6(r.mean_rho_mc) << " ratio=" << g6(r.ratio)
              << " (analytic " << g6(r.analytic_rho_tv) << "/" << g6(r.analytic_rho_mc) << ")\n";
  std::cout << "wrote " << (dir / "sweep.csv").string() << " (+ sweep_curve, resolved.cfg)\n";
  return kExitOk;
}

int cmd_moments(const CommonOpts& o, std::optional<double> a, std::optional<double> b) {
  const io::RunConfig rc = load_config(o);
  const double lo = a.value_or(rc.sim.tau_min);
  const double hi = b.value_or(rc.sim.tau_max);
  const signal::TurnoverMoments m = signal::turnover_moments(lo, hi);

  std::cout << "turnover [" << g6(lo) << ", " << g6(hi) << "]\n";
  std::cout << "mean_tau=" << g6(m.mean_tau) << " mean_tau_sq=" << g6(m.mean_tau_sq)
            << " mean_inv_tau=" << g6(m.mean_inv_tau)
            << " mean_inv_tau_sq=" << g6(m.mean_inv_tau_sq) << "\n";
  std::cout << "jensen_gap_inv=" << g6(m.mean_inv_tau - 1.0 / m.mean_tau)
            << " jensen_gap_sq=" << g6(m.mean_tau_sq - m.mean_tau * m.mean_tau) << "\n";

  if (!o.out_dir.empty()) {
    const fs::path dir = ensure_out_dir(o.out_dir);
    io::write_moments_table(dir / "moments.csv", m, {rc.sim.seed, io::config_hash(rc)});
    std::cout << "wrote " << (dir / "moments.csv").string() << "\n";
  }
  return kExitOk;
}

int cmd_analytic(const CommonOpts& o) {
  const io::RunConfig rc = load_config(o);
  const signal::TurnoverMoments m = signal::turnover_moments(rc.sim.tau_min, rc.sim.tau_max);
  const signal::SnrReport r = signal::analytic_snr(rc.sim, m);

  std::cout << "cov_mc=" << g6(r.cov_mc) << " var_mc=" << g6(r.var_mc) << " cov_tv=" << g6(r.cov_tv)
            << " var_tv=" << g6(r.var_tv) << " var_r=" << g6(r.var_r) << "\n";
  std::cout << "snr_mc=" << g6(r.snr_mc) << " snr_tv=" << g6(r.snr_tv)
            << " snr_ratio=" << g6(r.snr_ratio) << "\n";
  std::cout << "corr_mc=" << g6(r.corr_mc) << " corr_tv=" << g6(r.corr_tv)
            << " corr_ratio=" << g6(r.corr_ratio) << "\n";

  if (!o.out_dir.empty()) {
    const fs::path dir = ensure_out_dir(o.out_dir);
    io::write_config(rc, dir / "resolved.cfg");
    io::write_snr_table(dir / "snr.csv", r, {rc.sim.seed, io::config_hash(rc)});
    std::cout << "wrote " << (dir / "snr.csv").string() << " (+ resolved.cfg)\n";
  }
  return kExitOk;
}

int cmd_estimate(const CommonOpts& o, const std::string& panel_path, std::optional<int> horizon,
                 const std::string& spec_name) {
  io::RunConfig rc = load_config(o);
  if (horizon) {
    rc.est.reg.horizon = *horizon;
    rc.provenance["estimate.horizon"] = "cli";
  }
  if (!spec_name.empty()) {
    if (spec_name == "mc")
      rc.est.reg.regressors = {"s_mc"};
    else if (spec_name == "tv")
      rc.est.reg.regressors = {"s_tv"};
    else
      rc.est.reg.regressors = {"s_mc", "s_tv"};  // horse
    rc.provenance["estimate.regressors"] = "cli";
  }

  const io::PanelRead pr = io::read_panel(panel_path);
  std::cout << "panel: " << pr.report.n_data_rows << " data rows, " << pr.report.n_accepted
            << " accepted, " << pr.report.n_rejected << " rejected\n";
  for (const io::RejectedRow& rej : pr.report.rejects)
    std::cerr << "  rejected line " << rej.line << ": " << rej.reason << "\n";
  if (pr.report.n_rejected > static_cast<long>(pr.report.rejects.size()))
    std::cerr << "  (further rejects omitted)\n";
  if (pr.observations.empty()) throw DataError("panel has no usable rows: " + panel_path);

  const econo::Panel panel = econo::Panel::build(pr.observations);
  const fs::path dir = ensure_out_dir(o.out_dir);
  io::write_config(rc, dir / "resolved.cfg");
  const io::SidecarInfo meta{rc.sim.seed, io::config_hash(rc)};

  const econo::FMResult fm = econo::fama_macbeth(panel, rc.est.reg);
  io::write_fm_table(dir / "fm.csv", fm, meta);
  std::cout << "cross-sectional (" << fm.n_days_used << " days, " << fm.n_obs << " obs, avg R2 "
            << g6(fm.avg_r2) << "):\n";
  for (const econo::FmRegressor& reg : fm.regressors)
    std::cout << "  " << reg.name << ": coef=" << g6(reg.mean_coef) << " se=" << g6(reg.se)
              << " t=" << g6(reg.t_stat) << "\n";

  if (rc.est.run_fe) {
    const econo::FEResult fe = econo::pooled_fe(panel, rc.est.reg);
    io::write_fe_table(dir / "fe.csv", fe, meta);
    std::cout << "pooled two-way FE (" << fe.n_obs << " obs, " << fe.n_stocks << " stocks, "
              << fe.n_days << " days, within R2 " << g6(fe.within_r2) << "):\n";
    for (const econo::FeRegressor& reg : fe.regressors)
      std::cout << "  " << reg.name << ": coef=" << g6(reg.coef) << " se=" << g6(reg.se)
                << " t=" << g6(reg.t_stat) << "\n";
  }

  if (rc.est.group_by != "none") {
    const econo::GroupBy gb = rc.est.group_by == "year" ? econo::GroupBy::year
                                                        : econo::GroupBy::mcap_quintile;
    const std::vector<econo::GroupedFm> groups =
        econo::fama_macbeth_by_group(panel, rc.est.reg, gb);
    for (const econo::GroupedFm& g : groups) {
      if (!g.ok) {
        std::cerr << "group " << g.group << ": skipped (" << g.error << ")\n";
        continue;
      }
      io::write_fm_table(dir / ("fm_" + g.group + ".csv"), g.result, meta);
      std::cout << "group " << g.group << ":";
      for (const econo::FmRegressor& reg : g.result.regressors)
        std::cout << " " << reg.name << " t=" << g6(reg.t_stat);
      std::cout << "\n";
    }
  }
  std::cout << "wrote " << (dir / "fm.csv").string() << (rc.est.run_fe ? " (+ fe.csv)" : "")
            << "\n";
  return kExitOk;
}

int cmd_report(const std::string& out_dir) {
  const fs::path dir(out_dir);
  if (!fs::is_directory(dir))
    throw DataError("results directory does not exist: " + dir.string());

  // Known result tables, in presentation order.
  const char* known[] = {"experiment.csv", "sweep.csv",  "sweep_curve.csv",
                         "snr.csv",        "moments.csv", "fm.csv",
                         "fe.csv",         "ci_means.csv"};
  std::string report;
  int found = 0;
  for (const char* name : known) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) continue;
    ++found;
    report += std::string(name) + "\n" + std::string(std::string(name).size(), '=') + "\n";
    const fs::path meta = p.string() + ".meta";
    if (fs::exists(meta)) {
      std::ifstream mi(meta);
      std::string ml;
      while (std::getline(mi, ml)) report += "# " + ml + "\n";
    }
    std::ifstream fi(p);
    std::string fl;
    while (std::getline(fi, fl)) report += fl + "\n";
    report += "\n";
  }
  if (found == 0) {
    std::cerr << "report: no result tables found in " << dir.string() << "; nothing to do\n";
    return kExitOk;
  }
  const fs::path out = dir / "report.txt";
  std::ofstream of(out, std::ios::binary | std::ios::trunc);
  if (!of) throw IoError("cannot open for writing: " + out.string());
  of << report;
  of.flush();
  if (!of) throw IoError("write failed: " + out.string());
  std::cout << "wrote " << out.string() << " (" << found << " tables)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-flow normalization toolkit: simulation and panel econometrics"};
  app.set_version_flag("--version", std::string("flownorm ") + kVersion);
  app.require_subcommand(1);

  CommonOpts sim_o, sweep_o, mom_o, ana_o, est_o;
  std::optional<double> mom_a, mom_b;
  std::optional<int> est_horizon;
  std::string est_spec, est_panel, report_dir;

  CLI::App* c_sim = app.add_subcommand("simulate", "Run the Monte Carlo experiment");
  c_sim->add_option("--config", sim_o.config_path, "Run configuration file");
  c_sim->add_option("--out", sim_o.out_dir, "Output directory")->required();
  add_sim_overrides(c_sim, sim_o);

  CLI::App* c_sweep = app.add_subcommand("sweep", "Sweep one parameter axis");
  c_sweep->add_option("--config", sweep_o.config_path, "Run configuration file");
  c_sweep->add_option("--out", sweep_o.out_dir, "Output directory")->required();
  add_sim_overrides(c_sweep, sweep_o);

  CLI::App* c_mom = app.add_subcommand("moments", "Print turnover distribution moments");
  c_mom->add_option("--config", mom_o.config_path, "Run configuration file");
  c_mom->add_option("--out", mom_o.out_dir, "Optional output directory");
  c_mom->add_option("--a", mom_a, "Turnover lower bound (defaults to config tau_min)");
  c_mom->add_option("--b", mom_b, "Turnover upper bound (defaults to config tau_max)");

  CLI::App* c_ana = app.add_subcommand("analytic", "Closed-form second moments and SNR");
  c_ana->add_option("--config", ana_o.config_path, "Run configuration file");
  c_ana->add_option("--out", ana_o.out_dir, "Optional output directory");
  add_sim_overrides(c_ana, ana_o);

  CLI::App* c_est = app.add_subcommand("estimate", "Panel regressions on a flow panel");
  c_est->add_option("--config", est_o.config_path, "Run configuration file");
  c_est->add_option("--panel", est_panel, "Panel CSV file")->required();
  c_est->add_option("--out", est_o.out_dir, "Output directory")->required();
  c_est->add_option("--horizon", est_horizon, "Forward-return horizon")
      ->check(CLI::IsMember({1, 5, 20}));
  c_est->add_option("--spec", est_spec, "Regressor set: mc, tv or horse")
      ->check(CLI::IsMember({"mc", "tv", "horse"}));
  c_est->add_option("--seed", est_o.seed, "Seed recorded in output metadata");

  CLI::App* c_rep = app.add_subcommand("report", "Bundle a run directory into report.txt");
  c_rep->add_option("--out", report_dir, "Results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run '" << (argc > 0 ? argv[0] : "flownorm") << " --help' for usage\n";
    return kExitConfig;
  }

  try {
    if (*c_sim) return cmd_simulate(sim_o);
    if (*c_sweep) return cmd_sweep(sweep_o);
    if (*c_mom) return cmd_moments(mom_o, mom_a, mom_b);
    if (*c_ana) return cmd_analytic(ana_o);
    if (*c_est) return cmd_estimate(est_o, est_panel, est_horizon, est_spec);
    if (*c_rep) return cmd_report(report_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

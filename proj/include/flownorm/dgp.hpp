#pragma once

#include <cstdint>
#include <vector>

#include "flownorm/rng.hpp"

namespace flownorm::dgp {

// One cross-section's generating parameters. Defaults are the baseline
// calibration used throughout the experiment suite.
struct SimConfig {
  int n_stocks = 500;
  int n_sims = 1000;
  double sigma_alpha = 0.05;   // dispersion of signal strength
  double sigma_zeta = 3.5;     // dispersion of noise-flow intensity
  double k = 1.0;              // informed-flow scale
  double mu_log_m = 20.0;      // log market-cap location
  double sigma_log_m = 2.0;    // log market-cap dispersion
  double tau_min = 0.0005;     // turnover lower bound
  double tau_max = 0.01;       // turnover upper bound
  double gamma = 1.0;          // return loading on the signal
  double sigma_eps = 0.03;     // idiosyncratic return noise
  std::uint64_t seed = 42;

  // Throws ConfigError naming the first violated bound.
  void validate() const;
};

// One simulated cross-section, all vectors of length n_stocks.
struct CrossSection {
  std::vector<double> alpha;  // latent signal
  std::vector<double> m;      // market cap, strictly positive
  std::vector<double> tau;    // turnover in [tau_min, tau_max]
  std::vector<double> v;      // traded value, tau * m elementwise
  std::vector<double> zeta;   // noise-flow intensity
  std::vector<double> eps;    // return noise
  std::vector<double> d;      // total order flow
  std::vector<double> r;      // realized return

  int n() const { return static_cast<int>(alpha.size()); }
};

// Flow and return components. Evaluation order is fixed left-to-right so
// results are bit-reproducible.
double informed_flow(double alpha, double m, double k);          // k*alpha*m
double noise_flow(double zeta, double v);                        // zeta*v
double total_flow(double informed, double noise);                // informed + noise
double realize_return(double alpha, double gamma, double eps);   // gamma*alpha + eps

// Individual draw blocks. Each consumes engine outputs in a documented,
// fixed order (see rng::fill_gaussian / fill_uniform).
std::vector<double> draw_alphas(rng::Engine& eng, int n, double sigma_alpha);
std::vector<double> draw_market_caps(rng::Engine& eng, int n, double mu_log_m, double sigma_log_m);
std::vector<double> draw_turnovers(rng::Engine& eng, int n, double tau_min, double tau_max);

// Generates the full cross-section for simulation `sim_index` under `cfg`.
// The RNG stream is derived from (cfg.seed, sim_index); the draw order is
// frozen as alpha, log market cap, turnover, zeta, eps.
CrossSection generate_cross_section(const SimConfig& cfg, std::uint64_t sim_index);

}  // namespace flownorm::dgp

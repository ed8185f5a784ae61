#include "flownorm/dgp.hpp"

#include <cmath>
#include <string>

#include "flownorm/errors.hpp"

namespace flownorm::dgp {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void SimConfig::validate() const {
  require(n_stocks >= 2, "n_stocks must be >= 2 (got " + std::to_string(n_stocks) + ")");
  require(n_sims >= 1, "n_sims must be >= 1 (got " + std::to_string(n_sims) + ")");
  require(sigma_alpha >= 0.0 && std::isfinite(sigma_alpha), "sigma_alpha must be finite and >= 0");
  require(sigma_zeta >= 0.0 && std::isfinite(sigma_zeta), "sigma_zeta must be finite and >= 0");
  require(k > 0.0 && std::isfinite(k), "k must be finite and > 0");
  require(std::isfinite(mu_log_m), "mu_log_m must be finite");
  require(sigma_log_m >= 0.0 && std::isfinite(sigma_log_m), "sigma_log_m must be finite and >= 0");
  require(tau_min > 0.0 && std::isfinite(tau_min), "tau_min must be finite and > 0");
  require(tau_max >= tau_min, "tau_max must be >= tau_min");
  require(tau_max < 1.0, "tau_max must be < 1");
  require(std::isfinite(gamma), "gamma must be finite");
  require(sigma_eps >= 0.0 && std::isfinite(sigma_eps), "sigma_eps must be finite and >= 0");
}

double informed_flow(double alpha, double m, double k) { return k * alpha * m; }

double noise_flow(double zeta, double v) { return zeta * v; }

double total_flow(double informed, double noise) { return informed + noise; }

double realize_return(double alpha, double gamma, double eps) { return gamma * alpha + eps; }

std::vector<double> draw_alphas(rng::Engine& eng, int n, double sigma_alpha) {
  std::vector<double> out(n);
  rng::fill_gaussian(eng, out, 0.0, sigma_alpha);
  return out;
}

std::vector<double> draw_market_caps(rng::Engine& eng, int n, double mu_log_m, double sigma_log_m) {
  std::vector<double> out(n);
  rng::fill_gaussian(eng, out, mu_log_m, sigma_log_m);
  for (double& x : out) x = std::exp(x);
  return out;
}

std::vector<double> draw_turnovers(rng::Engine& eng, int n, double tau_min, double tau_max) {
  std::vector<double> out(n);
  rng::fill_uniform(eng, out, tau_min, tau_max);
  return out;
}

CrossSection generate_cross_section(const SimConfig& cfg, std::uint64_t sim_index) {
  cfg.validate();
  rng::Engine eng(rng::stream_seed(cfg.seed, sim_index));

  CrossSection cs;
  const int n = cfg.n_stocks;
  cs.alpha = draw_alphas(eng, n, cfg.sigma_alpha);
  cs.m = draw_market_caps(eng, n, cfg.mu_log_m, cfg.sigma_log_m);
  cs.tau = draw_turnovers(eng, n, cfg.tau_min, cfg.tau_max);
  cs.zeta.resize(n);
  rng::fill_gaussian(eng, cs.zeta, 0.0, cfg.sigma_zeta);
  cs.eps.resize(n);
  rng::fill_gaussian(eng, cs.eps, 0.0, cfg.sigma_eps);

  cs.v.resize(n);
  cs.d.resize(n);
  cs.r.resize(n);
  for (int i = 0; i < n; ++i) {
    cs.v[i] = cs.tau[i] * cs.m[i];
    cs.d[i] = total_flow(informed_flow(cs.alpha[i], cs.m[i], cfg.k), noise_flow(cs.zeta[i], cs.v[i]));
    cs.r[i] = realize_return(cs.alpha[i], cfg.gamma, cs.eps[i]);
  }
  return cs;
}

}  // namespace flownorm::dgp

#include "flownorm/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flownorm/errors.hpp"
#include "flownorm/stats.hpp"

namespace flownorm::signal {

namespace {

std::vector<double> divide(std::span<const double> num, std::span<const double> den,
                           const char* op_name) {
  if (num.size() != den.size())
    throw DataError(std::string(op_name) + ": size mismatch (" + std::to_string(num.size()) +
                    " vs " + std::to_string(den.size()) + ")");
  std::vector<double> out(num.size());
  for (std::size_t i = 0; i < num.size(); ++i) {
    if (!(den[i] > 0.0) || !std::isfinite(den[i]))
      throw DataError(std::string(op_name) + ": nonpositive or nonfinite denominator at index " +
                      std::to_string(i));
    out[i] = num[i] / den[i];
  }
  return out;
}

}  // namespace

std::vector<double> normalize_mc(std::span<const double> d, std::span<const double> m) {
  return divide(d, m, "normalize_mc");
}

std::vector<double> normalize_tv(std::span<const double> d, std::span<const double> v) {
  return divide(d, v, "normalize_tv");
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DataError("pearson_correlation: size mismatch");
  if (x.size() < 2)
    throw DataError("pearson_correlation: need at least 2 observations");
  if (stats::all_equal(x) || stats::all_equal(y))
    throw NumericError("pearson_correlation: constant input has no defined correlation");

  const double mx = stats::mean(x);
  const double my = stats::mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const double corr = sxy / std::sqrt(sxx * syy);
  return std::clamp(corr, -1.0, 1.0);
}

TurnoverMoments turnover_moments(double a, double b) {
  if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(b) || b < a)
    throw ConfigError("turnover_moments: need 0 < a <= b, both finite");
  if (a == b) return {a, a * a, 1.0 / a, 1.0 / (a * a)};
  const double w = b - a;
  TurnoverMoments mom;
  mom.mean_tau = 0.5 * (a + b);
  mom.mean_tau_sq = (b * b * b - a * a * a) / (3.0 * w);
  mom.mean_inv_tau = std::log(b / a) / w;
  mom.mean_inv_tau_sq = (1.0 / a - 1.0 / b) / w;
  return mom;
}

SnrReport analytic_snr(const dgp::SimConfig& cfg, const TurnoverMoments& mom) {
  const double k2a2 = cfg.k * cfg.k * cfg.sigma_alpha * cfg.sigma_alpha;
  const double z2 = cfg.sigma_zeta * cfg.sigma_zeta;

  SnrReport rep;
  rep.cov_mc = cfg.k * cfg.gamma * cfg.sigma_alpha * cfg.sigma_alpha;
  rep.var_mc = k2a2 + z2 * mom.mean_tau_sq;
  rep.cov_tv = cfg.k * cfg.gamma * cfg.sigma_alpha * cfg.sigma_alpha * mom.mean_inv_tau;
  rep.var_tv = k2a2 * mom.mean_inv_tau_sq + z2;
  rep.var_r = cfg.gamma * cfg.gamma * cfg.sigma_alpha * cfg.sigma_alpha +
              cfg.sigma_eps * cfg.sigma_eps;

  if (!(rep.var_r > 0.0))
    throw NumericError("analytic_snr: returns have zero variance");
  if (!(rep.var_mc > 0.0) || !(rep.var_tv > 0.0))
    throw NumericError("analytic_snr: a normalized signal has zero variance");

  rep.snr_mc = rep.cov_mc * rep.cov_mc / (rep.var_mc * rep.var_r);
  rep.snr_tv = rep.cov_tv * rep.cov_tv / (rep.var_tv * rep.var_r);
  rep.snr_ratio = rep.snr_mc / rep.snr_tv;
  rep.corr_mc = rep.cov_mc / std::sqrt(rep.var_mc * rep.var_r);
  rep.corr_tv = rep.cov_tv / std::sqrt(rep.var_tv * rep.var_r);
  rep.corr_ratio = rep.corr_mc / rep.corr_tv;
  return rep;
}

}  // namespace flownorm::signal

#pragma once

#include <span>
#include <vector>

#include "flownorm/dgp.hpp"

namespace flownorm::signal {

// Flow scaled by market cap: d[i] / m[i]. Sizes must match; every
// denominator must be strictly positive and finite.
std::vector<double> normalize_mc(std::span<const double> d, std::span<const double> m);

// Flow scaled by traded value: d[i] / v[i]. Same preconditions.
std::vector<double> normalize_tv(std::span<const double> d, std::span<const double> v);

// Pearson correlation. Requires matching lengths, n >= 2, finite inputs;
// a constant sequence on either side is a degenerate input (NumericError),
// never silently 0. Result clamped to [-1, 1].
double pearson_correlation(std::span<const double> x, std::span<const double> y);

// Population moments of turnover on [a, b]. Uniform closed forms for a < b;
// point-mass moments for a == b.
struct TurnoverMoments {
  double mean_tau;         // E[tau]
  double mean_tau_sq;      // E[tau^2]
  double mean_inv_tau;     // E[1/tau]
  double mean_inv_tau_sq;  // E[1/tau^2]
};

TurnoverMoments turnover_moments(double a, double b);

// Closed-form second moments of both normalized signals against returns,
// plus the implied signal-to-noise ratios and population correlations.
struct SnrReport {
  double cov_mc, var_mc;
  double cov_tv, var_tv;
  double var_r;
  double snr_mc, snr_tv, snr_ratio;    // snr = cov^2 / (var * var_r)
  double corr_mc, corr_tv, corr_ratio; // corr = cov / sqrt(var * var_r)
};

// Evaluates the closed forms at cfg's parameters and the supplied turnover
// moments. Degenerate variance terms (var_r, var_mc or var_tv zero) raise
// NumericError. With sigma_alpha == 0 both covariances are zero and the
// ratio fields are NaN.
SnrReport analytic_snr(const dgp::SimConfig& cfg, const TurnoverMoments& mom);

}  // namespace flownorm::signal

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace flownorm::econo {

// One stock-day row of a flow panel.
struct PanelObservation {
  std::string date;      // ISO-8601 calendar date
  std::string stock_id;  // nonempty identifier
  double flow;           // signed order flow
  double market_cap;     // > 0
  double traded_value;   // > 0
  double ret;            // simple return over the day
};

// Indexed panel: rows sorted by (date, stock_id) with dense day and stock
// indices. build() rejects duplicate (date, stock_id) pairs.
struct Panel {
  std::vector<PanelObservation> rows;
  std::vector<std::string> dates;   // unique, ascending
  std::vector<std::string> stocks;  // unique, ascending
  std::vector<int> day_of_row;
  std::vector<int> stock_of_row;

  static Panel build(std::vector<PanelObservation> observations);

  int n_days() const { return static_cast<int>(dates.size()); }
  int n_stocks() const { return static_cast<int>(stocks.size()); }
  long n_rows() const { return static_cast<long>(rows.size()); }
};

// Clamps values to the empirical [lower, upper] quantiles, computed with
// the ceil-rank (inverse empirical CDF) convention: the p-quantile of the
// sorted sample s is s[ceil(p*n) - 1]. This convention makes the operation
// idempotent: re-winsorizing at the same bounds is a no-op. lower == 0 /
// upper == 1 disable the respective clamp. Inputs must be finite.
std::vector<double> winsorize(std::span<const double> values, double lower, double upper);

// Z-scores values within groups (sample-std denominator). Groups with fewer
// than 3 members or zero variance are excluded: their rows come back NaN and
// the group is flagged. group_of_row holds indices in [0, n_groups).
struct GroupZscore {
  std::vector<double> values;        // standardized; NaN for excluded groups
  std::vector<char> group_excluded;  // size n_groups
  int n_groups_excluded;
  long n_rows_excluded;
};

GroupZscore zscore_by_group(std::span<const double> values, std::span<const int> group_of_row,
                            int n_groups);

// Compounded return over the next `horizon` available per-stock days
// (calendar gaps are ignored; availability is positional). Rows without
// enough future observations get NaN and are counted as dropped.
struct ForwardReturns {
  std::vector<double> values;  // aligned with panel rows; NaN where dropped
  long n_dropped;
};

ForwardReturns forward_return(const Panel& panel, int horizon);

// Regression specification shared by the cross-sectional and pooled
// estimators.
enum class Dependent { forward_return, log_abs_flow };
enum class WinsorScope { pooled, per_day };

struct RegressionSpec {
  std::vector<std::string> regressors = {"s_mc", "s_tv"};  // subset of {s_mc, s_tv}
  Dependent dependent = Dependent::forward_return;
  int horizon = 1;  // one of {1, 5, 20} when dependent is forward_return
  double winsor_lower = 0.005;
  double winsor_upper = 0.995;
  WinsorScope winsor_scope = WinsorScope::pooled;
  bool standardize_within_day = true;  // regressors only, never the dependent
  double log_constant = 1.0;           // y = log(log_constant + |flow|)

  void validate() const;  // ConfigError on violation
};

// Cross-sectional (per-day) regressions averaged over days. For each
// regressor: mean daily coefficient, its time-series standard error
// (std of daily coefficients / sqrt(days)), and t = mean / se.
struct FmRegressor {
  std::string name;
  double mean_coef;
  double se;
  double t_stat;
  std::vector<double> daily_coefs;  // in used-day order
};

struct FMResult {
  std::vector<FmRegressor> regressors;
  double avg_r2;               // mean per-day unadjusted R^2
  int n_days_used;
  int n_days_excluded;         // too small, rank-deficient, or z-score-degenerate
  long n_obs;                  // total observations in used days
  double avg_stocks_per_day;
};

FMResult fama_macbeth(const Panel& panel, const RegressionSpec& spec);

// Pooled regression with stock and day fixed effects absorbed by iterative
// demeaning, standard errors clustered two ways (stock and day) with the
// heteroskedasticity term subtracted for the intersection. The small-sample
// multipliers actually applied are reported.
struct FeRegressor {
  std::string name;
  double coef;
  double se;
  double t_stat;
};

struct FEResult {
  std::vector<FeRegressor> regressors;
  double within_r2;
  long n_obs;
  int n_stocks;
  int n_days;
  int demean_iterations;
  double demean_max_delta;   // last iteration's largest cell change
  double adj_stock, adj_day, adj_cell;  // small-sample multipliers
  bool variance_clamped;     // a negative variance diagonal was clamped to 0
};

FEResult pooled_fe(const Panel& panel, const RegressionSpec& spec);

// Subsample driver: runs fama_macbeth per group. Groups that fail to
// estimate (e.g. too few usable days) are reported with ok = false.
enum class GroupBy { mcap_quintile, year, tag };

struct GroupedFm {
  std::string group;
  bool ok;
  std::string error;  // set when ok == false
  FMResult result;    // valid when ok == true
};

// For GroupBy::tag, `tags` maps stock_id -> group label; untagged stocks
// fall into group "untagged". Quintiles are pooled observation-level splits
// by market_cap rank (Q1 smallest .. Q5 largest).
std::vector<GroupedFm> fama_macbeth_by_group(const Panel& panel, const RegressionSpec& spec,
                                             GroupBy group_by,
                                             const std::map<std::string, std::string>* tags = nullptr);

}  // namespace flownorm::econo

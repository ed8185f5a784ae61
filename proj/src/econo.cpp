#include "flownorm/econo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "flownorm/errors.hpp"
#include "flownorm/stats.hpp"

namespace flownorm::econo {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Rank with 1e-9 fuzz so rationally-exact products like 5 * 0.8 land on the
// intended integer despite binary rounding.
long quantile_rank(long n, double p) {
  const double m = static_cast<double>(n) * p;
  long r = static_cast<long>(std::ceil(m - 1e-9));
  return std::clamp(r, 1L, n);
}

}  // namespace

// ----------------------------------------------------------------- Panel

Panel Panel::build(std::vector<PanelObservation> observations) {
  for (const PanelObservation& o : observations) {
    if (o.date.empty()) throw DataError("panel: empty date");
    if (o.stock_id.empty()) throw DataError("panel: empty stock_id");
    if (!(o.market_cap > 0.0) || !std::isfinite(o.market_cap))
      throw DataError("panel: nonpositive market_cap for " + o.stock_id + " on " + o.date);
    if (!(o.traded_value > 0.0) || !std::isfinite(o.traded_value))
      throw DataError("panel: nonpositive traded_value for " + o.stock_id + " on " + o.date);
    if (!std::isfinite(o.flow) || !std::isfinite(o.ret))
      throw DataError("panel: nonfinite flow or return for " + o.stock_id + " on " + o.date);
  }

  std::sort(observations.begin(), observations.end(),
            [](const PanelObservation& a, const PanelObservation& b) {
              if (a.date != b.date) return a.date < b.date;
              return a.stock_id < b.stock_id;
            });
  for (std::size_t i = 1; i < observations.size(); ++i) {
    if (observations[i].date == observations[i - 1].date &&
        observations[i].stock_id == observations[i - 1].stock_id)
      throw DataError("panel: duplicate (date, stock_id): " + observations[i].date + "/" +
                      observations[i].stock_id);
  }

  Panel p;
  p.rows = std::move(observations);
  for (const PanelObservation& o : p.rows) {
    if (p.dates.empty() || p.dates.back() != o.date) p.dates.push_back(o.date);
    p.stocks.push_back(o.stock_id);
  }
  std::sort(p.stocks.begin(), p.stocks.end());
  p.stocks.erase(std::unique(p.stocks.begin(), p.stocks.end()), p.stocks.end());

  p.day_of_row.reserve(p.rows.size());
  p.stock_of_row.reserve(p.rows.size());
  int day = -1;
  const std::string* prev_date = nullptr;
  for (const PanelObservation& o : p.rows) {
    if (prev_date == nullptr || *prev_date != o.date) {
      ++day;
      prev_date = &o.date;
    }
    p.day_of_row.push_back(day);
    const auto it = std::lower_bound(p.stocks.begin(), p.stocks.end(), o.stock_id);
    p.stock_of_row.push_back(static_cast<int>(it - p.stocks.begin()));
  }
  return p;
}

// ------------------------------------------------------------ transforms

std::vector<double> winsorize(std::span<const double> values, double lower, double upper) {
  if (values.empty()) throw DataError("winsorize: empty input");
  if (!(lower >= 0.0) || !(upper <= 1.0) || !(lower < upper))
    throw ConfigError("winsorize: bounds must satisfy 0 <= lower < upper <= 1");
  for (double v : values)
    if (!std::isfinite(v)) throw DataError("winsorize: nonfinite value");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const long n = static_cast<long>(sorted.size());
  const double lo = lower == 0.0 ? -std::numeric_limits<double>::infinity()
                                 : sorted[quantile_rank(n, lower) - 1];
  const double hi = upper == 1.0 ? std::numeric_limits<double>::infinity()
                                 : sorted[quantile_rank(n, upper) - 1];

  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v = std::clamp(v, lo, hi);
  return out;
}

GroupZscore zscore_by_group(std::span<const double> values, std::span<const int> group_of_row,
                            int n_groups) {
  if (values.size() != group_of_row.size())
    throw DataError("zscore_by_group: size mismatch");
  if (n_groups < 0) throw DataError("zscore_by_group: negative group count");
  for (int g : group_of_row)
    if (g < 0 || g >= n_groups) throw DataError("zscore_by_group: group index out of range");

  std::vector<long> count(n_groups, 0);
  std::vector<double> sum(n_groups, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    count[group_of_row[i]] += 1;
    sum[group_of_row[i]] += values[i];
  }
  std::vector<double> mean(n_groups, 0.0);
  for (int g = 0; g < n_groups; ++g)
    if (count[g] > 0) mean[g] = sum[g] / static_cast<double>(count[g]);

  std::vector<double> ss(n_groups, 0.0);
  std::vector<char> constant(n_groups, 1);
  std::vector<double> first(n_groups, 0.0);
  std::vector<char> seen(n_groups, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int g = group_of_row[i];
    const double d = values[i] - mean[g];
    ss[g] += d * d;
    if (!seen[g]) {
      seen[g] = 1;
      first[g] = values[i];
    } else if (values[i] != first[g]) {
      constant[g] = 0;
    }
  }

  GroupZscore out;
  out.group_excluded.assign(n_groups, 0);
  out.n_groups_excluded = 0;
  out.n_rows_excluded = 0;
  std::vector<double> sd(n_groups, 0.0);
  for (int g = 0; g < n_groups; ++g) {
    if (count[g] < 3 || constant[g]) {
      out.group_excluded[g] = 1;
      ++out.n_groups_excluded;
    } else {
      sd[g] = std::sqrt(ss[g] / static_cast<double>(count[g] - 1));
    }
  }

  out.values.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int g = group_of_row[i];
    if (out.group_excluded[g]) {
      out.values[i] = kNan;
      ++out.n_rows_excluded;
    } else {
      out.values[i] = (values[i] - mean[g]) / sd[g];
    }
  }
  return out;
}

ForwardReturns forward_return(const Panel& panel, int horizon) {
  if (horizon < 1) throw ConfigError("forward_return: horizon must be >= 1");
  ForwardReturns out;
  out.values.assign(panel.rows.size(), kNan);
  out.n_dropped = 0;

  // Rows are date-sorted, so appending row indices per stock yields each
  // stock's time series in order.
  std::vector<std::vector<long>> by_stock(panel.n_stocks());
  for (long i = 0; i < panel.n_rows(); ++i)
    by_stock[panel.stock_of_row[i]].push_back(i);

  for (const std::vector<long>& seq : by_stock) {
    const long len = static_cast<long>(seq.size());
    for (long j = 0; j < len; ++j) {
      if (j + horizon >= len) {
        ++out.n_dropped;
        continue;
      }
      double acc = 1.0;
      for (long l = j + 1; l <= j + horizon; ++l) acc *= 1.0 + panel.rows[seq[l]].ret;
      out.values[seq[j]] = acc - 1.0;
    }
  }
  return out;
}

// -------------------------------------------------------- regression spec

void RegressionSpec::validate() const {
  if (regressors.empty()) throw ConfigError("regression spec: no regressors");
  for (const std::string& r : regressors)
    if (r != "s_mc" && r != "s_tv")
      throw ConfigError("regression spec: unknown regressor '" + r + "' (expected s_mc or s_tv)");
  for (std::size_t i = 0; i < regressors.size(); ++i)
    for (std::size_t j = i + 1; j < regressors.size(); ++j)
      if (regressors[i] == regressors[j])
        throw ConfigError("regression spec: duplicate regressor '" + regressors[i] + "'");
  if (dependent == Dependent::forward_return && horizon != 1 && horizon != 5 && horizon != 20)
    throw ConfigError("regression spec: horizon must be one of {1, 5, 20} (got " +
                      std::to_string(horizon) + ")");
  if (!(winsor_lower >= 0.0) || !(winsor_upper <= 1.0) || !(winsor_lower < winsor_upper))
    throw ConfigError("regression spec: winsor bounds must satisfy 0 <= lower < upper <= 1");
  if (!(log_constant > 0.0) || !std::isfinite(log_constant))
    throw ConfigError("regression spec: log_constant must be finite and > 0");
}

namespace {

// Regression columns over the full panel, with the pipeline applied in a
// fixed order: raw ratios -> winsorize -> (optional) within-day z-score.
struct BuiltVars {
  std::vector<std::string> names;
  std::vector<std::vector<double>> x;  // one column per regressor
  std::vector<double> y;
  std::vector<char> usable;            // row enters estimation
  long n_forward_dropped = 0;
  int n_zscore_excluded_days = 0;      // days dropped by degenerate z-scoring
};

// Winsorizes column `vals` over the usable rows, pooled or within day.
void winsorize_usable(std::vector<double>& vals, const std::vector<char>& usable,
                      const Panel& panel, const RegressionSpec& spec) {
  const long n = static_cast<long>(vals.size());
  if (spec.winsor_scope == WinsorScope::pooled) {
    std::vector<long> idx;
    std::vector<double> sub;
    for (long i = 0; i < n; ++i)
      if (usable[i]) {
        idx.push_back(i);
        sub.push_back(vals[i]);
      }
    if (sub.empty()) return;
    const std::vector<double> w = winsorize(sub, spec.winsor_lower, spec.winsor_upper);
    for (std::size_t j = 0; j < idx.size(); ++j) vals[idx[j]] = w[j];
    return;
  }
  // per-day
  std::vector<std::vector<long>> day_rows(panel.n_days());
  for (long i = 0; i < n; ++i)
    if (usable[i]) day_rows[panel.day_of_row[i]].push_back(i);
  for (const std::vector<long>& rows : day_rows) {
    if (rows.empty()) continue;
    std::vector<double> sub;
    sub.reserve(rows.size());
    for (long i : rows) sub.push_back(vals[i]);
    const std::vector<double> w = winsorize(sub, spec.winsor_lower, spec.winsor_upper);
    for (std::size_t j = 0; j < rows.size(); ++j) vals[rows[j]] = w[j];
  }
}

BuiltVars build_variables(const Panel& panel, const RegressionSpec& spec, bool standardize) {
  spec.validate();
  if (panel.rows.empty()) throw DataError("empty panel");
  const long n = panel.n_rows();

  BuiltVars vars;
  vars.names = spec.regressors;
  for (const std::string& name : spec.regressors) {
    std::vector<double> col(n);
    for (long i = 0; i < n; ++i) {
      const PanelObservation& o = panel.rows[i];
      col[i] = name == "s_mc" ? o.flow / o.market_cap : o.flow / o.traded_value;
    }
    vars.x.push_back(std::move(col));
  }

  if (spec.dependent == Dependent::forward_return) {
    ForwardReturns fwd = forward_return(panel, spec.horizon);
    vars.y = std::move(fwd.values);
    vars.n_forward_dropped = fwd.n_dropped;
  } else {
    vars.y.resize(n);
    for (long i = 0; i < n; ++i)
      vars.y[i] = std::log(spec.log_constant + std::fabs(panel.rows[i].flow));
  }

  vars.usable.resize(n);
  for (long i = 0; i < n; ++i) vars.usable[i] = std::isfinite(vars.y[i]) ? 1 : 0;

  for (std::vector<double>& col : vars.x) winsorize_usable(col, vars.usable, panel, spec);
  winsorize_usable(vars.y, vars.usable, panel, spec);

  if (standardize && spec.standardize_within_day) {
    // Compact the usable rows, z-score each regressor within day, and drop
    // whole days that any regressor finds degenerate.
    std::vector<long> idx;
    for (long i = 0; i < n; ++i)
      if (vars.usable[i]) idx.push_back(i);
    if (!idx.empty()) {
      std::vector<int> day_of(idx.size());
      for (std::size_t j = 0; j < idx.size(); ++j) day_of[j] = panel.day_of_row[idx[j]];
      std::vector<char> day_has_rows(panel.n_days(), 0);
      for (int d : day_of) day_has_rows[d] = 1;

      std::vector<char> day_dropped(panel.n_days(), 0);
      for (std::vector<double>& col : vars.x) {
        std::vector<double> sub(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) sub[j] = col[idx[j]];
        const GroupZscore z = zscore_by_group(sub, day_of, panel.n_days());
        for (std::size_t j = 0; j < idx.size(); ++j) col[idx[j]] = z.values[j];
        for (int d = 0; d < panel.n_days(); ++d)
          if (z.group_excluded[d] && day_has_rows[d]) day_dropped[d] = 1;
      }
      for (int d = 0; d < panel.n_days(); ++d)
        if (day_dropped[d]) ++vars.n_zscore_excluded_days;
      for (long i : idx)
        if (day_dropped[panel.day_of_row[i]]) vars.usable[i] = 0;
    }
  }
  return vars;
}

struct DayOls {
  bool ok;
  const char* why;              // set when !ok
  std::vector<double> coefs;    // regressors only, intercept dropped
  double r2;
};

DayOls day_ols(const BuiltVars& vars, const std::vector<long>& rows) {
  const int k = static_cast<int>(vars.x.size());
  const int n = static_cast<int>(rows.size());
  DayOls out{false, "", {}, 0.0};

  Eigen::MatrixXd a(n, k + 1);
  Eigen::VectorXd yv(n);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (int j = 0; j < k; ++j) a(i, j + 1) = vars.x[j][rows[i]];
    yv(i) = vars.y[rows[i]];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < k + 1) {
    out.why = "rank-deficient";
    return out;
  }
  const Eigen::VectorXd b = qr.solve(yv);
  const double ssr = (yv - a * b).squaredNorm();
  const double my = yv.mean();
  const double sst = (yv.array() - my).matrix().squaredNorm();
  if (sst == 0.0) {
    out.why = "constant dependent";
    return out;
  }
  out.ok = true;
  out.r2 = 1.0 - ssr / sst;
  out.coefs.resize(k);
  for (int j = 0; j < k; ++j) out.coefs[j] = b(j + 1);
  return out;
}

}  // namespace

// ---------------------------------------------------------- Fama-MacBeth

FMResult fama_macbeth(const Panel& panel, const RegressionSpec& spec) {
  const BuiltVars vars = build_variables(panel, spec, /*standardize=*/true);
  const int k = static_cast<int>(vars.x.size());

  std::vector<std::vector<long>> day_rows(panel.n_days());
  for (long i = 0; i < panel.n_rows(); ++i)
    if (vars.usable[i]) day_rows[panel.day_of_row[i]].push_back(i);

  FMResult res;
  res.n_days_excluded = vars.n_zscore_excluded_days;
  res.n_days_used = 0;
  res.n_obs = 0;
  std::vector<std::vector<double>> daily(k);
  std::vector<double> r2s;

  for (const std::vector<long>& rows : day_rows) {
    if (rows.empty()) continue;
    // A usable day needs more observations than regressors plus intercept.
    if (static_cast<int>(rows.size()) < k + 2) {
      ++res.n_days_excluded;
      continue;
    }
    const DayOls ols = day_ols(vars, rows);
    if (!ols.ok) {
      ++res.n_days_excluded;
      continue;
    }
    for (int j = 0; j < k; ++j) daily[j].push_back(ols.coefs[j]);
    r2s.push_back(ols.r2);
    ++res.n_days_used;
    res.n_obs += static_cast<long>(rows.size());
  }

  if (res.n_days_used < 2)
    throw NumericError("fama_macbeth: fewer than 2 usable days (" +
                       std::to_string(res.n_days_used) + ")");

  const double t_days = static_cast<double>(res.n_days_used);
  for (int j = 0; j < k; ++j) {
    FmRegressor reg;
    reg.name = vars.names[j];
    reg.mean_coef = stats::mean(daily[j]);
    const double sd = stats::sample_std(daily[j]);
    if (sd == 0.0)
      throw NumericError("fama_macbeth: daily coefficients for " + reg.name +
                         " have zero variance");
    reg.se = sd / std::sqrt(t_days);
    reg.t_stat = reg.mean_coef / reg.se;
    reg.daily_coefs = std::move(daily[j]);
    res.regressors.push_back(std::move(reg));
  }
  res.avg_r2 = stats::mean(r2s);
  res.avg_stocks_per_day = static_cast<double>(res.n_obs) / t_days;
  return res;
}

// ------------------------------------------------------------- pooled FE

FEResult pooled_fe(const Panel& panel, const RegressionSpec& spec) {
  // Within-day standardization is a cross-sectional-pipeline feature; the
  // pooled estimator uses the raw (winsorized) columns.
  const BuiltVars vars = build_variables(panel, spec, /*standardize=*/false);
  const int k = static_cast<int>(vars.x.size());

  std::vector<long> rows;
  for (long i = 0; i < panel.n_rows(); ++i)
    if (vars.usable[i]) rows.push_back(i);
  const long n = static_cast<long>(rows.size());
  if (n == 0) throw DataError("pooled_fe: no usable observations");

  // Compact stock and day indices over the estimation sample.
  std::vector<int> stock_map(panel.n_stocks(), -1), day_map(panel.n_days(), -1);
  int n_stocks = 0, n_days = 0;
  std::vector<int> s_of(n), d_of(n);
  for (long j = 0; j < n; ++j) {
    const long i = rows[j];
    int& sm = stock_map[panel.stock_of_row[i]];
    if (sm < 0) sm = n_stocks++;
    int& dm = day_map[panel.day_of_row[i]];
    if (dm < 0) dm = n_days++;
    s_of[j] = sm;
    d_of[j] = dm;
  }
  if (n_stocks < 2 || n_days < 2)
    throw NumericError("pooled_fe: need at least 2 stocks and 2 days, got " +
                       std::to_string(n_stocks) + " stocks / " + std::to_string(n_days) + " days");
  if (n <= k)
    throw NumericError("pooled_fe: more regressors than observations");

  // Gather estimation columns (k regressors + dependent).
  std::vector<std::vector<double>> cols(k + 1, std::vector<double>(n));
  std::vector<double> orig_scale(k, 0.0);
  for (int j = 0; j < k; ++j) {
    for (long i = 0; i < n; ++i) {
      cols[j][i] = vars.x[j][rows[i]];
      orig_scale[j] = std::max(orig_scale[j], std::fabs(cols[j][i]));
    }
  }
  for (long i = 0; i < n; ++i) cols[k][i] = vars.y[rows[i]];

  // Alternate stock- and day-demeaning sweeps until the largest cell change
  // falls below tolerance.
  constexpr double kTol = 1e-10;
  constexpr int kMaxIter = 10000;
  std::vector<std::vector<double>> prev(cols.size());
  std::vector<double> gsum;
  std::vector<long> gcount;
  int iterations = 0;
  double delta = std::numeric_limits<double>::infinity();
  while (iterations < kMaxIter && delta >= kTol) {
    ++iterations;
    prev = cols;
    for (std::vector<double>& col : cols) {
      gsum.assign(n_stocks, 0.0);
      gcount.assign(n_stocks, 0);
      for (long i = 0; i < n; ++i) {
        gsum[s_of[i]] += col[i];
        gcount[s_of[i]] += 1;
      }
      for (long i = 0; i < n; ++i) col[i] -= gsum[s_of[i]] / static_cast<double>(gcount[s_of[i]]);
      gsum.assign(n_days, 0.0);
      gcount.assign(n_days, 0);
      for (long i = 0; i < n; ++i) {
        gsum[d_of[i]] += col[i];
        gcount[d_of[i]] += 1;
      }
      for (long i = 0; i < n; ++i) col[i] -= gsum[d_of[i]] / static_cast<double>(gcount[d_of[i]]);
    }
    delta = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c)
      for (long i = 0; i < n; ++i)
        delta = std::max(delta, std::fabs(cols[c][i] - prev[c][i]));
  }
  if (delta >= kTol)
    throw NumericError("pooled_fe: demeaning did not converge after " +
                       std::to_string(iterations) + " iterations (last delta " +
                       std::to_string(delta) + ")");

  for (int j = 0; j < k; ++j) {
    double after = 0.0;
    for (long i = 0; i < n; ++i) after = std::max(after, std::fabs(cols[j][i]));
    if (after < 1e-12 * (1.0 + orig_scale[j]))
      throw NumericError("pooled_fe: regressor " + vars.names[j] +
                         " is absorbed by the fixed effects");
  }

  Eigen::MatrixXd a(n, k);
  Eigen::VectorXd yv(n);
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) a(i, j) = cols[j][i];
    yv(i) = cols[k][i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < k)
    throw NumericError("pooled_fe: regressors collinear after demeaning");
  const Eigen::VectorXd b = qr.solve(yv);
  const Eigen::VectorXd u = yv - a * b;
  const double ssr = u.squaredNorm();
  const double sst = yv.squaredNorm();
  if (sst == 0.0)
    throw NumericError("pooled_fe: dependent variable absorbed by the fixed effects");

  FEResult res;
  res.n_obs = n;
  res.n_stocks = n_stocks;
  res.n_days = n_days;
  res.demean_iterations = iterations;
  res.demean_max_delta = delta;
  res.within_r2 = std::clamp(1.0 - ssr / sst, 0.0, 1.0);

  // Two-way clustered variance: stock meat + day meat - intersection meat.
  // (date, stock) cells are unique rows, so the intersection term is the
  // heteroskedasticity-robust one.
  const Eigen::MatrixXd bread =
      (a.transpose() * a).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd au = u.asDiagonal() * a;  // rows scaled by residuals

  Eigen::MatrixXd scores_s = Eigen::MatrixXd::Zero(n_stocks, k);
  Eigen::MatrixXd scores_d = Eigen::MatrixXd::Zero(n_days, k);
  for (long i = 0; i < n; ++i) {
    scores_s.row(s_of[i]) += au.row(i);
    scores_d.row(d_of[i]) += au.row(i);
  }
  const Eigen::MatrixXd meat_s = scores_s.transpose() * scores_s;
  const Eigen::MatrixXd meat_d = scores_d.transpose() * scores_d;
  const Eigen::MatrixXd meat_c = au.transpose() * au;

  const double dn = static_cast<double>(n);
  const double dk = static_cast<double>(k);
  res.adj_stock = (static_cast<double>(n_stocks) / (n_stocks - 1.0)) * ((dn - 1.0) / (dn - dk));
  res.adj_day = (static_cast<double>(n_days) / (n_days - 1.0)) * ((dn - 1.0) / (dn - dk));
  res.adj_cell = dn / (dn - dk);

  const Eigen::MatrixXd v =
      bread * (res.adj_stock * meat_s + res.adj_day * meat_d - res.adj_cell * meat_c) * bread;

  res.variance_clamped = false;
  for (int j = 0; j < k; ++j) {
    FeRegressor reg;
    reg.name = vars.names[j];
    reg.coef = b(j);
    double var = v(j, j);
    if (var < 0.0) {
      var = 0.0;
      res.variance_clamped = true;
    }
    reg.se = std::sqrt(var);
    reg.t_stat = reg.se > 0.0 ? reg.coef / reg.se : kNan;
    res.regressors.push_back(std::move(reg));
  }
  return res;
}

// --------------------------------------------------------- group driver

std::vector<GroupedFm> fama_macbeth_by_group(const Panel& panel, const RegressionSpec& spec,
                                             GroupBy group_by,
                                             const std::map<std::string, std::string>* tags) {
  if (panel.rows.empty()) throw DataError("empty panel");
  spec.validate();

  // Ordered group label per row.
  std::vector<std::string> label(panel.rows.size());
  std::vector<std::string> group_order;

  if (group_by == GroupBy::mcap_quintile) {
    const long n = panel.n_rows();
    std::vector<long> idx(n);
    std::iota(idx.begin(), idx.end(), 0L);
    std::stable_sort(idx.begin(), idx.end(), [&](long a, long b) {
      return panel.rows[a].market_cap < panel.rows[b].market_cap;
    });
    for (int q = 0; q < 5; ++q) {
      const long lo = q * n / 5;        // integer block boundaries
      const long hi = (q + 1) * n / 5;
      for (long r = lo; r < hi; ++r) label[idx[r]] = "Q" + std::to_string(q + 1);
      if (hi > lo) group_order.push_back("Q" + std::to_string(q + 1));
    }
  } else if (group_by == GroupBy::year) {
    for (std::size_t i = 0; i < panel.rows.size(); ++i)
      label[i] = panel.rows[i].date.substr(0, 4);
  } else {
    if (tags == nullptr) throw ConfigError("tag grouping requires a tag map");
    for (std::size_t i = 0; i < panel.rows.size(); ++i) {
      const auto it = tags->find(panel.rows[i].stock_id);
      label[i] = it == tags->end() ? "untagged" : it->second;
    }
  }
  if (group_order.empty()) {
    std::vector<std::string> uniq(label);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    group_order = std::move(uniq);
  }

  std::vector<GroupedFm> out;
  for (const std::string& g : group_order) {
    std::vector<PanelObservation> subset;
    for (std::size_t i = 0; i < panel.rows.size(); ++i)
      if (label[i] == g) subset.push_back(panel.rows[i]);
    GroupedFm gf;
    gf.group = g;
    try {
      gf.result = fama_macbeth(Panel::build(std::move(subset)), spec);
      gf.ok = true;
    } catch (const Error& e) {
      gf.ok = false;
      gf.error = e.what();
    }
    out.push_back(std::move(gf));
  }
  return out;
}

}  // namespace flownorm::econo

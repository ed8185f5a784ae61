#pragma once

// Shared test helpers: independent oracles (quadrature moments, hand-rolled
// least squares, cross-sectional and dummy-variable estimators), a synthetic
// panel builder, and process/filesystem utilities for exercising the CLI.
//
// Oracles deliberately avoid the library's own numeric routines so that an
// agreement test compares two routes, not one route with itself.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flownorm/econo.hpp"
#include "flownorm/rng.hpp"

namespace support {

namespace fs = std::filesystem;

// ------------------------------------------------------------ filesystem

struct TempDir {
  fs::path path;

  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "flownorm-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  fs::path operator/(const std::string& name) const { return path / name; }
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

inline bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

inline std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::string line;
  std::istringstream in(s);
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

// --------------------------------------------------------------- CLI runs

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

// Runs the installed CLI binary with `args`, capturing exit code and both
// output streams.
inline CliResult run_cli(const std::string& args) {
  TempDir cap;
  const fs::path out_f = cap / "out.txt";
  const fs::path err_f = cap / "err.txt";
  const std::string cmd = std::string("\"") + FLOWNORM_CLI_PATH + "\" " + args + " > \"" +
                          out_f.string() + "\" 2> \"" + err_f.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_f);
  r.err = read_file(err_f);
  return r;
}

// ------------------------------------------------------------- quadrature

// Composite Simpson's rule with n (even) intervals.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 != 0 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// E[g(tau)] for tau ~ Uniform[a, b], by quadrature.
template <class G>
double uniform_expectation(G g, double a, double b) {
  if (a == b) return g(a);
  return simpson(g, a, b, 200000) / (b - a);
}

// ---------------------------------------------------- distribution oracles

// Two-sided Student-t tail probability from the df = 3 closed form.
inline double t3_two_sided_p(double t) {
  const double x = std::fabs(t) / std::sqrt(3.0);
  return 1.0 - (2.0 / std::numbers::pi) * (std::atan(x) + x / (1.0 + x * x));
}

// df = 1 (Cauchy) closed form.
inline double t1_two_sided_p(double t) {
  return 1.0 - (2.0 / std::numbers::pi) * std::atan(std::fabs(t));
}

// ---------------------------------------------------------- linear algebra

// Solves a x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    if (std::fabs(a[p][c]) < 1e-280) throw std::runtime_error("solve_linear: singular matrix");
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (int r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (int j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (int c = n - 1; c >= 0; --c) {
    double s = b[c];
    for (int j = c + 1; j < n; ++j) s -= a[c][j] * x[j];
    x[c] = s / a[c][c];
  }
  return x;
}

struct OlsFit {
  std::vector<double> coef;  // one per design column
  double ssr;                // residual sum of squares
};

// Least squares of y on the given design columns via normal equations.
inline OlsFit ols_normal(const std::vector<std::vector<double>>& cols,
                         const std::vector<double>& y) {
  const int p = static_cast<int>(cols.size());
  const int n = static_cast<int>(y.size());
  std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      double s = 0.0;
      for (int r = 0; r < n; ++r) s += cols[i][r] * cols[j][r];
      xtx[i][j] = xtx[j][i] = s;
    }
    double s = 0.0;
    for (int r = 0; r < n; ++r) s += cols[i][r] * y[r];
    xty[i] = s;
  }
  OlsFit fit;
  fit.coef = solve_linear(std::move(xtx), std::move(xty));
  fit.ssr = 0.0;
  for (int r = 0; r < n; ++r) {
    double pred = 0.0;
    for (int i = 0; i < p; ++i) pred += fit.coef[i] * cols[i][r];
    const double e = y[r] - pred;
    fit.ssr += e * e;
  }
  return fit;
}

inline double vec_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double vec_sample_std(const std::vector<double>& v) {
  const double m = vec_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// -------------------------------------------------- transform reimplementations

// Same ceil-rank quantile convention as the library, reimplemented.
inline std::vector<double> winsorize_oracle(std::vector<double> v, double lower, double upper) {
  std::vector<double> s(v);
  std::sort(s.begin(), s.end());
  const long n = static_cast<long>(s.size());
  const auto rank = [n](double p) {
    long r = static_cast<long>(std::ceil(static_cast<double>(n) * p - 1e-9));
    return std::min(std::max(r, 1L), n);
  };
  const double lo = lower == 0.0 ? -std::numeric_limits<double>::infinity() : s[rank(lower) - 1];
  const double hi = upper == 1.0 ? std::numeric_limits<double>::infinity() : s[rank(upper) - 1];
  for (double& x : v) x = std::min(std::max(x, lo), hi);
  return v;
}

// --------------------------------------------------- synthetic flow panels

struct PanelParams {
  int t_days = 20;
  int n_stocks = 50;
  double sigma_alpha = 0.05;
  double sigma_zeta = 3.5;
  double k = 1.0;
  double mu_log_m = 20.0;
  double sigma_log_m = 2.0;
  double tau_min = 0.0005;
  double tau_max = 0.01;
  double gamma = 1.0;
  double sigma_eps = 0.03;
  double delta = 0.0;  // loading on the signal-turnover interaction in returns
  std::uint64_t seed = 7;
  std::string start_date = "2020-01-01";
};

inline bool leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int days_in_month(int y, int m) {
  static const int d[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && leap_year(y)) return 29;
  return d[m - 1];
}

inline std::string next_date(const std::string& date) {
  int y = std::stoi(date.substr(0, 4));
  int m = std::stoi(date.substr(5, 2));
  int d = std::stoi(date.substr(8, 2));
  if (++d > days_in_month(y, m)) {
    d = 1;
    if (++m > 12) {
      m = 1;
      ++y;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

inline std::vector<std::string> make_dates(const std::string& start, int n) {
  std::vector<std::string> out;
  out.reserve(n);
  std::string d = start;
  for (int i = 0; i < n; ++i) {
    out.push_back(d);
    d = next_date(d);
  }
  return out;
}

// Builds a panel whose day-t signals predict day-t+1 returns:
//   flow_{s,t}  = k * alpha_{s,t} * m_s + zeta_{s,t} * tau_{s,t} * m_s
//   ret_{s,t+1} = gamma * alpha_{s,t}
//               + delta * k * alpha_{s,t} * (1/tau_{s,t} - E[1/tau])
//               + eps_{s,t+1}
// Market caps are drawn once per stock and held fixed. delta < 0 makes the
// turnover-sensitive component of flow negatively informative.
inline std::vector<flownorm::econo::PanelObservation> make_signal_panel(const PanelParams& p) {
  namespace rng = flownorm::rng;
  const std::vector<std::string> dates = make_dates(p.start_date, p.t_days);
  const int n = p.n_stocks;

  rng::Engine meng(rng::stream_seed(p.seed, 0));
  std::vector<double> log_m(n);
  rng::fill_gaussian(meng, log_m, p.mu_log_m, p.sigma_log_m);
  std::vector<double> m(n);
  for (int s = 0; s < n; ++s) m[s] = std::exp(log_m[s]);

  const double mean_inv_tau = p.tau_min == p.tau_max
                                  ? 1.0 / p.tau_min
                                  : std::log(p.tau_max / p.tau_min) / (p.tau_max - p.tau_min);

  std::vector<flownorm::econo::PanelObservation> rows;
  rows.reserve(static_cast<std::size_t>(p.t_days) * n);
  std::vector<double> alpha(n), tau(n), zeta(n), eps(n);
  std::vector<double> prev_alpha, prev_tau;
  for (int t = 0; t < p.t_days; ++t) {
    rng::Engine eng(rng::stream_seed(p.seed, 1000000 + static_cast<std::uint64_t>(t)));
    rng::fill_gaussian(eng, alpha, 0.0, p.sigma_alpha);
    rng::fill_uniform(eng, tau, p.tau_min, p.tau_max);
    rng::fill_gaussian(eng, zeta, 0.0, p.sigma_zeta);
    rng::fill_gaussian(eng, eps, 0.0, p.sigma_eps);

    for (int s = 0; s < n; ++s) {
      flownorm::econo::PanelObservation o;
      o.date = dates[t];
      char id[16];
      std::snprintf(id, sizeof id, "S%04d", s + 1);
      o.stock_id = id;
      o.market_cap = m[s];
      o.traded_value = tau[s] * m[s];
      o.flow = p.k * alpha[s] * m[s] + zeta[s] * o.traded_value;
      double ret = eps[s];
      if (t > 0)
        ret += p.gamma * prev_alpha[s] +
               p.delta * p.k * prev_alpha[s] * (1.0 / prev_tau[s] - mean_inv_tau);
      o.ret = ret;
      rows.push_back(std::move(o));
    }
    prev_alpha = alpha;
    prev_tau = tau;
  }
  return rows;
}

// ------------------------------------------------ estimator oracle (daily)

struct OracleFm {
  std::vector<std::string> names;
  std::vector<double> mean_coef, se, t_stat;
  double avg_r2 = 0.0;
  int n_days_used = 0;
  int n_days_excluded = 0;
  long n_obs = 0;
};

namespace detail {

struct OracleVars {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  std::vector<char> usable;
  int n_zscore_excluded_days = 0;
};

inline OracleVars build_vars_oracle(const flownorm::econo::Panel& panel,
                                    const flownorm::econo::RegressionSpec& spec,
                                    bool standardize) {
  using flownorm::econo::Dependent;
  using flownorm::econo::WinsorScope;
  const long n = panel.n_rows();
  OracleVars v;

  for (const std::string& name : spec.regressors) {
    std::vector<double> col(n);
    for (long i = 0; i < n; ++i) {
      const auto& o = panel.rows[i];
      col[i] = name == "s_mc" ? o.flow / o.market_cap : o.flow / o.traded_value;
    }
    v.x.push_back(std::move(col));
  }

  v.y.assign(n, std::numeric_limits<double>::quiet_NaN());
  if (spec.dependent == Dependent::forward_return) {
    // Per-stock positional forward compounding.
    std::vector<std::vector<long>> by_stock(panel.n_stocks());
    for (long i = 0; i < n; ++i) by_stock[panel.stock_of_row[i]].push_back(i);
    for (const auto& seq : by_stock) {
      const long len = static_cast<long>(seq.size());
      for (long j = 0; j + spec.horizon < len; ++j) {
        double acc = 1.0;
        for (long l = j + 1; l <= j + spec.horizon; ++l) acc *= 1.0 + panel.rows[seq[l]].ret;
        v.y[seq[j]] = acc - 1.0;
      }
    }
  } else {
    for (long i = 0; i < n; ++i)
      v.y[i] = std::log(spec.log_constant + std::fabs(panel.rows[i].flow));
  }

  v.usable.assign(n, 0);
  for (long i = 0; i < n; ++i) v.usable[i] = std::isfinite(v.y[i]) ? 1 : 0;

  const auto winsor_col = [&](std::vector<double>& col) {
    if (spec.winsor_scope == WinsorScope::pooled) {
      std::vector<long> idx;
      std::vector<double> sub;
      for (long i = 0; i < n; ++i)
        if (v.usable[i]) {
          idx.push_back(i);
          sub.push_back(col[i]);
        }
      if (sub.empty()) return;
      const std::vector<double> w = winsorize_oracle(sub, spec.winsor_lower, spec.winsor_upper);
      for (std::size_t j = 0; j < idx.size(); ++j) col[idx[j]] = w[j];
    } else {
      for (int d = 0; d < panel.n_days(); ++d) {
        std::vector<long> idx;
        std::vector<double> sub;
        for (long i = 0; i < n; ++i)
          if (v.usable[i] && panel.day_of_row[i] == d) {
            idx.push_back(i);
            sub.push_back(col[i]);
          }
        if (sub.empty()) continue;
        const std::vector<double> w = winsorize_oracle(sub, spec.winsor_lower, spec.winsor_upper);
        for (std::size_t j = 0; j < idx.size(); ++j) col[idx[j]] = w[j];
      }
    }
  };
  for (auto& col : v.x) winsor_col(col);
  winsor_col(v.y);

  if (standardize && spec.standardize_within_day) {
    std::vector<char> day_dropped(panel.n_days(), 0);
    for (auto& col : v.x) {
      for (int d = 0; d < panel.n_days(); ++d) {
        std::vector<long> idx;
        for (long i = 0; i < n; ++i)
          if (v.usable[i] && panel.day_of_row[i] == d) idx.push_back(i);
        if (idx.empty()) continue;
        bool constant = true;
        for (long i : idx)
          if (col[i] != col[idx[0]]) {
            constant = false;
            break;
          }
        if (idx.size() < 3 || constant) {
          day_dropped[d] = 1;
          continue;
        }
        std::vector<double> sub;
        for (long i : idx) sub.push_back(col[i]);
        const double mu = vec_mean(sub);
        const double sd = vec_sample_std(sub);
        for (long i : idx) col[i] = (col[i] - mu) / sd;
      }
    }
    for (int d = 0; d < panel.n_days(); ++d)
      if (day_dropped[d]) ++v.n_zscore_excluded_days;
    for (long i = 0; i < n; ++i)
      if (v.usable[i] && day_dropped[panel.day_of_row[i]]) v.usable[i] = 0;
  }
  return v;
}

}  // namespace detail

// Cross-sectional estimator reimplemented from the documented pipeline:
// raw ratios, winsorize over the estimation sample, optional within-day
// z-scores, per-day least squares with intercept, time-series aggregation.
inline OracleFm fm_oracle(const flownorm::econo::Panel& panel,
                          const flownorm::econo::RegressionSpec& spec) {
  const detail::OracleVars vars = detail::build_vars_oracle(panel, spec, true);
  const int k = static_cast<int>(vars.x.size());
  OracleFm res;
  res.names = spec.regressors;
  res.n_days_excluded = vars.n_zscore_excluded_days;

  std::vector<std::vector<double>> daily(k);
  std::vector<double> r2s;
  for (int d = 0; d < panel.n_days(); ++d) {
    std::vector<long> rows;
    for (long i = 0; i < panel.n_rows(); ++i)
      if (vars.usable[i] && panel.day_of_row[i] == d) rows.push_back(i);
    if (rows.empty()) continue;
    if (static_cast<int>(rows.size()) < k + 2) {
      ++res.n_days_excluded;
      continue;
    }
    std::vector<std::vector<double>> cols(k + 1, std::vector<double>(rows.size()));
    std::vector<double> y(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      cols[0][r] = 1.0;
      for (int j = 0; j < k; ++j) cols[j + 1][r] = vars.x[j][rows[r]];
      y[r] = vars.y[rows[r]];
    }
    double sst = 0.0;
    const double my = vec_mean(y);
    for (double yy : y) sst += (yy - my) * (yy - my);
    if (sst == 0.0) {
      ++res.n_days_excluded;
      continue;
    }
    OlsFit fit;
    try {
      fit = ols_normal(cols, y);
    } catch (const std::runtime_error&) {
      ++res.n_days_excluded;
      continue;
    }
    for (int j = 0; j < k; ++j) daily[j].push_back(fit.coef[j + 1]);
    r2s.push_back(1.0 - fit.ssr / sst);
    ++res.n_days_used;
    res.n_obs += static_cast<long>(rows.size());
  }

  const double t_days = static_cast<double>(res.n_days_used);
  for (int j = 0; j < k; ++j) {
    res.mean_coef.push_back(vec_mean(daily[j]));
    res.se.push_back(vec_sample_std(daily[j]) / std::sqrt(t_days));
    res.t_stat.push_back(res.mean_coef[j] / res.se[j]);
  }
  res.avg_r2 = vec_mean(r2s);
  return res;
}

// ------------------------------------------- estimator oracle (dummy FE)

struct OracleFe {
  std::vector<double> coef;  // regressor coefficients only
  double within_r2 = 0.0;
};

// Pooled two-way fixed effects via the explicit dummy-variable design
// (intercept + regressors + S-1 stock dummies + T-1 day dummies), solved
// with hand-rolled normal equations. The within R^2 comes from projecting
// y on the dummies alone.
inline OracleFe fe_dummy_oracle(const flownorm::econo::Panel& panel,
                                const flownorm::econo::RegressionSpec& spec) {
  const detail::OracleVars vars = detail::build_vars_oracle(panel, spec, false);
  const int k = static_cast<int>(vars.x.size());

  std::vector<long> rows;
  for (long i = 0; i < panel.n_rows(); ++i)
    if (vars.usable[i]) rows.push_back(i);
  const int n = static_cast<int>(rows.size());

  // Compact ids over the estimation sample.
  std::vector<int> smap(panel.n_stocks(), -1), dmap(panel.n_days(), -1);
  int ns = 0, nd = 0;
  std::vector<int> s_of(n), d_of(n);
  for (int r = 0; r < n; ++r) {
    int& sm = smap[panel.stock_of_row[rows[r]]];
    if (sm < 0) sm = ns++;
    int& dm = dmap[panel.day_of_row[rows[r]]];
    if (dm < 0) dm = nd++;
    s_of[r] = sm;
    d_of[r] = dm;
  }

  std::vector<std::vector<double>> dummies;
  dummies.emplace_back(n, 1.0);  // intercept
  for (int s = 1; s < ns; ++s) {
    std::vector<double> col(n, 0.0);
    for (int r = 0; r < n; ++r)
      if (s_of[r] == s) col[r] = 1.0;
    dummies.push_back(std::move(col));
  }
  for (int d = 1; d < nd; ++d) {
    std::vector<double> col(n, 0.0);
    for (int r = 0; r < n; ++r)
      if (d_of[r] == d) col[r] = 1.0;
    dummies.push_back(std::move(col));
  }

  std::vector<double> y(n);
  for (int r = 0; r < n; ++r) y[r] = vars.y[rows[r]];

  std::vector<std::vector<double>> design = dummies;
  for (int j = 0; j < k; ++j) {
    std::vector<double> col(n);
    for (int r = 0; r < n; ++r) col[r] = vars.x[j][rows[r]];
    design.insert(design.begin() + 1 + j, std::move(col));
  }

  const OlsFit full = ols_normal(design, y);
  const OlsFit fe_only = ols_normal(dummies, y);  // SSR = within SST

  OracleFe res;
  for (int j = 0; j < k; ++j) res.coef.push_back(full.coef[1 + j]);
  res.within_r2 = 1.0 - full.ssr / fe_only.ssr;
  return res;
}

}  // namespace support

#include "flownorm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include "flownorm/errors.hpp"
#include "flownorm/version.hpp"

namespace flownorm::io {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// %.6g display formatting for result tables.
std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Shortest round-trip formatting for data that must survive re-reading.
std::string fmt_exact(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_double_token(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

bool parse_long_token(const std::string& s, long long& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_u64_token(const std::string& s, std::uint64_t& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// --------------------------------------------------------- table writing

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

void write_table_with_sidecar(const std::filesystem::path& path, const std::string& kind,
                              const std::string& header, const std::vector<std::string>& rows,
                              const SidecarInfo& meta) {
  std::string body = header + "\n";
  for (const std::string& r : rows) body += r + "\n";
  write_text_file(path, body);

  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(meta.config_hash));
  std::string side;
  side += "kind = " + kind + "\n";
  side += std::string("artifact_version = ") + kVersion + "\n";
  side += "seed = " + std::to_string(meta.seed) + "\n";
  side += std::string("config_hash = ") + hash_buf + "\n";
  side += "rows = " + std::to_string(rows.size()) + "\n";
  write_text_file(path.string() + ".meta", side);
}

}  // namespace

// ------------------------------------------------------------- panel I/O

bool is_valid_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9') return false;
  const int y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
  const int m = (s[5] - '0') * 10 + (s[6] - '0');
  const int d = (s[8] - '0') * 10 + (s[9] - '0');
  if (m < 1 || m > 12 || d < 1) return false;
  static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int dim = days[m - 1];
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) dim = 29;
  return d <= dim;
}

PanelRead read_panel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open panel file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError("panel file is empty: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPanelHeader)
    throw DataError("malformed panel header in " + path.string() + " (expected '" +
                    std::string(kPanelHeader) + "')");

  PanelRead out;
  std::unordered_set<std::string> seen;
  long line_no = 1;

  auto reject = [&](long ln, const std::string& reason) {
    ++out.report.n_rejected;
    if (static_cast<int>(out.report.rejects.size()) < PanelReadReport::kMaxStoredRejects)
      out.report.rejects.push_back({ln, reason});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++out.report.n_data_rows;

    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 6) {
      reject(line_no, "expected 6 fields, got " + std::to_string(f.size()));
      continue;
    }
    if (!is_valid_date(f[0])) {
      reject(line_no, "invalid date '" + f[0] + "'");
      continue;
    }
    if (f[1].empty()) {
      reject(line_no, "empty stock_id");
      continue;
    }

    static const char* names[4] = {"flow", "market_cap", "traded_value", "return"};
    double vals[4];
    bool bad = false;
    for (int j = 0; j < 4; ++j) {
      if (!parse_double_token(f[2 + j], vals[j])) {
        reject(line_no, std::string("unparseable ") + names[j] + " '" + f[2 + j] + "'");
        bad = true;
        break;
      }
      if (!std::isfinite(vals[j])) {
        reject(line_no, std::string("nonfinite ") + names[j]);
        bad = true;
        break;
      }
    }
    if (bad) continue;
    if (!(vals[1] > 0.0)) {
      reject(line_no, "nonpositive market_cap");
      continue;
    }
    if (!(vals[2] > 0.0)) {
      reject(line_no, "nonpositive traded_value");
      continue;
    }
    const std::string key = f[0] + "\x1f" + f[1];
    if (!seen.insert(key).second) {
      reject(line_no, "duplicate (date, stock_id): " + f[0] + "/" + f[1]);
      continue;
    }
    ++out.report.n_accepted;
    out.observations.push_back({f[0], f[1], vals[0], vals[1], vals[2], vals[3]});
  }
  return out;
}

void write_panel(const std::filesystem::path& path,
                 std::span<const econo::PanelObservation> observations) {
  std::string body = std::string(kPanelHeader) + "\n";
  for (const econo::PanelObservation& o : observations) {
    body += o.date + "," + o.stock_id + "," + fmt_exact(o.flow) + "," + fmt_exact(o.market_cap) +
            "," + fmt_exact(o.traded_value) + "," + fmt_exact(o.ret) + "\n";
  }
  write_text_file(path, body);
}

// --------------------------------------------------------------- config

RunConfig default_config() { return RunConfig{}; }

namespace {

std::string dependent_name(econo::Dependent d) {
  return d == econo::Dependent::forward_return ? "forward_return" : "log_abs_flow";
}

std::string scope_name(econo::WinsorScope s) {
  return s == econo::WinsorScope::pooled ? "pooled" : "per_day";
}

std::string values_to_string(const std::vector<mc::SweepValue>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += fmt_exact(values[i].a);
    if (std::isfinite(values[i].b)) out += ":" + fmt_exact(values[i].b);
  }
  return out;
}

// Ordered key/value pairs for one section of the resolved config.
using KvList = std::vector<std::pair<std::string, std::string>>;

KvList sim_kvs(const dgp::SimConfig& s) {
  return {
      {"n_stocks", std::to_string(s.n_stocks)},
      {"n_sims", std::to_string(s.n_sims)},
      {"sigma_alpha", fmt_exact(s.sigma_alpha)},
      {"sigma_zeta", fmt_exact(s.sigma_zeta)},
      {"k", fmt_exact(s.k)},
      {"mu_log_m", fmt_exact(s.mu_log_m)},
      {"sigma_log_m", fmt_exact(s.sigma_log_m)},
      {"tau_min", fmt_exact(s.tau_min)},
      {"tau_max", fmt_exact(s.tau_max)},
      {"gamma", fmt_exact(s.gamma)},
      {"sigma_eps", fmt_exact(s.sigma_eps)},
      {"seed", std::to_string(s.seed)},
  };
}

KvList sweep_kvs(const SweepSettings& s) {
  return {
      {"axis", s.axis},
      {"values", values_to_string(s.values)},
      {"sims_per_point", std::to_string(s.sims_per_point)},
  };
}

KvList estimate_kvs(const EstimateSettings& e) {
  std::string regs;
  for (std::size_t i = 0; i < e.reg.regressors.size(); ++i) {
    if (i) regs += ",";
    regs += e.reg.regressors[i];
  }
  return {
      {"dependent", dependent_name(e.reg.dependent)},
      {"horizon", std::to_string(e.reg.horizon)},
      {"regressors", regs},
      {"standardize_within_day", e.reg.standardize_within_day ? "true" : "false"},
      {"winsor_lower", fmt_exact(e.reg.winsor_lower)},
      {"winsor_upper", fmt_exact(e.reg.winsor_upper)},
      {"winsor_scope", scope_name(e.reg.winsor_scope)},
      {"log_constant", fmt_exact(e.reg.log_constant)},
      {"run_fe", e.run_fe ? "true" : "false"},
      {"group_by", e.group_by},
  };
}

std::string render_config(const RunConfig& cfg, bool with_comments) {
  std::string out;
  if (with_comments)
    out += std::string("# resolved run configuration (artifact ") + kVersion + ")\n";
  const std::pair<std::string, KvList> sections[] = {
      {"sim", sim_kvs(cfg.sim)},
      {"sweep", sweep_kvs(cfg.sweep)},
      {"estimate", estimate_kvs(cfg.est)},
  };
  for (const auto& [name, kvs] : sections) {
    out += "[" + name + "]\n";
    for (const auto& [key, value] : kvs) {
      std::string line = key + " = " + value;
      if (with_comments) {
        const auto it = cfg.provenance.find(name + "." + key);
        const std::string src = it == cfg.provenance.end() ? "default" : it->second;
        if (line.size() < 40) line += std::string(40 - line.size(), ' ');
        line += "  # " + src;
      }
      out += line + "\n";
    }
  }
  return out;
}

}  // namespace

std::string canonical_config_string(const RunConfig& cfg) { return render_config(cfg, false); }

void write_config(const RunConfig& cfg, const std::filesystem::path& path) {
  write_text_file(path, render_config(cfg, true));
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(canonical_config_string(cfg)); }

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());

  RunConfig cfg;

  auto fail = [&](long line, const std::string& msg) {
    throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + msg);
  };

  // One setter per known key; each records provenance on success.
  using Setter = std::function<void(const std::string&, long)>;
  std::map<std::string, Setter> setters;

  auto double_setter = [&fail](double& slot, const std::string& key) {
    return [s = &slot, key, &fail](const std::string& v, long ln) {
      if (!parse_double_token(v, *s)) fail(ln, "invalid number for '" + key + "': '" + v + "'");
    };
  };
  auto int_setter = [&fail](int& slot, const std::string& key) {
    return [s = &slot, key, &fail](const std::string& v, long ln) {
      long long x;
      if (!parse_long_token(v, x) || x < std::numeric_limits<int>::min() ||
          x > std::numeric_limits<int>::max())
        fail(ln, "invalid integer for '" + key + "': '" + v + "'");
      *s = static_cast<int>(x);
    };
  };
  auto bool_setter = [&fail](bool& slot, const std::string& key) {
    return [s = &slot, key, &fail](const std::string& v, long ln) {
      if (v == "true")
        *s = true;
      else if (v == "false")
        *s = false;
      else
        fail(ln, "invalid boolean for '" + key + "' (expected true or false): '" + v + "'");
    };
  };

  setters["sim.n_stocks"] = int_setter(cfg.sim.n_stocks, "n_stocks");
  setters["sim.n_sims"] = int_setter(cfg.sim.n_sims, "n_sims");
  setters["sim.sigma_alpha"] = double_setter(cfg.sim.sigma_alpha, "sigma_alpha");
  setters["sim.sigma_zeta"] = double_setter(cfg.sim.sigma_zeta, "sigma_zeta");
  setters["sim.k"] = double_setter(cfg.sim.k, "k");
  setters["sim.mu_log_m"] = double_setter(cfg.sim.mu_log_m, "mu_log_m");
  setters["sim.sigma_log_m"] = double_setter(cfg.sim.sigma_log_m, "sigma_log_m");
  setters["sim.tau_min"] = double_setter(cfg.sim.tau_min, "tau_min");
  setters["sim.tau_max"] = double_setter(cfg.sim.tau_max, "tau_max");
  setters["sim.gamma"] = double_setter(cfg.sim.gamma, "gamma");
  setters["sim.sigma_eps"] = double_setter(cfg.sim.sigma_eps, "sigma_eps");
  setters["sim.seed"] = [&](const std::string& v, long ln) {
    if (!parse_u64_token(v, cfg.sim.seed)) fail(ln, "invalid seed: '" + v + "'");
  };

  setters["sweep.axis"] = [&](const std::string& v, long ln) {
    if (!v.empty()) {
      try {
        mc::parse_sweep_axis(v);
      } catch (const ConfigError& e) {
        fail(ln, e.what());
      }
    }
    cfg.sweep.axis = v;
  };
  setters["sweep.values"] = [&](const std::string& v, long ln) {
    cfg.sweep.values.clear();
    if (trim(v).empty()) return;
    for (const std::string& raw : split(v, ',')) {
      const std::string entry = trim(raw);
      const std::vector<std::string> parts = split(entry, ':');
      mc::SweepValue val;
      val.b = kNan;
      if (parts.size() == 1) {
        if (!parse_double_token(trim(parts[0]), val.a))
          fail(ln, "invalid sweep value: '" + entry + "'");
      } else if (parts.size() == 2) {
        if (!parse_double_token(trim(parts[0]), val.a) ||
            !parse_double_token(trim(parts[1]), val.b))
          fail(ln, "invalid sweep range: '" + entry + "'");
      } else {
        fail(ln, "invalid sweep value: '" + entry + "'");
      }
      cfg.sweep.values.push_back(val);
    }
  };
  setters["sweep.sims_per_point"] = int_setter(cfg.sweep.sims_per_point, "sims_per_point");

  setters["estimate.dependent"] = [&](const std::string& v, long ln) {
    if (v == "forward_return")
      cfg.est.reg.dependent = econo::Dependent::forward_return;
    else if (v == "log_abs_flow")
      cfg.est.reg.dependent = econo::Dependent::log_abs_flow;
    else
      fail(ln, "invalid dependent (expected forward_return or log_abs_flow): '" + v + "'");
  };
  setters["estimate.horizon"] = int_setter(cfg.est.reg.horizon, "horizon");
  setters["estimate.regressors"] = [&](const std::string& v, long ln) {
    cfg.est.reg.regressors.clear();
    for (const std::string& raw : split(v, ',')) {
      const std::string name = trim(raw);
      if (name != "s_mc" && name != "s_tv")
        fail(ln, "invalid regressor (expected s_mc or s_tv): '" + name + "'");
      cfg.est.reg.regressors.push_back(name);
    }
  };
  setters["estimate.standardize_within_day"] =
      bool_setter(cfg.est.reg.standardize_within_day, "standardize_within_day");
  setters["estimate.winsor_lower"] = double_setter(cfg.est.reg.winsor_lower, "winsor_lower");
  setters["estimate.winsor_upper"] = double_setter(cfg.est.reg.winsor_upper, "winsor_upper");
  setters["estimate.winsor_scope"] = [&](const std::string& v, long ln) {
    if (v == "pooled")
      cfg.est.reg.winsor_scope = econo::WinsorScope::pooled;
    else if (v == "per_day")
      cfg.est.reg.winsor_scope = econo::WinsorScope::per_day;
    else
      fail(ln, "invalid winsor_scope (expected pooled or per_day): '" + v + "'");
  };
  setters["estimate.log_constant"] = double_setter(cfg.est.reg.log_constant, "log_constant");
  setters["estimate.run_fe"] = bool_setter(cfg.est.run_fe, "run_fe");
  setters["estimate.group_by"] = [&](const std::string& v, long ln) {
    if (v != "none" && v != "mcap_quintile" && v != "year")
      fail(ln, "invalid group_by (expected none, mcap_quintile or year): '" + v + "'");
    cfg.est.group_by = v;
  };

  std::string section = "sim";
  std::set<std::string> seen;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header: '" + line + "'");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name != "sim" && name != "sweep" && name != "estimate")
        fail(line_no, "unknown section [" + name + "]");
      section = name;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value': '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");

    const std::string qualified = section + "." + key;
    const auto it = setters.find(qualified);
    if (it == setters.end()) fail(line_no, "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(qualified).second) fail(line_no, "duplicate key '" + key + "'");
    it->second(value, line_no);
    cfg.provenance[qualified] = "file";
  }

  // Shape check once both axis and values are known.
  if (!cfg.sweep.axis.empty() && !cfg.sweep.values.empty()) {
    const bool want_pairs = cfg.sweep.axis == "turnover_range";
    for (const mc::SweepValue& v : cfg.sweep.values) {
      const bool is_pair = std::isfinite(v.b);
      if (want_pairs && !is_pair)
        throw ConfigError(path.string() + ": turnover_range values must be min:max pairs");
      if (!want_pairs && is_pair)
        throw ConfigError(path.string() + ": axis " + cfg.sweep.axis + " takes scalar values");
    }
  }
  return cfg;
}

// --------------------------------------------------------------- tables

void write_experiment_table(const std::filesystem::path& path, const mc::ExperimentSummary& s,
                            const SidecarInfo& meta) {
  std::vector<std::string> rows;
  auto method_row = [](const char* name, const mc::MethodStats& st) {
    return std::string(name) + "," + fmt_g(st.mean) + "," + fmt_g(st.std) + "," + fmt_g(st.min) +
           "," + fmt_g(st.max);
  };
  rows.push_back(method_row("tv", s.tv));
  rows.push_back(method_row("mc", s.mc));
  rows.push_back("ratio_mc_tv," + fmt_g(s.ratio_mc_tv) + ",,,");
  rows.push_back("paired_t," + fmt_g(s.paired_t) + ",,,");
  rows.push_back("p_value," + fmt_g(s.p_value) + ",,,");
  rows.push_back(std::string("p_below_floor,") + (s.p_below_floor ? "1" : "0") + ",,,");
  write_table_with_sidecar(path, "experiment", "method,mean,std,min,max", rows, meta);
}

namespace {

std::string sweep_prefix(const mc::SweepRow& r) {
  return r.scenario + "," + fmt_g(r.value_a) + "," +
         (std::isfinite(r.value_b) ? fmt_g(r.value_b) : std::string());
}

}  // namespace

void write_sweep_table(const std::filesystem::path& path, std::span<const mc::SweepRow> rows,
                       const SidecarInfo& meta) {
  std::vector<std::string> out;
  for (const mc::SweepRow& r : rows) {
    out.push_back(sweep_prefix(r) + "," + std::to_string(r.n_sims) + "," + fmt_g(r.mean_rho_tv) +
                  "," + fmt_g(r.std_rho_tv) + "," + fmt_g(r.mean_rho_mc) + "," +
                  fmt_g(r.std_rho_mc) + "," + fmt_g(r.ratio) + "," + fmt_g(r.analytic_rho_tv) +
                  "," + fmt_g(r.analytic_rho_mc) + "," + fmt_g(r.analytic_ratio));
  }
  write_table_with_sidecar(path, "sweep",
                           "scenario,value,value2,n_sims,mean_rho_tv,std_rho_tv,mean_rho_mc,"
                           "std_rho_mc,ratio,analytic_rho_tv,analytic_rho_mc,analytic_ratio",
                           out, meta);
}

void write_fm_table(const std::filesystem::path& path, const econo::FMResult& r,
                    const SidecarInfo& meta) {
  std::vector<std::string> rows;
  for (const econo::FmRegressor& reg : r.regressors)
    rows.push_back(reg.name + "," + fmt_g(reg.mean_coef) + "," + fmt_g(reg.se) + "," +
                   fmt_g(reg.t_stat));
  rows.push_back("avg_r2," + fmt_g(r.avg_r2) + ",,");
  rows.push_back("n_days_used," + std::to_string(r.n_days_used) + ",,");
  rows.push_back("n_days_excluded," + std::to_string(r.n_days_excluded) + ",,");
  rows.push_back("n_obs," + std::to_string(r.n_obs) + ",,");
  rows.push_back("avg_stocks_per_day," + fmt_g(r.avg_stocks_per_day) + ",,");
  write_table_with_sidecar(path, "fm", "regressor,mean_coef,se,t_stat", rows, meta);
}

void write_fe_table(const std::filesystem::path& path, const econo::FEResult& r,
                    const SidecarInfo& meta) {
  std::vector<std::string> rows;
  for (const econo::FeRegressor& reg : r.regressors)
    rows.push_back(reg.name + "," + fmt_g(reg.coef) + "," + fmt_g(reg.se) + "," +
                   fmt_g(reg.t_stat));
  rows.push_back("within_r2," + fmt_g(r.within_r2) + ",,");
  rows.push_back("n_obs," + std::to_string(r.n_obs) + ",,");
  rows.push_back("n_stocks," + std::to_string(r.n_stocks) + ",,");
  rows.push_back("n_days," + std::to_string(r.n_days) + ",,");
  rows.push_back("demean_iterations," + std::to_string(r.demean_iterations) + ",,");
  rows.push_back("demean_max_delta," + fmt_g(r.demean_max_delta) + ",,");
  rows.push_back("adj_stock," + fmt_g(r.adj_stock) + ",,");
  rows.push_back("adj_day," + fmt_g(r.adj_day) + ",,");
  rows.push_back("adj_cell," + fmt_g(r.adj_cell) + ",,");
  rows.push_back(std::string("variance_clamped,") + (r.variance_clamped ? "1" : "0") + ",,");
  write_table_with_sidecar(path, "fe", "regressor,coef,se,t_stat", rows, meta);
}

void write_snr_table(const std::filesystem::path& path, const signal::SnrReport& r,
                     const SidecarInfo& meta) {
  std::vector<std::string> rows = {
      "cov_mc," + fmt_g(r.cov_mc),       "var_mc," + fmt_g(r.var_mc),
      "cov_tv," + fmt_g(r.cov_tv),       "var_tv," + fmt_g(r.var_tv),
      "var_r," + fmt_g(r.var_r),         "snr_mc," + fmt_g(r.snr_mc),
      "snr_tv," + fmt_g(r.snr_tv),       "snr_ratio," + fmt_g(r.snr_ratio),
      "corr_mc," + fmt_g(r.corr_mc),     "corr_tv," + fmt_g(r.corr_tv),
      "corr_ratio," + fmt_g(r.corr_ratio),
  };
  write_table_with_sidecar(path, "snr", "quantity,value", rows, meta);
}

void write_moments_table(const std::filesystem::path& path, const signal::TurnoverMoments& m,
                         const SidecarInfo& meta) {
  std::vector<std::string> rows = {
      "mean_tau," + fmt_g(m.mean_tau),
      "mean_tau_sq," + fmt_g(m.mean_tau_sq),
      "mean_inv_tau," + fmt_g(m.mean_inv_tau),
      "mean_inv_tau_sq," + fmt_g(m.mean_inv_tau_sq),
  };
  write_table_with_sidecar(path, "moments", "quantity,value", rows, meta);
}

// ------------------------------------------------------------ plot data

void write_correlation_table(const std::filesystem::path& path,
                             std::span<const mc::SimulationResult> results,
                             const SidecarInfo& meta) {
  std::vector<std::string> rows;
  rows.reserve(results.size());
  for (const mc::SimulationResult& r : results)
    rows.push_back(std::to_string(r.sim_index) + "," + fmt_exact(r.rho_tv) + "," +
                   fmt_exact(r.rho_mc));
  write_table_with_sidecar(path, "correlations", "sim_index,rho_tv,rho_mc", rows, meta);
}

void write_histogram_table(const std::filesystem::path& path,
                           std::span<const mc::SimulationResult> results, int n_bins,
                           const SidecarInfo& meta) {
  if (n_bins < 1) throw ConfigError("write_histogram_table: n_bins must be >= 1");
  if (results.empty()) throw DataError("write_histogram_table: no results");

  std::vector<std::string> rows;
  auto emit = [&](const char* method, auto get) {
    double lo = get(results[0]), hi = get(results[0]);
    for (const mc::SimulationResult& r : results) {
      lo = std::min(lo, get(r));
      hi = std::max(hi, get(r));
    }
    if (lo == hi) {
      rows.push_back(std::string(method) + "," + fmt_g(lo) + "," + fmt_g(hi) + "," +
                     std::to_string(results.size()));
      return;
    }
    const double width = (hi - lo) / n_bins;
    std::vector<long> count(n_bins, 0);
    for (const mc::SimulationResult& r : results) {
      int b = static_cast<int>((get(r) - lo) / width);
      b = std::clamp(b, 0, n_bins - 1);  // right-closed last bin
      ++count[b];
    }
    for (int b = 0; b < n_bins; ++b)
      rows.push_back(std::string(method) + "," + fmt_g(lo + b * width) + "," +
                     fmt_g(lo + (b + 1) * width) + "," + std::to_string(count[b]));
  };
  emit("tv", [](const mc::SimulationResult& r) { return r.rho_tv; });
  emit("mc", [](const mc::SimulationResult& r) { return r.rho_mc; });
  write_table_with_sidecar(path, "histogram", "method,bin_left,bin_right,count", rows, meta);
}

void write_ci_table(const std::filesystem::path& path, const mc::ExperimentSummary& s,
                    const SidecarInfo& meta) {
  const double root_n = std::sqrt(static_cast<double>(s.n_sims));
  auto row = [&](const char* method, const mc::MethodStats& st) {
    const double half = 1.96 * st.std / root_n;
    return std::string(method) + "," + fmt_g(st.mean) + "," + fmt_g(st.mean - half) + "," +
           fmt_g(st.mean + half);
  };
  std::vector<std::string> rows = {row("tv", s.tv), row("mc", s.mc)};
  write_table_with_sidecar(path, "ci", "method,mean,ci_low,ci_high", rows, meta);
}

void write_sweep_curve_table(const std::filesystem::path& path,
                             std::span<const mc::SweepRow> rows, const SidecarInfo& meta) {
  std::vector<std::string> out;
  for (const mc::SweepRow& r : rows) {
    const double root_n = std::sqrt(static_cast<double>(r.n_sims));
    out.push_back(sweep_prefix(r) + "," + fmt_g(r.mean_rho_tv) + "," +
                  fmt_g(1.96 * r.std_rho_tv / root_n) + "," + fmt_g(r.mean_rho_mc) + "," +
                  fmt_g(1.96 * r.std_rho_mc / root_n) + "," + fmt_g(r.ratio) + "," +
                  fmt_g(r.analytic_rho_tv) + "," + fmt_g(r.analytic_rho_mc) + "," +
                  fmt_g(r.analytic_ratio));
  }
  write_table_with_sidecar(path, "sweep_curve",
                           "scenario,value,value2,mean_rho_tv,ci_tv_half,mean_rho_mc,ci_mc_half,"
                           "ratio,analytic_rho_tv,analytic_rho_mc,analytic_ratio",
                           out, meta);
}

}  // namespace flownorm::io

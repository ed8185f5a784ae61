#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flownorm/dgp.hpp"
#include "flownorm/econo.hpp"
#include "flownorm/mc.hpp"
#include "flownorm/signal.hpp"

namespace flownorm::io {

// ------------------------------------------------------------- panel I/O

// Exact header required of every panel file.
inline constexpr const char* kPanelHeader = "date,stock_id,flow,market_cap,traded_value,return";

struct RejectedRow {
  long line;           // 1-based, counting the header as line 1
  std::string reason;
};

struct PanelReadReport {
  long n_data_rows = 0;
  long n_accepted = 0;
  long n_rejected = 0;
  std::vector<RejectedRow> rejects;  // detail for the first kMaxStoredRejects
  static constexpr int kMaxStoredRejects = 100;
};

struct PanelRead {
  std::vector<econo::PanelObservation> observations;
  PanelReadReport report;
};

// Reads a panel CSV. A missing file or malformed header is fatal
// (DataError); individual bad rows (wrong field count, invalid date,
// unparseable or nonfinite numbers, nonpositive market_cap/traded_value,
// duplicate (date, stock_id)) are rejected and reported, never coerced.
PanelRead read_panel(const std::filesystem::path& path);

// Writes a panel CSV. Floats use shortest round-trip formatting, so
// read_panel(write_panel(p)) reproduces p exactly.
void write_panel(const std::filesystem::path& path,
                 std::span<const econo::PanelObservation> observations);

// ISO-8601 calendar date check (YYYY-MM-DD, real month/day, leap years).
bool is_valid_date(const std::string& s);

// --------------------------------------------------------------- config

struct SweepSettings {
  std::string axis;  // empty = not configured
  std::vector<mc::SweepValue> values;
  int sims_per_point = 200;
};

struct EstimateSettings {
  econo::RegressionSpec reg;
  bool run_fe = true;
  std::string group_by = "none";  // none | mcap_quintile | year
};

// Full resolved run configuration. `provenance` maps qualified keys
// (e.g. "sim.sigma_alpha") to their source: "default", "file" or "cli".
struct RunConfig {
  dgp::SimConfig sim;
  SweepSettings sweep;
  EstimateSettings est;
  std::map<std::string, std::string> provenance;
};

RunConfig default_config();

// Flat key = value format with [sim], [sweep] and [estimate] sections;
// bare keys before any section header belong to [sim]. '#' starts a
// comment. Unknown keys, unknown sections, duplicate keys and type
// mismatches are fatal ConfigErrors naming the line.
RunConfig read_config(const std::filesystem::path& path);

// Serializes every resolved value (with provenance comments). Reading the
// result back reproduces the same values exactly.
void write_config(const RunConfig& cfg, const std::filesystem::path& path);

// Comment-free canonical serialization; input to config_hash.
std::string canonical_config_string(const RunConfig& cfg);

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t config_hash(const RunConfig& cfg);

// --------------------------------------------------------------- tables
//
// Every table is CSV with a fixed column layout and %.6g floats, plus a
// sidecar `<path>.meta` recording kind, artifact version, seed, config
// hash and row count (no timestamps, so identical runs are byte-identical).

struct SidecarInfo {
  std::uint64_t seed;
  std::uint64_t config_hash;
};

void write_experiment_table(const std::filesystem::path& path, const mc::ExperimentSummary& s,
                            const SidecarInfo& meta);
void write_sweep_table(const std::filesystem::path& path, std::span<const mc::SweepRow> rows,
                       const SidecarInfo& meta);
void write_fm_table(const std::filesystem::path& path, const econo::FMResult& r,
                    const SidecarInfo& meta);
void write_fe_table(const std::filesystem::path& path, const econo::FEResult& r,
                    const SidecarInfo& meta);
void write_snr_table(const std::filesystem::path& path, const signal::SnrReport& r,
                     const SidecarInfo& meta);
void write_moments_table(const std::filesystem::path& path, const signal::TurnoverMoments& m,
                         const SidecarInfo& meta);

// ------------------------------------------------------------ plot data

// Per-simulation correlations, shortest round-trip floats (raw data, not a
// display table).
void write_correlation_table(const std::filesystem::path& path,
                             std::span<const mc::SimulationResult> results,
                             const SidecarInfo& meta);

// Histogram of per-simulation correlations, n_bins equal-width bins per
// method over that method's [min, max]; the last bin is right-closed.
void write_histogram_table(const std::filesystem::path& path,
                           std::span<const mc::SimulationResult> results, int n_bins,
                           const SidecarInfo& meta);

// Mean with 95% normal-approximation band (1.96 * std / sqrt(n)) per method.
void write_ci_table(const std::filesystem::path& path, const mc::ExperimentSummary& s,
                    const SidecarInfo& meta);

// Sweep curves: simulated means with CI half-widths and analytic overlays.
void write_sweep_curve_table(const std::filesystem::path& path,
                             std::span<const mc::SweepRow> rows, const SidecarInfo& meta);

}  // namespace flownorm::io

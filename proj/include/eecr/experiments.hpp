#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eecr/channel.hpp"
#include "eecr/optimizer.hpp"
#include "eecr/power_adaptation.hpp"
#include "eecr/rate_model.hpp"
#include "eecr/sensing.hpp"

namespace eecr::experiments {

enum class Kind { kSolve, kSweep, kValidateBound };

/// Every knob of a run, read from flat `key = value` text. Power keys also
/// accept a `_db` suffix (value = 10^(dB/10)).
struct ExperimentConfig {
  Kind kind = Kind::kSolve;
  SystemParams params;
  SensingSpec sensing;
  Regime regime = Regime::kAvgTxAvgInterf;
  // Transmit limit applied to whichever constraint the regime uses, unless
  // overridden by p_avg or the per-branch peaks.
  double p_limit = 0.3981071705534972;  // -4 dB
  std::optional<double> p_avg;
  std::optional<double> p_peak_idle;
  std::optional<double> p_peak_busy;
  double q_avg = 0.15848931924611134;  // -8 dB
  FadingConfig fading;
  SolverConfig solver;

  std::string sweep_param;
  std::vector<double> sweep_values;

  // validate-bound
  double gain_h = 1.0;
  double power_min = 1e-2;
  double power_max = 1e2;
  std::size_t power_points = 20;
  std::size_t n_mc = 2000000;

  std::size_t workers = 1;

  /// Sets one key; throws InvalidConfig naming the key if it is unknown or
  /// the value does not parse.
  void set(const std::string& key, const std::string& value);
  /// Real-valued keys only (including `_db` forms).
  void set(const std::string& key, double value);

  /// Reads `key = value` lines; `#` starts a comment.
  void load(std::istream& is);
  void load_file(const std::string& path);

  Constraints constraints() const;

  /// Canonical key/value listing echoed into output headers.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// True if `key` names a real-valued scalar that a sweep may vary.
bool is_sweepable(const std::string& key);

/// One solve plus its summary row.
struct SolveRow {
  double p_detect = 0.0;
  double p_false_alarm = 0.0;
  double p_limit_db = 0.0;
  double q_avg_db = 0.0;
  Regime regime = Regime::kAvgTxAvgInterf;
  SolveResult result;
};

SolveRow solve_row(const ExperimentConfig& cfg);

std::string regime_name(Regime r);

/// `Pd,Pf,P_limit_db,Q_avg_db,regime,ee,rate,avg_tx_power,avg_interference,converged`
std::string solve_header();
std::string format_solve_row(const SolveRow& row);

void write_metadata(std::ostream& os, const std::string& command, const ExperimentConfig& cfg);

/// Runs a single solve, writes metadata, header and row to `out`, and the
/// trace to `trace` when given. Returns the solve row.
SolveRow run_solve(const ExperimentConfig& cfg, std::ostream& out, std::ostream* trace);

struct SweepOutput {
  std::vector<SolveRow> rows;
  bool all_converged = true;
};

/// One independent solve per sweep value, computed on up to cfg.workers
/// threads and written in sweep order. The header is the swept key followed
/// by the solve columns and `p_idle_mean,p_busy_mean`.
SweepOutput run_sweep(const ExperimentConfig& cfg, std::ostream& out);

struct BoundRow {
  double power = 0.0;
  double rate_lb = 0.0;
  double rate_exact = 0.0;
  double rate_exact_stderr = 0.0;
  double ee_lb = 0.0;
  double ee_exact = 0.0;
};

/// Lower bound vs. Monte Carlo exact rate over a geometric grid of common
/// powers P0 = P1 at the fixed link gain cfg.gain_h.
std::vector<BoundRow> validate_bound(const ExperimentConfig& cfg);
std::vector<BoundRow> run_validate_bound(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace eecr::experiments

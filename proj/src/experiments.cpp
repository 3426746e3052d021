#include "eecr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "eecr/error.hpp"
#include "eecr/format.hpp"

namespace eecr::experiments {

namespace {

const char* step_rule_name(StepRule r) {
  switch (r) {
    case StepRule::kConstant:
      return "constant";
    case StepRule::kDiminishing:
      return "diminishing";
    case StepRule::kRelative:
      return "relative";
  }
  return "constant";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw InvalidConfig("key '" + key + "': cannot parse '" + text + "' as a number");
  }
  return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    // Accept integral values written in floating notation, e.g. 2e6.
    const double d = parse_real(key, text);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) {
      throw InvalidConfig("key '" + key + "': expected a nonnegative integer, got '" + text + "'");
    }
    return static_cast<std::uint64_t>(d);
  }
  return v;
}

using RealSetter = std::function<void(ExperimentConfig&, double)>;

struct RealKey {
  RealSetter set;
  bool accepts_db;
};

const std::map<std::string, RealKey>& real_keys() {
  static const std::map<std::string, RealKey> keys = {
      {"noise_power", {[](ExperimentConfig& c, double v) { c.params.noise_power = v; }, true}},
      {"primary_power", {[](ExperimentConfig& c, double v) { c.params.primary_power = v; }, true}},
      {"frame_len", {[](ExperimentConfig& c, double v) { c.params.frame_len = v; }, false}},
      {"sense_len", {[](ExperimentConfig& c, double v) { c.params.sense_len = v; }, false}},
      {"circuit_power", {[](ExperimentConfig& c, double v) { c.params.circuit_power = v; }, true}},
      {"symbol_rate", {[](ExperimentConfig& c, double v) { c.params.symbol_rate = v; }, false}},
      {"p_detect", {[](ExperimentConfig& c, double v) { c.sensing.p_detect = v; }, false}},
      {"p_false_alarm", {[](ExperimentConfig& c, double v) { c.sensing.p_false_alarm = v; }, false}},
      {"prior_idle",
       {[](ExperimentConfig& c, double v) {
          c.sensing.prior_idle = v;
          c.sensing.prior_busy = 1.0 - v;
        },
        false}},
      {"prior_busy",
       {[](ExperimentConfig& c, double v) {
          c.sensing.prior_busy = v;
          c.sensing.prior_idle = 1.0 - v;
        },
        false}},
      {"p_limit",
       {[](ExperimentConfig& c, double v) {
          c.p_limit = v;
          c.p_avg.reset();
          c.p_peak_idle.reset();
          c.p_peak_busy.reset();
        },
        true}},
      {"p_avg", {[](ExperimentConfig& c, double v) { c.p_avg = v; }, true}},
      {"p_peak_idle", {[](ExperimentConfig& c, double v) { c.p_peak_idle = v; }, true}},
      {"p_peak_busy", {[](ExperimentConfig& c, double v) { c.p_peak_busy = v; }, true}},
      {"q_avg", {[](ExperimentConfig& c, double v) { c.q_avg = v; }, true}},
      {"mean_gain_h", {[](ExperimentConfig& c, double v) { c.fading.mean_gain_h = v; }, true}},
      {"mean_gain_g", {[](ExperimentConfig& c, double v) { c.fading.mean_gain_g = v; }, true}},
      {"tolerance", {[](ExperimentConfig& c, double v) { c.solver.tolerance = v; }, false}},
      {"step_size", {[](ExperimentConfig& c, double v) { c.solver.step_size = v; }, false}},
      {"alpha_init", {[](ExperimentConfig& c, double v) { c.solver.alpha_init = v; }, false}},
      {"lambda_init", {[](ExperimentConfig& c, double v) { c.solver.lambda_init = v; }, false}},
      {"nu_init", {[](ExperimentConfig& c, double v) { c.solver.nu_init = v; }, false}},
      {"gain_h", {[](ExperimentConfig& c, double v) { c.gain_h = v; }, true}},
      {"power_min", {[](ExperimentConfig& c, double v) { c.power_min = v; }, true}},
      {"power_max", {[](ExperimentConfig& c, double v) { c.power_max = v; }, true}},
  };
  return keys;
}

using CountSetter = std::function<void(ExperimentConfig&, std::uint64_t)>;

const std::map<std::string, CountSetter>& count_keys() {
  static const std::map<std::string, CountSetter> keys = {
      {"n_samples", [](ExperimentConfig& c, std::uint64_t v) { c.fading.n_samples = v; }},
      {"samples", [](ExperimentConfig& c, std::uint64_t v) { c.fading.n_samples = v; }},
      {"seed", [](ExperimentConfig& c, std::uint64_t v) { c.fading.seed = v; }},
      {"max_outer_iters", [](ExperimentConfig& c, std::uint64_t v) { c.solver.max_outer_iters = v; }},
      {"max_inner_iters", [](ExperimentConfig& c, std::uint64_t v) { c.solver.max_inner_iters = v; }},
      {"power_points", [](ExperimentConfig& c, std::uint64_t v) { c.power_points = v; }},
      {"n_mc", [](ExperimentConfig& c, std::uint64_t v) { c.n_mc = v; }},
      {"workers", [](ExperimentConfig& c, std::uint64_t v) { c.workers = v; }},
  };
  return keys;
}

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a = {
      {"Pd", "p_detect"}, {"Pf", "p_false_alarm"}, {"N0", "noise_power"}, {"Pc", "circuit_power"},
  };
  return a;
}

// Resolves aliases and a trailing _db; returns the base key and whether the
// value is in dB.
std::pair<std::string, bool> resolve(const std::string& raw) {
  std::string key = raw;
  if (auto it = aliases().find(key); it != aliases().end()) key = it->second;
  constexpr std::string_view kDb = "_db";
  if (key.size() > kDb.size() && key.compare(key.size() - kDb.size(), kDb.size(), kDb) == 0) {
    const std::string base = key.substr(0, key.size() - kDb.size());
    auto it = real_keys().find(base);
    if (it != real_keys().end() && it->second.accepts_db) return {base, true};
  }
  return {key, false};
}

Regime parse_regime(const std::string& v) {
  if (v == "avg" || v == "AvgTx_AvgInterf") return Regime::kAvgTxAvgInterf;
  if (v == "peak" || v == "PeakTx_AvgInterf") return Regime::kPeakTxAvgInterf;
  throw InvalidConfig("key 'regime': expected avg or peak, got '" + v + "'");
}

}  // namespace

bool is_sweepable(const std::string& key) {
  const auto [base, db] = resolve(key);
  (void)db;
  return real_keys().count(base) > 0;
}

void ExperimentConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string value = trim(raw_value);
  const auto [key, db] = resolve(trim(raw_key));
  if (real_keys().count(key)) {
    set(raw_key, parse_real(raw_key, value));
    return;
  }
  if (auto it = count_keys().find(key); it != count_keys().end()) {
    it->second(*this, parse_count(raw_key, value));
    return;
  }
  if (key == "regime") {
    regime = parse_regime(value);
  } else if (key == "step_rule") {
    if (value == "constant") {
      solver.step_rule = StepRule::kConstant;
    } else if (value == "diminishing") {
      solver.step_rule = StepRule::kDiminishing;
    } else if (value == "relative") {
      solver.step_rule = StepRule::kRelative;
    } else {
      throw InvalidConfig("key 'step_rule': expected constant, diminishing or relative, got '" + value +
                          "'");
    }
  } else if (key == "kind") {
    if (value == "solve") {
      kind = Kind::kSolve;
    } else if (value == "sweep") {
      kind = Kind::kSweep;
    } else if (value == "validate_bound" || value == "validate-bound") {
      kind = Kind::kValidateBound;
    } else {
      throw InvalidConfig("key 'kind': unknown experiment kind '" + value + "'");
    }
  } else if (key == "sweep_param") {
    if (!is_sweepable(value)) {
      throw InvalidConfig("key 'sweep_param': '" + value + "' is not a real scalar field");
    }
    sweep_param = value;
  } else if (key == "sweep_values") {
    sweep_values.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (trim(item).empty()) continue;
      sweep_values.push_back(parse_real(raw_key, item));
    }
  } else {
    throw InvalidConfig("unknown config key '" + raw_key + "'");
  }
}

void ExperimentConfig::set(const std::string& raw_key, double value) {
  const auto [key, db] = resolve(trim(raw_key));
  const auto it = real_keys().find(key);
  if (it == real_keys().end()) {
    throw InvalidConfig("key '" + raw_key + "' is not a real scalar field");
  }
  it->second.set(*this, db ? from_db(value) : value);
}

void ExperimentConfig::load(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file '" + path + "'");
  load(in);
}

Constraints ExperimentConfig::constraints() const {
  Constraints c = regime == Regime::kAvgTxAvgInterf
                      ? Constraints::average(p_avg.value_or(p_limit), q_avg)
                      : Constraints::peak(p_peak_idle.value_or(p_limit),
                                          p_peak_busy.value_or(p_limit), q_avg);
  c.validate();
  return c;
}

std::string regime_name(Regime r) {
  return r == Regime::kAvgTxAvgInterf ? "AvgTx_AvgInterf" : "PeakTx_AvgInterf";
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  const auto c = constraints();
  std::vector<std::pair<std::string, std::string>> out = {
      {"seed", std::to_string(fading.seed)},
      {"noise_power", fmt_num(params.noise_power)},
      {"primary_power", fmt_num(params.primary_power)},
      {"frame_len", fmt_num(params.frame_len)},
      {"sense_len", fmt_num(params.sense_len)},
      {"circuit_power", fmt_num(params.circuit_power)},
      {"symbol_rate", fmt_num(params.symbol_rate)},
      {"p_detect", fmt_num(sensing.p_detect)},
      {"p_false_alarm", fmt_num(sensing.p_false_alarm)},
      {"prior_idle", fmt_num(sensing.prior_idle)},
      {"prior_busy", fmt_num(sensing.prior_busy)},
      {"regime", regime_name(regime)},
  };
  if (c.regime == Regime::kAvgTxAvgInterf) {
    out.emplace_back("p_avg", fmt_num(*c.p_avg));
  } else {
    out.emplace_back("p_peak_idle", fmt_num(*c.p_peak_idle));
    out.emplace_back("p_peak_busy", fmt_num(*c.p_peak_busy));
  }
  out.emplace_back("q_avg", fmt_num(c.q_avg));
  out.emplace_back("mean_gain_h", fmt_num(fading.mean_gain_h));
  out.emplace_back("mean_gain_g", fmt_num(fading.mean_gain_g));
  out.emplace_back("n_samples", std::to_string(fading.n_samples));
  out.emplace_back("tolerance", fmt_num(solver.tolerance));
  out.emplace_back("step_size", fmt_num(solver.step_size));
  out.emplace_back("step_rule", step_rule_name(solver.step_rule));
  out.emplace_back("max_outer_iters", std::to_string(solver.max_outer_iters));
  out.emplace_back("max_inner_iters", std::to_string(solver.max_inner_iters));
  out.emplace_back("alpha_init", fmt_num(solver.alpha_init));
  out.emplace_back("lambda_init", fmt_num(solver.lambda_init));
  out.emplace_back("nu_init", fmt_num(solver.nu_init));
  return out;
}

void write_metadata(std::ostream& os, const std::string& command, const ExperimentConfig& cfg) {
  os << "# eecr " << command << '\n';
  for (const auto& [k, v] : cfg.echo()) os << "# " << k << " = " << v << '\n';
}

SolveRow solve_row(const ExperimentConfig& cfg) {
  const auto cons = cfg.constraints();
  SolveRow row;
  row.p_detect = cfg.sensing.p_detect;
  row.p_false_alarm = cfg.sensing.p_false_alarm;
  row.regime = cons.regime;
  row.p_limit_db = to_db(cons.regime == Regime::kAvgTxAvgInterf ? *cons.p_avg : *cons.p_peak_idle);
  row.q_avg_db = to_db(cons.q_avg);
  row.result = solve(cfg.params, cfg.sensing, cons, cfg.fading, cfg.solver);
  return row;
}

std::string solve_header() {
  return "Pd,Pf,P_limit_db,Q_avg_db,regime,ee,rate,avg_tx_power,avg_interference,converged";
}

std::string format_solve_row(const SolveRow& row) {
  const auto& b = row.result.breakdown;
  std::string s;
  s += fmt_num(row.p_detect) + ',' + fmt_num(row.p_false_alarm) + ',' + fmt_num(row.p_limit_db) +
       ',' + fmt_num(row.q_avg_db) + ',' + regime_name(row.regime) + ',' +
       fmt_num(row.result.ee_opt) + ',' + fmt_num(b.rate) + ',' + fmt_num(b.avg_tx_power) + ',' +
       fmt_num(b.avg_interference) + ',' + (row.result.converged ? "true" : "false");
  return s;
}

SolveRow run_solve(const ExperimentConfig& cfg, std::ostream& out, std::ostream* trace) {
  auto row = solve_row(cfg);
  write_metadata(out, "solve", cfg);
  out << solve_header() << '\n' << format_solve_row(row) << '\n';
  if (trace) write_trace_csv(*trace, row.result.trace);
  return row;
}

namespace {

template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

SweepOutput run_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.sweep_param.empty()) throw InvalidConfig("key 'sweep_param' is required for sweep");
  if (cfg.sweep_values.empty()) throw InvalidConfig("key 'sweep_values' is required for sweep");
  SweepOutput res;
  res.rows.resize(cfg.sweep_values.size());
  // Validate every point before spending time on solves.
  std::vector<ExperimentConfig> points(cfg.sweep_values.size(), cfg);
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].set(cfg.sweep_param, cfg.sweep_values[i]);
    points[i].constraints();
  }
  parallel_for(points.size(), cfg.workers, [&](std::size_t i) { res.rows[i] = solve_row(points[i]); });

  write_metadata(out, "sweep", cfg);
  out << "# sweep_param = " << cfg.sweep_param << '\n';
  out << cfg.sweep_param << ',' << solve_header() << ",p_idle_mean,p_busy_mean\n";
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    res.all_converged = res.all_converged && r.result.converged;
    out << fmt_num(cfg.sweep_values[i]) << ',' << format_solve_row(r) << ','
        << fmt_num(r.result.breakdown.mean_p_idle) << ',' << fmt_num(r.result.breakdown.mean_p_busy)
        << '\n';
  }
  return res;
}

std::vector<BoundRow> validate_bound(const ExperimentConfig& cfg) {
  cfg.params.validate();
  if (cfg.power_points < 2) throw InvalidConfig("key 'power_points' must be >= 2");
  if (!(cfg.power_min > 0.0) || !(cfg.power_max > cfg.power_min)) {
    throw InvalidConfig("key 'power_min'/'power_max': need 0 < power_min < power_max");
  }
  const BranchProbs probs = branch_probs(cfg.sensing);
  const ChannelSampleSet one({cfg.gain_h}, {1.0});
  std::vector<BoundRow> rows(cfg.power_points);
  parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
    const double f = static_cast<double>(i) / static_cast<double>(cfg.power_points - 1);
    const double p = cfg.power_min * std::pow(cfg.power_max / cfg.power_min, f);
    BoundRow r;
    r.power = p;
    r.rate_lb = rate_lower_bound(cfg.params, probs, one, PowerPolicy::constant(1, p, p));
    const auto mc = exact_rate_mc(cfg.params, probs, cfg.gain_h, p, p, cfg.n_mc, cfg.fading.seed + i);
    r.rate_exact = mc.value;
    r.rate_exact_stderr = mc.stderr;
    const double total = p + cfg.params.circuit_power;
    r.ee_lb = r.rate_lb / total;
    r.ee_exact = r.rate_exact / total;
    rows[i] = r;
  });
  return rows;
}

std::vector<BoundRow> run_validate_bound(const ExperimentConfig& cfg, std::ostream& out) {
  auto rows = validate_bound(cfg);
  write_metadata(out, "validate-bound", cfg);
  out << "# gain_h = " << fmt_num(cfg.gain_h) << '\n' << "# n_mc = " << cfg.n_mc << '\n';
  out << "power,rate_lb,rate_exact,rate_exact_stderr,ee_lb,ee_exact\n";
  for (const auto& r : rows) {
    out << fmt_num(r.power) << ',' << fmt_num(r.rate_lb) << ',' << fmt_num(r.rate_exact) << ','
        << fmt_num(r.rate_exact_stderr) << ',' << fmt_num(r.ee_lb) << ',' << fmt_num(r.ee_exact)
        << '\n';
  }
  return rows;
}

}  // namespace eecr::experiments

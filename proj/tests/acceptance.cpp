// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Optional argv[1]: path to the eecr CLI, used for the rerun check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "eecr/experiments.hpp"
#include "eecr/format.hpp"
#include "eecr/kernels.hpp"
#include "eecr/optimizer.hpp"
#include "eecr/reference_oracle.hpp"

using namespace eecr;
using experiments::ExperimentConfig;
using experiments::SolveRow;

namespace {

// Pinned tolerances.
constexpr double kBoundSigmas = 3.0;
constexpr double kOracleRel = 5e-3;
constexpr double kResidualRel = 1e-8;
constexpr double kDinkelbachEps = 1e-4;
constexpr std::size_t kMaxOuter = 15;
constexpr double kFig2Samples = 10000.0;
constexpr double kSaturationRel = 5e-3;
constexpr double kSweepRel = 1e-3;
constexpr double kComplianceRel = 1e-3;
constexpr double kSlacknessAbs = 1e-3;

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void run(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  %2d  %-28s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.workers = workers();
  return cfg;
}

// Converged solves gathered from the other criteria for the compliance check.
struct SolveRecord {
  Constraints cons;
  SolveResult result;
};
std::vector<SolveRecord> solved;

void record(const Constraints& cons, const SolveResult& r) {
  if (r.converged && !r.degenerate) solved.push_back({cons, r});
}

void record(const ExperimentConfig& cfg, const std::vector<SolveRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ExperimentConfig c = cfg;
    c.set(cfg.sweep_param, cfg.sweep_values[i]);
    record(c.constraints(), rows[i].result);
  }
}

bool nondecreasing(const std::vector<double>& v, double rel, double* worst = nullptr) {
  bool ok = true;
  double w = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double drop = (v[i - 1] - v[i]) / std::max(std::abs(v[i - 1]), 1e-300);
    w = std::max(w, drop);
    if (drop > rel) ok = false;
  }
  if (worst) *worst = w;
  return ok;
}

bool nonincreasing(const std::vector<double>& v, double rel, double* worst = nullptr) {
  std::vector<double> neg(v.rbegin(), v.rend());
  return nondecreasing(neg, rel, worst);
}

std::vector<double> column(const std::vector<SolveRow>& rows, const std::function<double(const SolveRow&)>& f) {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(f(r));
  return out;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

std::vector<SolveRow> sweep(ExperimentConfig cfg, const std::string& key, std::vector<double> values) {
  cfg.sweep_param = key;
  cfg.sweep_values = std::move(values);
  std::ostringstream sink;
  auto out = experiments::run_sweep(cfg, sink);
  record(cfg, out.rows);
  return out.rows;
}

Outcome bound_tightness() {
  auto cfg = base_config();
  cfg.sensing = {1.0, 0.0, 0.4, 0.6};
  cfg.params.noise_power = 0.2;
  cfg.params.primary_power = 1.0;
  cfg.power_points = 20;
  cfg.n_mc = 2000000;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = experiments::validate_bound(cfg);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.rate_lb - r.rate_exact) / r.rate_exact_stderr);
  return {worst <= kBoundSigmas && secs < 120.0,
          "max |lb-exact|/stderr = " + fmt("%.3f", worst) + " over 20 points, runtime " + fmt("%.1f", secs) + " s"};
}

Outcome gap_ordering() {
  auto cfg = base_config();
  cfg.sensing = {0.8, 0.2, 0.4, 0.6};
  cfg.power_points = 20;
  cfg.n_mc = 2000000;
  double mean_gap[2];
  double worst_sigma = 1e300;
  const double noises[2] = {0.2, 1.0};
  for (int j = 0; j < 2; ++j) {
    cfg.params.noise_power = noises[j];
    const auto rows = experiments::validate_bound(cfg);
    double sum = 0.0;
    for (const auto& r : rows) {
      const double gap = r.rate_exact - r.rate_lb;
      sum += gap;
      worst_sigma = std::min(worst_sigma, gap / r.rate_exact_stderr);
    }
    mean_gap[j] = sum / static_cast<double>(rows.size());
  }
  const bool ok = mean_gap[0] > mean_gap[1] && worst_sigma >= -kBoundSigmas;
  return {ok, "mean gap N0=0.2: " + fmt("%.5g", mean_gap[0]) + ", N0=1: " + fmt("%.5g", mean_gap[1]) +
                  ", min gap/stderr = " + fmt("%.2f", worst_sigma)};
}

Outcome quasiconcavity() {
  const ChannelSampleSet one({1.0}, {1.0});
  const oracle::GridSpec grid{1e-3, 1e3, 50};
  const auto pts = grid.points();
  struct Case {
    SensingSpec spec;
    double noise;
  };
  const Case cases[] = {{{1.0, 0.0, 0.4, 0.6}, 0.2}, {{0.8, 0.2, 0.4, 0.6}, 0.2}, {{0.8, 0.2, 0.4, 0.6}, 1.0}};
  int bad = 0;
  std::string peaks;
  for (const auto& c : cases) {
    SystemParams params;
    params.noise_power = c.noise;
    params.circuit_power = 0.1;
    const auto probs = branch_probs(c.spec);
    std::vector<double> ee;
    for (double p : pts) {
      ee.push_back(rate_lower_bound(params, probs, one, PowerPolicy::constant(1, p, p)) / (p + params.circuit_power));
    }
    const auto top = static_cast<std::size_t>(std::max_element(ee.begin(), ee.end()) - ee.begin());
    for (std::size_t i = 1; i < ee.size(); ++i) {
      if (i <= top && ee[i] < ee[i - 1]) ++bad;
      if (i > top && ee[i] > ee[i - 1]) ++bad;
    }
    peaks += (peaks.empty() ? "" : ", ") + fmt("%.3g", pts[top]);
  }
  return {bad == 0, "3 curves single-peaked, peaks at P = " + peaks + ", violations " + std::to_string(bad)};
}

Outcome kkt_vs_oracle() {
  const SystemParams params;
  const SensingSpec spec{0.8, 0.1, 0.4, 0.6};
  const auto cons = Constraints::average(from_db(-4.0), from_db(-8.0));
  const auto set = draw_samples({1.0, 1.0, 20, 2024});
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = solve(params, spec, cons, set, {});
  record(cons, res);
  const auto constant = oracle::best_constant_policy(params, spec, cons, set, {1e-3, 10.0, 200});
  const auto bf = oracle::brute_force_policy(params, spec, cons, set);
  const double secs = seconds_since(t0);
  const double rel = std::abs(res.ee_opt - bf.breakdown.ee) / bf.breakdown.ee;
  const bool ok = res.converged && res.ee_opt >= constant.breakdown.ee && rel <= kOracleRel && secs < 60.0;
  return {ok, "solver " + fmt("%.6g", res.ee_opt) + ", brute force " + fmt("%.6g", bf.breakdown.ee) + " (rel " +
                  fmt("%.2e", rel) + "), best constant " + fmt("%.6g", constant.breakdown.ee) + ", runtime " +
                  fmt("%.1f", secs) + " s"};
}

Outcome stationarity() {
  const SystemParams params;
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> e(1.0);
  double worst = 0.0, worst_clamped = -1e300;
  int interior = 0, clamped = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    const double prior = 0.1 + 0.8 * u(rng);
    const SensingSpec spec{0.5 + 0.5 * u(rng), 0.5 * u(rng), prior, 1.0 - prior};
    const auto probs = branch_probs(spec);
    const DualState d{1.5 * u(rng), 1.5 * u(rng), 1.5 * u(rng)};
    const double h = e(rng), g = e(rng);
    for (Branch b : {Branch::kIdle, Branch::kBusy}) {
      const double price = effective_price(b, spec, probs, g, d);
      if (!(price > 0.0)) continue;
      const double p = optimal_power_avg(b, params, spec, probs, h, g, d);
      const double r = oracle::stationarity_residual(b, params, spec, probs, h, g, d, p);
      if (p > 0.0) {
        ++interior;
        worst = std::max(worst, std::abs(r) / price);
      } else {
        ++clamped;
        worst_clamped = std::max(worst_clamped, r);
      }
    }
  }
  const bool ok = worst <= kResidualRel && worst_clamped <= 0.0;
  return {ok, std::to_string(interior) + " interior (max rel residual " + fmt("%.2e", worst) + "), " +
                  std::to_string(clamped) + " clamped (max residual " + fmt("%.3g", worst_clamped) + ")"};
}

Outcome dinkelbach() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  std::size_t max_outer = 0;
  double worst_f = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const SensingSpec spec{0.6 + 0.4 * u(rng), 0.3 * u(rng), 0.4, 0.6};
    const double p_db = -10.0 + 15.0 * u(rng);
    const double q_db = -12.0 + 12.0 * u(rng);
    const auto cons = u(rng) < 0.5 ? Constraints::average(from_db(p_db), from_db(q_db))
                                   : Constraints::peak(from_db(p_db), from_db(p_db), from_db(q_db));
    const auto res = solve(SystemParams{}, spec, cons, FadingConfig{1.0, 1.0, 2000, 500 + static_cast<unsigned>(trial)},
                           SolverConfig{});
    record(cons, res);
    const auto& tr = res.trace;
    bool ok = res.converged && tr.size() <= kMaxOuter && std::abs(tr.back().f_alpha) <= kDinkelbachEps;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      if (tr[i].alpha < tr[i - 1].alpha - kDinkelbachEps) ok = false;
      if (tr[i].f_alpha > tr[i - 1].f_alpha + kDinkelbachEps) ok = false;
    }
    if (!ok) ++bad;
    max_outer = std::max(max_outer, tr.size());
    worst_f = std::max(worst_f, std::abs(tr.back().f_alpha));
  }
  return {bad == 0, "20 configs, " + std::to_string(bad) + " violations, max outer iters " + std::to_string(max_outer) +
                        ", max final |F| " + fmt("%.2e", worst_f)};
}

Outcome fig2() {
  auto cfg = base_config();
  cfg.q_avg = from_db(-1.0);
  cfg.fading.n_samples = static_cast<std::size_t>(kFig2Samples);
  const double tol = 3.0 / std::sqrt(kFig2Samples);
  const auto limits = linspace(-20.0, 10.0, 13);
  std::vector<double> ee[2][2];  // [perfect][peak]
  for (int perfect = 0; perfect < 2; ++perfect) {
    for (int peak = 0; peak < 2; ++peak) {
      auto c = cfg;
      c.sensing = perfect ? SensingSpec{1.0, 0.0, 0.4, 0.6} : SensingSpec{0.8, 0.1, 0.4, 0.6};
      c.regime = peak ? Regime::kPeakTxAvgInterf : Regime::kAvgTxAvgInterf;
      ee[perfect][peak] = column(sweep(c, "p_limit_db", limits), [](const SolveRow& r) { return r.result.ee_opt; });
    }
  }
  bool a = true, b = true, c = true, d = true;
  double sat = 0.0;
  for (int perfect = 0; perfect < 2; ++perfect) {
    for (int peak = 0; peak < 2; ++peak) {
      const auto& v = ee[perfect][peak];
      a = a && nondecreasing(v, tol);
      const double s = std::abs(v[v.size() - 1] - v[v.size() - 2]) / v[v.size() - 1];
      sat = std::max(sat, s);
      b = b && s <= kSaturationRel;
    }
  }
  for (std::size_t i = 0; i < limits.size(); ++i) {
    for (int peak = 0; peak < 2; ++peak) c = c && ee[1][peak][i] >= ee[0][peak][i] * (1.0 - tol);
    for (int perfect = 0; perfect < 2; ++perfect) d = d && ee[perfect][0][i] >= ee[perfect][1][i] * (1.0 - tol);
  }
  auto yn = [](bool x) { return x ? "ok" : "violated"; };
  return {a && b && c && d, std::string("(a) nondecreasing ") + yn(a) + ", (b) saturation " + yn(b) + " (max last-step change " +
                                fmt("%.2e", sat) + "), (c) perfect >= imperfect " + yn(c) + ", (d) avg >= peak " + yn(d) +
                                "; EE imperfect avg " + fmt("%.4g", ee[0][0].front()) + " -> " +
                                fmt("%.4g", ee[0][0].back())};
}

Outcome fig3() {
  auto cfg = base_config();
  cfg.sensing.p_false_alarm = 0.1;
  const auto rows = sweep(cfg, "p_detect", linspace(0.5, 1.0, 6));
  const bool ee = nondecreasing(column(rows, [](const SolveRow& r) { return r.result.ee_opt; }), kSweepRel);
  const bool rate = nondecreasing(column(rows, [](const SolveRow& r) { return r.result.breakdown.rate; }), kSweepRel);
  const bool p0 = nondecreasing(column(rows, [](const SolveRow& r) { return r.result.breakdown.mean_p_idle; }), kSweepRel);
  const bool p1 = nonincreasing(column(rows, [](const SolveRow& r) { return r.result.breakdown.mean_p_busy; }), kSweepRel);
  const bool conv = std::all_of(rows.begin(), rows.end(), [](const SolveRow& r) { return r.result.converged; });
  return {ee && rate && p0 && p1 && conv,
          std::string("EE ") + (ee ? "up" : "NOT up") + ", rate " + (rate ? "up" : "NOT up") + ", P0 " +
              (p0 ? "up" : "NOT up") + ", P1 " + (p1 ? "down" : "NOT down") + "; EE " +
              fmt("%.4g", rows.front().result.ee_opt) + " -> " + fmt("%.4g", rows.back().result.ee_opt)};
}

Outcome fig4() {
  auto cfg = base_config();
  cfg.sensing.p_detect = 0.8;
  const auto rows = sweep(cfg, "p_false_alarm", linspace(0.0, 0.5, 6));
  const bool ee = nonincreasing(column(rows, [](const SolveRow& r) { return r.result.ee_opt; }), kSweepRel);
  const bool rate = nonincreasing(column(rows, [](const SolveRow& r) { return r.result.breakdown.rate; }), kSweepRel);
  const bool conv = std::all_of(rows.begin(), rows.end(), [](const SolveRow& r) { return r.result.converged; });
  return {ee && rate && conv, std::string("EE ") + (ee ? "down" : "NOT down") + ", rate " + (rate ? "down" : "NOT down") +
                                  "; EE " + fmt("%.4g", rows.front().result.ee_opt) + " -> " +
                                  fmt("%.4g", rows.back().result.ee_opt)};
}

Outcome compliance() {
  double worst_q = 0.0, worst_tx = 0.0, worst_cs = 0.0;
  for (const auto& s : solved) {
    const auto& r = s.result;
    worst_q = std::max(worst_q, r.breakdown.avg_interference / s.cons.q_avg - 1.0);
    if (s.cons.regime == Regime::kAvgTxAvgInterf) {
      worst_tx = std::max(worst_tx, r.breakdown.avg_tx_power / *s.cons.p_avg - 1.0);
      worst_cs = std::max(worst_cs, std::abs(r.duals.lambda * r.slack.tx));
    } else {
      for (double p : r.policy.p_idle) worst_tx = std::max(worst_tx, p / *s.cons.p_peak_idle - 1.0);
      for (double p : r.policy.p_busy) worst_tx = std::max(worst_tx, p / *s.cons.p_peak_busy - 1.0);
    }
    worst_cs = std::max(worst_cs, std::abs(r.duals.nu * r.slack.interference));
  }
  const bool ok = !solved.empty() && worst_q <= kComplianceRel && worst_tx <= kComplianceRel && worst_cs <= kSlacknessAbs;
  return {ok, std::to_string(solved.size()) + " converged solves, max excess interference " + fmt("%.2e", worst_q) +
                  ", transmit " + fmt("%.2e", worst_tx) + ", max |multiplier*slack| " + fmt("%.2e", worst_cs)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const char* cli) {
  auto cfg = base_config();
  cfg.fading.n_samples = 2000;
  cfg.sweep_param = "p_detect";
  cfg.sweep_values = {0.6, 0.8, 1.0};
  cfg.power_points = 5;
  cfg.n_mc = 50000;
  int same = 0, total = 0;
  auto compare = [&](const std::string& a, const std::string& b) {
    ++total;
    if (a == b && !a.empty()) ++same;
  };
  std::ostringstream s1, s2, t1, t2, w1, w2, b1, b2;
  experiments::run_solve(cfg, s1, &t1);
  experiments::run_solve(cfg, s2, &t2);
  experiments::run_sweep(cfg, w1);
  auto single = cfg;
  single.workers = 1;
  experiments::run_sweep(single, w2);
  experiments::run_validate_bound(cfg, b1);
  experiments::run_validate_bound(cfg, b2);
  compare(s1.str(), s2.str());
  compare(t1.str(), t2.str());
  compare(w1.str(), w2.str());
  compare(b1.str(), b2.str());

  if (cli) {
    const auto dir = std::filesystem::temp_directory_path() / ("eecr_acceptance_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(dir);
    const auto conf = dir / "run.cfg";
    {
      std::ofstream out(conf);
      out << "n_samples = 2000\nseed = 11\nsweep_param = p_detect\nsweep_values = 0.6, 0.8, 1.0\n"
          << "power_points = 5\nn_mc = 50000\n";
    }
    for (const char* cmd : {"solve", "sweep", "validate-bound"}) {
      std::string outs[2];
      for (int run = 0; run < 2; ++run) {
        const auto out = dir / (std::string(cmd) + std::to_string(run) + ".csv");
        const std::string line = std::string("\"") + cli + "\" " + cmd + " --config \"" + conf.string() + "\" --out \"" +
                                 out.string() + "\" --workers 2 > /dev/null 2>&1";
        if (std::system(line.c_str()) == 0) outs[run] = slurp(out);
      }
      compare(outs[0], outs[1]);
    }
    std::filesystem::remove_all(dir);
  }
  return {same == total, std::to_string(same) + "/" + std::to_string(total) +
                             " output pairs byte-identical (solve, trace, sweep, validate-bound" +
                             (cli ? "; CLI solve, sweep, validate-bound)" : ")")};
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli = argc > 1 ? argv[1] : nullptr;
  const auto backend = kernels::backend_name(kernels::active().backend);
  std::printf("kernels: %.*s, workers: %zu\n", static_cast<int>(backend.size()), backend.data(), workers());
  run(1, "bound tightness", bound_tightness);
  run(2, "bound gap ordering", gap_ordering);
  run(3, "EE quasiconcavity", quasiconcavity);
  run(4, "KKT vs brute force", kkt_vs_oracle);
  run(5, "stationarity residuals", stationarity);
  run(6, "Dinkelbach behaviour", dinkelbach);
  run(7, "transmit-limit sweep", fig2);
  run(8, "detection sweep", fig3);
  run(9, "false-alarm sweep", fig4);
  run(10, "constraint compliance", compliance);
  run(11, "determinism", [cli] { return determinism(cli); });
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}

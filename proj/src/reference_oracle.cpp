#include "eecr/reference_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>
#include <utility>

#include "eecr/error.hpp"

namespace eecr::oracle {

void GridSpec::validate() const {
  if (!(p_min >= 0.0)) throw InvalidConfig("grid p_min must be >= 0");
  if (!(p_max > p_min)) throw InvalidConfig("grid p_max must exceed p_min");
  if (n_points < 2) throw InvalidConfig("grid needs at least 2 points");
  if (spacing == Spacing::kGeometric && !(p_min > 0.0)) {
    throw InvalidConfig("geometric grid needs p_min > 0");
  }
}

std::vector<double> GridSpec::points() const {
  validate();
  std::vector<double> out(n_points);
  const double last = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double f = static_cast<double>(i) / last;
    out[i] = spacing == Spacing::kLinear ? p_min + f * (p_max - p_min)
                                         : p_min * std::pow(p_max / p_min, f);
  }
  out.back() = p_max;
  return out;
}

namespace {

// Mean over samples of log2(1 + p |h|^2 / noise) for every grid power.
std::vector<double> mean_log_table(const ChannelSampleSet& samples, double noise,
                                   const std::vector<double>& powers) {
  std::vector<double> out(powers.size());
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (std::size_t j = 0; j < powers.size(); ++j) {
    double s = 0.0;
    for (double h : samples.gains_h()) s += std::log2(1.0 + powers[j] * h / noise);
    out[j] = s * inv_n;
  }
  return out;
}

}  // namespace

ConstantPolicyResult best_constant_policy(const SystemParams& params, const SensingSpec& spec,
                                          const Constraints& cons, const ChannelSampleSet& samples,
                                          const GridSpec& grid) {
  params.validate();
  cons.validate();
  const BranchProbs probs = branch_probs(spec);
  const auto pts = grid.points();
  const double mean_g = expectation(samples, [](double, double g) { return g; });
  const double table_idle_pr = probs.prob_decision_idle;
  const double table_busy_pr = probs.prob_decision_busy;
  const auto log_idle = mean_log_table(samples, params.disturbance(probs, 0), pts);
  const auto log_busy = mean_log_table(samples, params.disturbance(probs, 1), pts);
  const double w_idle = interference_weight(spec, Branch::kIdle);
  const double w_busy = interference_weight(spec, Branch::kBusy);

  ConstantPolicyResult best;
  double best_ee = -1.0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = 0; b < pts.size(); ++b) {
      const double p0 = pts[a], p1 = pts[b];
      const double tx = table_idle_pr * p0 + table_busy_pr * p1;
      const double interf = (w_idle * p0 + w_busy * p1) * mean_g;
      if (interf > cons.q_avg) continue;
      if (cons.regime == Regime::kAvgTxAvgInterf) {
        if (tx > *cons.p_avg) continue;
      } else if (p0 > *cons.p_peak_idle || p1 > *cons.p_peak_busy) {
        continue;
      }
      const double rate =
          params.data_fraction() * (table_idle_pr * log_idle[a] + table_busy_pr * log_busy[b]);
      const double total = tx + params.circuit_power;
      const double ee = total > 0.0 ? rate / total : 0.0;
      if (ee > best_ee) {
        best_ee = ee;
        best.p_idle = p0;
        best.p_busy = p1;
        best.feasible = true;
      }
    }
  }
  const auto policy = PowerPolicy::constant(samples.size(), best.p_idle, best.p_busy);
  if (best.feasible || params.circuit_power > 0.0) {
    best.breakdown = power_accounting(params, probs, spec, samples, policy);
  }
  return best;
}

double stationarity_residual(Branch b, const SystemParams& params, const SensingSpec& spec,
                             const BranchProbs& probs, double gain_h, double gain_g,
                             const DualState& duals, double power) {
  const int k = index(b);
  const double pr = probs.decision(k);
  const double marginal_rate = params.data_fraction() * pr * gain_h * std::numbers::log2e /
                               (params.disturbance(probs, k) + power * gain_h);
  return marginal_rate - (duals.lambda + duals.alpha) * pr -
         duals.nu * gain_g * interference_weight(spec, b);
}

double lagrangian_integrand(Branch b, const SystemParams& params, const SensingSpec& spec,
                            const BranchProbs& probs, double gain_h, double gain_g,
                            const DualState& duals, double power) {
  const int k = index(b);
  const double pr = probs.decision(k);
  return params.data_fraction() * pr * std::log2(1.0 + power * gain_h / params.disturbance(probs, k)) -
         (duals.lambda + duals.alpha) * pr * power -
         duals.nu * gain_g * interference_weight(spec, b) * power;
}

namespace {

// Brute-force parametrized problem on a small sample set. Each sample and
// branch has its own power grid; log terms are tabulated once.
class GridProblem {
 public:
  GridProblem(const SystemParams& params, const SensingSpec& spec, const Constraints& cons,
              const ChannelSampleSet& samples, const BruteForceOptions& opts)
      : params_(params), cons_(cons), samples_(samples), probs_(branch_probs(spec)) {
    n_ = samples.size();
    const bool peak = cons.regime == Regime::kPeakTxAvgInterf;
    double lambda_hi = 0.0, nu_hi = 0.0;
    for (int k = 0; k < 2; ++k) {
      const Branch b = static_cast<Branch>(k);
      weight_[k] = interference_weight(spec, b);
      const double pr = probs_.decision(k);
      double top;
      if (peak) {
        top = cons.peak(b);
      } else {
        const double floor_pr = std::max(pr, 1e-12);
        top = static_cast<double>(n_) * (*cons.p_avg) / floor_pr;
      }
      // Interference alone can also bound power when Q is tight.
      const double bottom = 1e-6 * std::min(top, peak ? top : *cons.p_avg);
      grid_[k].assign(1, 0.0);
      for (std::size_t j = 0; j < opts.power_points; ++j) {
        const double f = static_cast<double>(j) / static_cast<double>(opts.power_points - 1);
        grid_[k].push_back(bottom * std::pow(top / bottom, f));
      }
      grid_[k].back() = top;
      const double noise = params.disturbance(probs_, k);
      logs_[k].resize(n_ * grid_[k].size());
      for (std::size_t i = 0; i < n_; ++i) {
        const double h = samples.gains_h()[i];
        for (std::size_t j = 0; j < grid_[k].size(); ++j) {
          logs_[k][i * grid_[k].size() + j] = std::log2(1.0 + grid_[k][j] * h / noise);
        }
        const double slope0 = params.data_fraction() * h * std::numbers::log2e / noise;
        if (pr > 0.0) lambda_hi = std::max(lambda_hi, slope0);
        const double g = samples.gains_g()[i];
        if (weight_[k] > 0.0 && g > 0.0) {
          nu_hi = std::max(nu_hi, pr * slope0 / (weight_[k] * g));
        }
      }
    }
    lambda_hi_ = peak ? 0.0 : lambda_hi;
    nu_hi_ = nu_hi;
  }

  struct Eval {
    double value = 0.0;  // dual function
    double tx = 0.0;
    double interference = 0.0;
  };

  // Dual function at (alpha, lambda, nu), with the per-sample argmax powers
  // written into `policy` when non-null.
  Eval dual(double alpha, double lambda, double nu, PowerPolicy* policy) const {
    const double inv_n = 1.0 / static_cast<double>(n_);
    Eval e;
    double lagr = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double pr = probs_.decision(k);
      const double rate_coef = params_.data_fraction() * pr;
      const auto& grid = grid_[k];
      const std::size_t m = grid.size();
      for (std::size_t i = 0; i < n_; ++i) {
        const double price = (alpha + lambda) * pr + nu * weight_[k] * samples_.gains_g()[i];
        const double* row = logs_[k].data() + i * m;
        double best = 0.0;
        std::size_t arg = 0;
        for (std::size_t j = 1; j < m; ++j) {
          const double v = rate_coef * row[j] - price * grid[j];
          if (v > best) {
            best = v;
            arg = j;
          }
        }
        lagr += best;
        e.tx += pr * grid[arg];
        e.interference += weight_[k] * grid[arg] * samples_.gains_g()[i];
        if (policy) (k == 0 ? policy->p_idle : policy->p_busy)[i] = grid[arg];
      }
    }
    e.tx *= inv_n;
    e.interference *= inv_n;
    e.value = lagr * inv_n - alpha * params_.circuit_power + nu * cons_.q_avg;
    if (cons_.regime == Regime::kAvgTxAvgInterf) e.value += lambda * (*cons_.p_avg);
    return e;
  }

  template <class F>
  static std::pair<double, double> golden_min(F&& f, double lo, double hi, std::size_t iters) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    for (std::size_t it = 0; it < iters; ++it) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = f(d);
      }
    }
    // The bracket ends are candidates too: the minimum may sit on the boundary.
    double x = fc <= fd ? c : d, fx = std::min(fc, fd);
    const double fa = f(lo);
    if (fa <= fx) x = lo, fx = fa;
    return {x, fx};
  }

  // Minimum of the dual function over the multipliers, returning (value,
  // lambda, nu).
  std::tuple<double, double, double> parametrized_max(double alpha, std::size_t iters) const {
    auto inner = [&](double lambda) {
      return golden_min([&](double nu) { return dual(alpha, lambda, nu, nullptr).value; }, 0.0,
                        nu_hi_, iters);
    };
    if (lambda_hi_ <= 0.0) {
      auto [nu, v] = inner(0.0);
      return {v, 0.0, nu};
    }
    auto [lambda, v] = golden_min([&](double l) { return inner(l).second; }, 0.0, lambda_hi_, iters);
    const auto [nu, v2] = inner(lambda);
    return {v2, lambda, nu};
  }

  std::size_t size() const { return n_; }
  const BranchProbs& probs() const { return probs_; }

 private:
  const SystemParams& params_;
  const Constraints& cons_;
  const ChannelSampleSet& samples_;
  BranchProbs probs_;
  std::size_t n_ = 0;
  double weight_[2] = {0.0, 0.0};
  std::vector<double> grid_[2];
  std::vector<double> logs_[2];
  double lambda_hi_ = 0.0;
  double nu_hi_ = 0.0;
};

}  // namespace

BruteForceResult brute_force_policy(const SystemParams& params, const SensingSpec& spec,
                                    const Constraints& cons, const ChannelSampleSet& samples,
                                    const BruteForceOptions& opts) {
  params.validate();
  cons.validate();
  if (!(params.circuit_power > 0.0)) throw InvalidConfig("brute-force oracle needs Pc > 0");
  if (!(cons.q_avg > 0.0)) throw InvalidConfig("brute-force oracle needs q_avg > 0");
  const GridProblem problem(params, spec, cons, samples, opts);

  // G(alpha) is decreasing with G(0) >= 0; bracket its root.
  double lo = 0.0, hi = 1.0;
  while (std::get<0>(problem.parametrized_max(hi, opts.golden_iters)) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw Error("brute-force oracle failed to bracket the EE level");
  }
  for (std::size_t it = 0; it < opts.bisection_iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::get<0>(problem.parametrized_max(mid, opts.golden_iters)) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  BruteForceResult out;
  out.alpha = lo;
  const auto [value, lambda, nu] = problem.parametrized_max(lo, opts.golden_iters);
  (void)value;
  out.duals = {lo, lambda, nu};
  const BranchProbs& probs = problem.probs();

  // The grid argmax at the optimal multipliers may sit just past a
  // constraint; scale it back. Neighbouring multipliers give alternative
  // feasible candidates, and the best one is kept.
  double best_ee = -1.0;
  for (double dl : {1.0, 0.999, 1.001, 0.99, 1.01}) {
    for (double dn : {1.0, 0.999, 1.001, 0.99, 1.01}) {
      PowerPolicy cand = PowerPolicy::zeros(samples.size());
      const auto e = problem.dual(lo, lambda * dl, nu * dn, &cand);
      double scale = 1.0;
      if (cons.regime == Regime::kAvgTxAvgInterf && e.tx > *cons.p_avg) {
        scale = std::min(scale, *cons.p_avg / e.tx);
      }
      if (e.interference > cons.q_avg) scale = std::min(scale, cons.q_avg / e.interference);
      for (auto& p : cand.p_idle) p *= scale;
      for (auto& p : cand.p_busy) p *= scale;
      const auto acc = power_accounting(params, probs, spec, samples, cand);
      if (acc.ee > best_ee) {
        best_ee = acc.ee;
        out.policy = std::move(cand);
        out.breakdown = acc;
      }
    }
  }
  return out;
}

}  // namespace eecr::oracle

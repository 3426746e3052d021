#include "eecr/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>

#include "eecr/error.hpp"
#include "eecr/kernels.hpp"
#include "eecr/format.hpp"

namespace eecr {

void SolverConfig::validate() const {
  if (!(tolerance > 0.0)) throw InvalidConfig("tolerance must be > 0");
  if (!(step_size > 0.0)) throw InvalidConfig("step_size must be > 0");
  if (max_outer_iters < 1 || max_inner_iters < 1) {
    throw InvalidConfig("iteration caps must be >= 1");
  }
  if (!(alpha_init >= 0.0) || !(lambda_init >= 0.0) || !(nu_init >= 0.0)) {
    throw InvalidConfig("alpha_init, lambda_init and nu_init must be >= 0");
  }
}

double dinkelbach_F(double alpha, const SystemParams& params, [[maybe_unused]] const SensingSpec& spec,
                    const BranchProbs& probs, const ChannelSampleSet& samples,
                    const PowerPolicy& policy) {
  const double rate = rate_lower_bound(params, probs, samples, policy);
  double tx = 0.0;
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (int k = 0; k < 2; ++k) {
    const auto& p = k == 0 ? policy.p_idle : policy.p_busy;
    double s = 0.0;
    for (double v : p) s += v;
    tx += probs.decision(k) * s * inv_n;
  }
  return rate - alpha * (tx + params.circuit_power);
}

namespace {

struct Moments {
  double tx = 0.0;
  double interference = 0.0;
};

Moments policy_moments(const SensingSpec& spec, const BranchProbs& probs,
                       const ChannelSampleSet& samples, const PowerPolicy& policy) {
  const std::size_t n = samples.size();
  const std::span<const double> h(samples.gains_h().data(), n);
  const std::span<const double> g(samples.gains_g().data(), n);
  const double inv_n = 1.0 / static_cast<double>(n);
  Moments m;
  for (Branch b : {Branch::kIdle, Branch::kBusy}) {
    const auto& p = b == Branch::kIdle ? policy.p_idle : policy.p_busy;
    const auto s = kernels::branch_sums(h, g, std::span<const double>(p.data(), n), 1.0, false);
    m.tx += probs.decision(index(b)) * s.power * inv_n;
    m.interference += interference_weight(spec, b) * s.interference * inv_n;
  }
  return m;
}

// Q_avg = 0 forbids transmission in every branch that reaches the primary
// receiver.
void blocked_branches(const SensingSpec& spec, const Constraints& cons, bool (&blocked)[2]) {
  for (Branch b : {Branch::kIdle, Branch::kBusy}) {
    blocked[index(b)] = cons.q_avg <= 0.0 && interference_weight(spec, b) > 0.0;
  }
}

}  // namespace

InnerResult solve_inner(double alpha, const Constraints& cons, const SystemParams& params,
                        const SensingSpec& spec, const BranchProbs& probs,
                        const ChannelSampleSet& samples, const SolverConfig& cfg,
                        const DualState& start) {
  cfg.validate();
  cons.validate();
  if (!(alpha >= 0.0)) throw InvalidConfig("alpha must be >= 0");

  const bool avg_regime = cons.regime == Regime::kAvgTxAvgInterf;
  bool blocked[2];
  blocked_branches(spec, cons, blocked);
  const bool update_nu = cons.q_avg > 0.0;

  InnerResult res;
  res.duals = {alpha, avg_regime ? start.lambda : 0.0, update_nu ? start.nu : 0.0};
  // With alpha = 0 the average regime needs lambda > 0 to price power on
  // samples that carry no interference cost.
  if (avg_regime && alpha == 0.0 && res.duals.lambda <= 0.0) res.duals.lambda = 1.0;

  const double eps = cfg.tolerance;
  const double tx_tol = avg_regime ? eps * std::min(1.0, *cons.p_avg) : 0.0;
  const double q_tol = eps * std::min(1.0, std::max(cons.q_avg, 0.0));

  for (std::size_t k = 0;; ++k) {
    fill_policy(params, spec, probs, samples, res.duals, cons, res.policy, blocked);
    const auto m = policy_moments(spec, probs, samples, res.policy);
    res.avg_tx_power = m.tx;
    res.avg_interference = m.interference;
    res.slack.tx = avg_regime ? *cons.p_avg - m.tx : 0.0;
    res.slack.interference = update_nu ? cons.q_avg - m.interference : 0.0;
    res.iterations = k + 1;

    const bool cs_ok = std::abs(res.duals.lambda * res.slack.tx) <= eps &&
                       std::abs(res.duals.nu * res.slack.interference) <= eps;
    const bool feasible = res.slack.tx >= -tx_tol && res.slack.interference >= -q_tol;
    if (cs_ok && feasible) {
      res.converged = true;
      return res;
    }
    if (res.iterations >= cfg.max_inner_iters) return res;

    const double t = cfg.step_rule == StepRule::kDiminishing
                         ? cfg.step_size / std::sqrt(static_cast<double>(k + 1))
                         : cfg.step_size;
    const auto update = cfg.step_rule == StepRule::kRelative ? relative_step : subgradient_step;
    if (avg_regime) {
      const double prev = res.duals.lambda;
      double next = update(prev, t, *cons.p_avg, res.avg_tx_power);
      if (alpha == 0.0 && next < 0.5 * prev) next = 0.5 * prev;
      res.duals.lambda = next;
    }
    if (update_nu) {
      res.duals.nu = update(res.duals.nu, t, cons.q_avg, res.avg_interference);
    }
  }
}

SolveResult solve(const SystemParams& params, const SensingSpec& spec, const Constraints& cons,
                  const ChannelSampleSet& samples, const SolverConfig& cfg) {
  params.validate();
  cfg.validate();
  cons.validate();
  const BranchProbs probs = branch_probs(spec);

  SolveResult out;
  bool blocked[2];
  blocked_branches(spec, cons, blocked);
  const bool all_blocked = (blocked[0] || probs.decision(0) <= 0.0) &&
                           (blocked[1] || probs.decision(1) <= 0.0);
  if (all_blocked) {
    out.degenerate = true;
    out.converged = true;
    out.policy = PowerPolicy::zeros(samples.size());
    out.slack = {cons.p_avg ? *cons.p_avg : 0.0, cons.q_avg};
    if (params.circuit_power > 0.0) {
      out.breakdown = power_accounting(params, probs, spec, samples, out.policy);
    }
    return out;
  }

  double alpha = cfg.alpha_init;
  DualState warm{alpha, cfg.lambda_init, cfg.nu_init};
  for (std::size_t n = 0; n < cfg.max_outer_iters; ++n) {
    InnerResult inner = solve_inner(alpha, cons, params, spec, probs, samples, cfg, warm);
    EEBreakdown acc;
    try {
      acc = power_accounting(params, probs, spec, samples, inner.policy);
    } catch (const DegenerateObjective&) {
      // Pc = 0 and the inner solve returned the zero policy.
      out.degenerate = true;
      out.converged = inner.converged;
      out.policy = std::move(inner.policy);
      out.duals = inner.duals;
      out.slack = inner.slack;
      return out;
    }
    const double f = acc.rate - alpha * acc.total_power;
    out.trace.push_back({n, alpha, f, inner.duals.lambda, inner.duals.nu, acc.rate,
                         acc.avg_tx_power, acc.avg_interference, inner.iterations,
                         inner.converged});
    warm = inner.duals;
    out.policy = std::move(inner.policy);
    out.duals = inner.duals;
    out.slack = inner.slack;
    out.breakdown = acc;
    out.ee_opt = acc.ee;
    if (std::abs(f) <= cfg.tolerance) {
      out.converged = inner.converged;
      break;
    }
    alpha = acc.ee;
  }
  out.duals.alpha = alpha;
  return out;
}

SolveResult solve(const SystemParams& params, const SensingSpec& spec, const Constraints& cons,
                  const FadingConfig& fading, const SolverConfig& cfg) {
  return solve(params, spec, cons, draw_samples(fading), cfg);
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << "outer_iter,alpha,F_alpha,lambda,nu,rate,avg_tx_power,avg_interference,inner_iters\n";
  for (const auto& r : trace) {
    os << r.outer_iter << ',' << fmt_num(r.alpha) << ',' << fmt_num(r.f_alpha) << ','
       << fmt_num(r.lambda) << ',' << fmt_num(r.nu) << ',' << fmt_num(r.rate) << ','
       << fmt_num(r.avg_tx_power) << ',' << fmt_num(r.avg_interference) << ',' << r.inner_iters
       << '\n';
  }
}

}  // namespace eecr

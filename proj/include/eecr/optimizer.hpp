#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "eecr/channel.hpp"
#include "eecr/power_adaptation.hpp"
#include "eecr/rate_model.hpp"
#include "eecr/sensing.hpp"

namespace eecr {

enum class StepRule {
  kConstant,     // t
  kDiminishing,  // t / sqrt(k + 1), k counted within each inner solve
  // multiplier * exp(t * (achieved - limit) / max(achieved, limit)), restarted
  // from t when it sits at zero; for limits many decades away from unity
  kRelative,
};

struct SolverConfig {
  double tolerance = 1e-4;
  double step_size = 0.1;
  StepRule step_rule = StepRule::kConstant;
  std::size_t max_outer_iters = 50;
  std::size_t max_inner_iters = 5000;
  double alpha_init = 0.0;
  double lambda_init = 1.0;
  double nu_init = 1.0;

  void validate() const;
};

/// Slack of each constraint (limit - achieved); zero for an absent one.
struct ConstraintSlack {
  double tx = 0.0;
  double interference = 0.0;
};

struct InnerResult {
  PowerPolicy policy;
  DualState duals;
  ConstraintSlack slack;
  double avg_tx_power = 0.0;
  double avg_interference = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct TraceRecord {
  std::size_t outer_iter = 0;
  double alpha = 0.0;
  double f_alpha = 0.0;
  double lambda = 0.0;
  double nu = 0.0;
  double rate = 0.0;
  double avg_tx_power = 0.0;
  double avg_interference = 0.0;
  std::size_t inner_iters = 0;
  bool inner_converged = false;
};

struct SolveResult {
  double ee_opt = 0.0;
  DualState duals;
  PowerPolicy policy;
  EEBreakdown breakdown;
  ConstraintSlack slack;
  std::vector<TraceRecord> trace;
  bool converged = false;
  // Only the zero policy is feasible (e.g. q_avg = 0 with every branch
  // interfering).
  bool degenerate = false;
};

/// Projected subgradient update [multiplier - step * (limit - achieved)]^+.
inline double subgradient_step(double multiplier, double step, double limit, double achieved) {
  const double next = multiplier - step * (limit - achieved);
  return next > 0.0 ? next : 0.0;
}

/// Relative update used by StepRule::kRelative.
inline double relative_step(double multiplier, double step, double limit, double achieved) {
  const double scale = achieved > limit ? achieved : limit;
  if (!(scale > 0.0)) return multiplier;
  if (multiplier <= 0.0) return achieved > limit ? step : 0.0;
  return multiplier * std::exp(step * (achieved - limit) / scale);
}

/// Parametrized objective R - alpha * P_tot evaluated at `policy`.
double dinkelbach_F(double alpha, const SystemParams& params, const SensingSpec& spec,
                    const BranchProbs& probs, const ChannelSampleSet& samples,
                    const PowerPolicy& policy);

/// Projected subgradient ascent on the multipliers for a fixed alpha,
/// starting from `start` (alpha is taken from the argument, not `start`).
/// Stops once both complementary-slackness products are within tolerance
/// and both constraints are met to tolerance * min(1, limit).
InnerResult solve_inner(double alpha, const Constraints& cons, const SystemParams& params,
                        const SensingSpec& spec, const BranchProbs& probs,
                        const ChannelSampleSet& samples, const SolverConfig& cfg,
                        const DualState& start);

/// Dinkelbach iteration over alpha on a fixed sample set.
SolveResult solve(const SystemParams& params, const SensingSpec& spec, const Constraints& cons,
                  const ChannelSampleSet& samples, const SolverConfig& cfg);

/// Draws the sample set from `fading` and solves.
SolveResult solve(const SystemParams& params, const SensingSpec& spec, const Constraints& cons,
                  const FadingConfig& fading, const SolverConfig& cfg);

/// Writes the trace as CSV with header
/// outer_iter,alpha,F_alpha,lambda,nu,rate,avg_tx_power,avg_interference,inner_iters
void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace);

}  // namespace eecr

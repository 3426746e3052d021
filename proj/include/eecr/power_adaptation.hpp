#pragma once

#include <optional>

#include "eecr/channel.hpp"
#include "eecr/rate_model.hpp"
#include "eecr/sensing.hpp"

namespace eecr {

enum class Branch { kIdle = 0, kBusy = 1 };

inline int index(Branch b) { return static_cast<int>(b); }

/// Dinkelbach parameter and the Lagrange multipliers of the average
/// transmit-power (lambda) and average interference (nu) constraints.
struct DualState {
  double alpha = 0.0;
  double lambda = 0.0;
  double nu = 0.0;

  void validate() const;
};

enum class Regime {
  kAvgTxAvgInterf,   // average transmit power + average interference
  kPeakTxAvgInterf,  // per-branch peak transmit power + average interference
};

struct Constraints {
  Regime regime = Regime::kAvgTxAvgInterf;
  std::optional<double> p_avg;
  double q_avg = 1.0;
  std::optional<double> p_peak_idle;
  std::optional<double> p_peak_busy;

  static Constraints average(double p_avg, double q_avg) {
    return {Regime::kAvgTxAvgInterf, p_avg, q_avg, std::nullopt, std::nullopt};
  }
  static Constraints peak(double p_peak_idle, double p_peak_busy, double q_avg) {
    return {Regime::kPeakTxAvgInterf, std::nullopt, q_avg, p_peak_idle, p_peak_busy};
  }

  /// Limits must be positive; q_avg = 0 is accepted and handled by the
  /// solver as the degenerate zero-policy case.
  void validate() const;

  double peak(Branch b) const { return b == Branch::kIdle ? *p_peak_idle : *p_peak_busy; }
};

/// Interference weight of a branch at the primary receiver: 1 - Pd when
/// sensed idle, Pd when sensed busy.
inline double interference_weight(const SensingSpec& spec, Branch b) {
  return b == Branch::kIdle ? 1.0 - spec.p_detect : spec.p_detect;
}

/// Price of one unit of power on a sample:
/// (lambda + alpha) Pr{decision} + nu * |g|^2 * interference_weight.
double effective_price(Branch b, const SensingSpec& spec, const BranchProbs& probs,
                       double gain_g, const DualState& duals);

/// Water-filling root of the stationarity condition under the average
/// transmit-power regime, clamped at zero.
/// Throws UnboundedPower if the effective price is zero while gain_h > 0.
double optimal_power_avg(Branch b, const SystemParams& params, const SensingSpec& spec,
                         const BranchProbs& probs, double gain_h, double gain_g,
                         const DualState& duals);

/// Peak regime: the lambda-free stationarity root clamped to [0, peak].
double optimal_power_peak(Branch b, const SystemParams& params, const SensingSpec& spec,
                          const BranchProbs& probs, double gain_h, double gain_g,
                          const DualState& duals, const Constraints& cons);

/// Fills the policy for every sample at once through the active kernels.
/// Under the peak regime lambda is ignored and each branch is capped at its
/// peak. Branches listed in `blocked` are forced to zero power.
void fill_policy(const SystemParams& params, const SensingSpec& spec, const BranchProbs& probs,
                 const ChannelSampleSet& samples, const DualState& duals, const Constraints& cons,
                 PowerPolicy& out, const bool (&blocked)[2] = {false, false});

PowerPolicy optimal_policy(const SystemParams& params, const SensingSpec& spec,
                           const BranchProbs& probs, const ChannelSampleSet& samples,
                           const DualState& duals, const Constraints& cons);

}  // namespace eecr

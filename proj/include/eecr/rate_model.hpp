#pragma once

#include <cstdint>
#include <vector>

#include "eecr/channel.hpp"
#include "eecr/sensing.hpp"

namespace eecr {

struct SystemParams {
  double noise_power = 0.2;    // N0
  double primary_power = 1.0;  // received primary signal variance
  double frame_len = 100.0;    // symbols per frame
  double sense_len = 10.0;     // sensing symbols at the start of each frame
  double circuit_power = 0.1;
  double symbol_rate = 1.0;    // converts bits/channel use into bits/second

  void validate() const;

  /// Fraction of the frame left for data, scaled by the symbol rate.
  double data_fraction() const { return symbol_rate * (frame_len - sense_len) / frame_len; }

  /// Disturbance variance seen in a decision branch.
  double disturbance(const BranchProbs& probs, int branch) const {
    return noise_power + probs.posterior(branch) * primary_power;
  }
};

/// Per-sample transmit powers for the idle-sensed and busy-sensed branches.
struct PowerPolicy {
  std::vector<double> p_idle;
  std::vector<double> p_busy;

  static PowerPolicy constant(std::size_t n, double p_idle, double p_busy) {
    return {std::vector<double>(n, p_idle), std::vector<double>(n, p_busy)};
  }
  static PowerPolicy zeros(std::size_t n) { return constant(n, 0.0, 0.0); }
};

struct EEBreakdown {
  double rate = 0.0;
  double avg_tx_power = 0.0;
  double total_power = 0.0;
  double avg_interference = 0.0;
  double ee = 0.0;
  // Sample means of P0 and P1.
  double mean_p_idle = 0.0;
  double mean_p_busy = 0.0;
};

/// Achievable-rate lower bound: Gaussian disturbance of matched variance
/// in each decision branch, averaged over the sample set.
double rate_lower_bound(const SystemParams& params, const BranchProbs& probs,
                        const ChannelSampleSet& samples, const PowerPolicy& policy);

/// Rate, average transmit power, average interference at the primary
/// receiver, and the resulting energy efficiency.
/// Throws DegenerateObjective if the total power is zero.
EEBreakdown power_accounting(const SystemParams& params, const BranchProbs& probs,
                             const SensingSpec& spec, const ChannelSampleSet& samples,
                             const PowerPolicy& policy);

struct McRate {
  double value = 0.0;
  double stderr = 0.0;
};

/// Monte Carlo estimate of the exact rate with a complex Gaussian input
/// through a fixed link gain, when the disturbance in each decision branch
/// is the two-component Gaussian mixture implied by the sensing posterior.
/// Each branch's mutual information is h(Y) - h(D), with both entropies
/// estimated from independent draws. Requires n_mc >= 10^4.
McRate exact_rate_mc(const SystemParams& params, const BranchProbs& probs, double gain_h,
                     double p_idle, double p_busy, std::size_t n_mc, std::uint64_t seed);

/// exact_rate_mc averaged over the fading samples with a constant policy.
McRate exact_rate_mc_fading(const SystemParams& params, const BranchProbs& probs,
                            const ChannelSampleSet& samples, double p_idle, double p_busy,
                            std::size_t n_mc_per_sample, std::uint64_t seed);

}  // namespace eecr

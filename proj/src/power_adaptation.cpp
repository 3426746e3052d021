#include "eecr/power_adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

#include "eecr/error.hpp"
#include "eecr/kernels.hpp"

namespace eecr {

void DualState::validate() const {
  if (!(alpha >= 0.0) || !(lambda >= 0.0) || !(nu >= 0.0)) {
    throw InvalidConfig("alpha, lambda and nu must be nonnegative");
  }
}

void Constraints::validate() const {
  if (!(q_avg >= 0.0) || !std::isfinite(q_avg)) throw InvalidConfig("q_avg must be >= 0");
  switch (regime) {
    case Regime::kAvgTxAvgInterf:
      if (!p_avg || p_peak_idle || p_peak_busy) {
        throw InvalidConfig("average regime needs p_avg and no peak limits");
      }
      if (!(*p_avg > 0.0)) throw InvalidConfig("p_avg must be > 0");
      break;
    case Regime::kPeakTxAvgInterf:
      if (p_avg || !p_peak_idle || !p_peak_busy) {
        throw InvalidConfig("peak regime needs both peak limits and no p_avg");
      }
      if (!(*p_peak_idle > 0.0) || !(*p_peak_busy > 0.0)) {
        throw InvalidConfig("peak limits must be > 0");
      }
      break;
  }
}

namespace {

kernels::WaterFillCoeffs coeffs_for(Branch b, const SystemParams& params, const SensingSpec& spec,
                                    const BranchProbs& probs, const DualState& duals, double cap) {
  const int k = index(b);
  kernels::WaterFillCoeffs c;
  c.scale = params.data_fraction() * probs.decision(k) * std::numbers::log2e;
  c.base_price = (duals.lambda + duals.alpha) * probs.decision(k);
  c.interference_price = duals.nu * interference_weight(spec, b);
  c.noise = params.disturbance(probs, k);
  c.cap = cap;
  return c;
}

double water_fill_one(const kernels::WaterFillCoeffs& c, double gain_h, double gain_g) {
  if (!(gain_h > 0.0)) return 0.0;
  const double price = c.base_price + c.interference_price * gain_g;
  const double root = c.scale / price - c.noise / gain_h;
  return std::min(std::max(root, 0.0), c.cap);
}

}  // namespace

double effective_price(Branch b, const SensingSpec& spec, const BranchProbs& probs, double gain_g,
                       const DualState& duals) {
  return (duals.lambda + duals.alpha) * probs.decision(index(b)) +
         duals.nu * gain_g * interference_weight(spec, b);
}

double optimal_power_avg(Branch b, const SystemParams& params, const SensingSpec& spec,
                         const BranchProbs& probs, double gain_h, double gain_g,
                         const DualState& duals) {
  duals.validate();
  if (!(gain_h > 0.0) || probs.decision(index(b)) <= 0.0) return 0.0;
  const auto c = coeffs_for(b, params, spec, probs, duals, std::numeric_limits<double>::infinity());
  if (!(c.base_price + c.interference_price * gain_g > 0.0)) {
    throw UnboundedPower("zero effective power price with positive link gain");
  }
  return water_fill_one(c, gain_h, gain_g);
}

double optimal_power_peak(Branch b, const SystemParams& params, const SensingSpec& spec,
                          const BranchProbs& probs, double gain_h, double gain_g,
                          const DualState& duals, const Constraints& cons) {
  duals.validate();
  if (cons.regime != Regime::kPeakTxAvgInterf) {
    throw InvalidConfig("optimal_power_peak requires the peak regime");
  }
  if (!(gain_h > 0.0) || probs.decision(index(b)) <= 0.0) return 0.0;
  DualState no_lambda = duals;
  no_lambda.lambda = 0.0;
  const auto c = coeffs_for(b, params, spec, probs, no_lambda, cons.peak(b));
  return water_fill_one(c, gain_h, gain_g);
}

void fill_policy(const SystemParams& params, const SensingSpec& spec, const BranchProbs& probs,
                 const ChannelSampleSet& samples, const DualState& duals, const Constraints& cons,
                 PowerPolicy& out, const bool (&blocked)[2]) {
  duals.validate();
  const std::size_t n = samples.size();
  out.p_idle.resize(n);
  out.p_busy.resize(n);
  const bool peak = cons.regime == Regime::kPeakTxAvgInterf;
  DualState d = duals;
  if (peak) d.lambda = 0.0;

  const std::span<const double> h(samples.gains_h().data(), n);
  const std::span<const double> g(samples.gains_g().data(), n);
  for (Branch b : {Branch::kIdle, Branch::kBusy}) {
    auto& p = b == Branch::kIdle ? out.p_idle : out.p_busy;
    if (blocked[index(b)] || probs.decision(index(b)) <= 0.0) {
      std::fill(p.begin(), p.end(), 0.0);
      continue;
    }
    const double cap = peak ? cons.peak(b) : std::numeric_limits<double>::infinity();
    const auto c = coeffs_for(b, params, spec, probs, d, cap);
    if (!peak && !(c.base_price > 0.0)) {
      for (std::size_t i = 0; i < n; ++i) {
        if (h[i] > 0.0 && !(c.interference_price * g[i] > 0.0)) {
          throw UnboundedPower("zero effective power price with positive link gain at sample " +
                               std::to_string(i));
        }
      }
    }
    kernels::water_fill(h, g, c, std::span<double>(p.data(), n));
  }
}

PowerPolicy optimal_policy(const SystemParams& params, const SensingSpec& spec,
                           const BranchProbs& probs, const ChannelSampleSet& samples,
                           const DualState& duals, const Constraints& cons) {
  PowerPolicy out;
  fill_policy(params, spec, probs, samples, duals, cons, out);
  return out;
}

}  // namespace eecr

#include "eecr/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>

#include "eecr/error.hpp"
#include "eecr/kernels.hpp"

namespace eecr {

void SystemParams::validate() const {
  if (!(noise_power > 0.0)) throw InvalidConfig("noise_power must be > 0");
  if (!(primary_power >= 0.0)) throw InvalidConfig("primary_power must be >= 0");
  if (!(sense_len >= 0.0 && sense_len < frame_len)) {
    throw InvalidConfig("sense_len must satisfy 0 <= sense_len < frame_len");
  }
  if (!(circuit_power >= 0.0)) throw InvalidConfig("circuit_power must be >= 0");
  if (!(symbol_rate > 0.0)) throw InvalidConfig("symbol_rate must be > 0");
}

namespace {

void check_policy(const ChannelSampleSet& samples, const PowerPolicy& policy) {
  if (policy.p_idle.size() != samples.size() || policy.p_busy.size() != samples.size()) {
    throw InvalidConfig("policy length does not match the sample set");
  }
  if (samples.size() == 0) throw InvalidConfig("empty sample set");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(policy.p_idle[i] >= 0.0) || !(policy.p_busy[i] >= 0.0)) {
      throw EvaluationError("negative or NaN power in policy", i);
    }
  }
}

std::span<const double> as_span(const std::vector<double>& v) { return {v.data(), v.size()}; }

}  // namespace

double rate_lower_bound(const SystemParams& params, const BranchProbs& probs,
                        const ChannelSampleSet& samples, const PowerPolicy& policy) {
  params.validate();
  check_policy(samples, policy);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  double rate = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double weight = probs.decision(k);
    if (weight <= 0.0) continue;
    const auto& p = k == 0 ? policy.p_idle : policy.p_busy;
    const auto sums = kernels::branch_sums(as_span(samples.gains_h()), as_span(samples.gains_g()),
                                           as_span(p), 1.0 / params.disturbance(probs, k), true);
    rate += weight * sums.log_rate * inv_n;
  }
  return params.data_fraction() * rate;
}

EEBreakdown power_accounting(const SystemParams& params, const BranchProbs& probs,
                             const SensingSpec& spec, const ChannelSampleSet& samples,
                             const PowerPolicy& policy) {
  params.validate();
  check_policy(samples, policy);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  const double interference_coef[2] = {1.0 - spec.p_detect, spec.p_detect};

  EEBreakdown out;
  double rate = 0.0;
  for (int k = 0; k < 2; ++k) {
    const auto& p = k == 0 ? policy.p_idle : policy.p_busy;
    const auto sums = kernels::branch_sums(as_span(samples.gains_h()), as_span(samples.gains_g()),
                                           as_span(p), 1.0 / params.disturbance(probs, k),
                                           probs.decision(k) > 0.0);
    const double mean_p = sums.power * inv_n;
    if (probs.decision(k) > 0.0) rate += probs.decision(k) * sums.log_rate * inv_n;
    out.avg_tx_power += probs.decision(k) * mean_p;
    out.avg_interference += interference_coef[k] * sums.interference * inv_n;
    (k == 0 ? out.mean_p_idle : out.mean_p_busy) = mean_p;
  }
  out.rate = params.data_fraction() * rate;
  out.total_power = out.avg_tx_power + params.circuit_power;
  if (!(out.total_power > 0.0)) {
    throw DegenerateObjective("total power is zero: circuit power is 0 and the policy is all-zero");
  }
  out.ee = out.rate / out.total_power;
  return out;
}

namespace {

// -log2 of the density of |z|^2 = r for a zero-mean complex Gaussian mixture,
// evaluated as a log-sum-exp over components with positive weight.
double neg_log2_mixture(double r, const double (&weight)[2], const double (&var)[2]) {
  double terms[2] = {0.0, 0.0};
  int m = 0;
  for (int c = 0; c < 2; ++c) {
    if (weight[c] <= 0.0) continue;
    terms[m++] = std::log(weight[c] / (std::numbers::pi * var[c])) - r / var[c];
  }
  const double top = m == 1 ? terms[0] : std::max(terms[0], terms[1]);
  double s = 0.0;
  for (int c = 0; c < m; ++c) s += std::exp(terms[c] - top);
  return -(top + std::log(s)) * std::numbers::log2e;
}

struct RunningMoments {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;

  void push(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

// Entropy estimate of |z|^2 drawn from the mixture (weight, var) and scored
// against the same density.
RunningMoments entropy_draws(std::mt19937_64& eng, const double (&weight)[2],
                             const double (&var)[2], std::size_t n) {
  RunningMoments acc;
  for (std::size_t i = 0; i < n; ++i) {
    const bool second = uniform_unit(eng) < weight[1];
    const double r = var[second ? 1 : 0] * exponential_unit(eng);
    acc.push(neg_log2_mixture(r, weight, var));
  }
  return acc;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

McRate exact_rate_mc(const SystemParams& params, const BranchProbs& probs, double gain_h,
                     double p_idle, double p_busy, std::size_t n_mc, std::uint64_t seed) {
  params.validate();
  if (n_mc < 10000) throw InvalidConfig("n_mc must be >= 10000");
  if (!(gain_h >= 0.0) || !(p_idle >= 0.0) || !(p_busy >= 0.0)) {
    throw InvalidConfig("gain and powers must be nonnegative");
  }
  const double power[2] = {p_idle, p_busy};
  double value = 0.0;
  double variance = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double weight_k = probs.decision(k);
    if (weight_k <= 0.0) continue;
    const double q = probs.posterior(k);
    const double mix[2] = {1.0 - q, q};
    const double noise_var[2] = {params.noise_power, params.noise_power + params.primary_power};
    const double signal = power[k] * gain_h;
    const double out_var[2] = {noise_var[0] + signal, noise_var[1] + signal};

    const std::uint64_t base = splitmix64(seed) + 2 * static_cast<std::uint64_t>(k);
    std::mt19937_64 eng_y(splitmix64(base));
    std::mt19937_64 eng_d(splitmix64(base + 1));
    const auto hy = entropy_draws(eng_y, mix, out_var, n_mc);
    const auto hd = entropy_draws(eng_d, mix, noise_var, n_mc);
    value += weight_k * (hy.mean - hd.mean);
    variance += weight_k * weight_k * (hy.variance() + hd.variance()) / static_cast<double>(n_mc);
  }
  const double scale = params.data_fraction();
  return {scale * value, scale * std::sqrt(variance)};
}

McRate exact_rate_mc_fading(const SystemParams& params, const BranchProbs& probs,
                            const ChannelSampleSet& samples, double p_idle, double p_busy,
                            std::size_t n_mc_per_sample, std::uint64_t seed) {
  if (samples.size() == 0) throw InvalidConfig("empty sample set");
  double sum = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto r = exact_rate_mc(params, probs, samples.gains_h()[i], p_idle, p_busy,
                                 n_mc_per_sample, splitmix64(seed + i));
    sum += r.value;
    var += r.stderr * r.stderr;
  }
  const double n = static_cast<double>(samples.size());
  return {sum / n, std::sqrt(var) / n};
}

}  // namespace eecr

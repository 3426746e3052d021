#include "eecr/sensing.hpp"

#include <cmath>
#include <string>

#include "eecr/error.hpp"

namespace eecr {

namespace {

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidConfig(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

}  // namespace

void SensingSpec::validate() const {
  require_probability(p_detect, "p_detect");
  require_probability(p_false_alarm, "p_false_alarm");
  require_probability(prior_idle, "prior_idle");
  require_probability(prior_busy, "prior_busy");
  if (std::abs(prior_idle + prior_busy - 1.0) > 1e-12) {
    throw InvalidConfig("prior_idle + prior_busy must equal 1");
  }
}

BranchProbs branch_probs(const SensingSpec& spec) {
  spec.validate();
  BranchProbs out;
  const double busy_and_detected = spec.prior_busy * spec.p_detect;
  const double busy_and_missed = spec.prior_busy * (1.0 - spec.p_detect);
  out.prob_decision_busy = spec.prior_idle * spec.p_false_alarm + busy_and_detected;
  out.prob_decision_idle = spec.prior_idle * (1.0 - spec.p_false_alarm) + busy_and_missed;

  if (out.prob_decision_idle > 0.0) {
    out.posterior_busy_given_idle = busy_and_missed / out.prob_decision_idle;
  } else {
    out.idle_degenerate = true;
  }
  if (out.prob_decision_busy > 0.0) {
    out.posterior_busy_given_busy = busy_and_detected / out.prob_decision_busy;
  } else {
    out.busy_degenerate = true;
  }
  return out;
}

}  // namespace eecr

#pragma once

namespace eecr {

/// Sensing quality plus primary-activity priors.
struct SensingSpec {
  double p_detect = 0.8;       // Pr{decide busy | busy}
  double p_false_alarm = 0.1;  // Pr{decide busy | idle}
  double prior_idle = 0.4;
  double prior_busy = 0.6;

  /// Throws InvalidConfig when a probability is out of range or the priors
  /// do not sum to one.
  void validate() const;
};

/// Decision-branch probabilities and the posteriors of primary activity
/// given each sensing decision.
struct BranchProbs {
  double prob_decision_idle = 0.0;
  double prob_decision_busy = 0.0;
  double posterior_busy_given_idle = 0.0;
  double posterior_busy_given_busy = 0.0;
  // Set when a decision branch has zero probability; its posterior is 0.
  bool idle_degenerate = false;
  bool busy_degenerate = false;

  double decision(int branch) const { return branch == 0 ? prob_decision_idle : prob_decision_busy; }
  double posterior(int branch) const {
    return branch == 0 ? posterior_busy_given_idle : posterior_busy_given_busy;
  }
};

BranchProbs branch_probs(const SensingSpec& spec);

}  // namespace eecr

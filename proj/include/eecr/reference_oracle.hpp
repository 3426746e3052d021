#pragma once

// Brute-force maximizers used to validate the solver. They share the rate
// and power accounting with the library but none of its KKT machinery.

#include <cstddef>
#include <vector>

#include "eecr/channel.hpp"
#include "eecr/power_adaptation.hpp"
#include "eecr/rate_model.hpp"
#include "eecr/sensing.hpp"

namespace eecr::oracle {

enum class Spacing { kLinear, kGeometric };

struct GridSpec {
  double p_min = 1e-3;
  double p_max = 10.0;
  std::size_t n_points = 200;
  Spacing spacing = Spacing::kGeometric;

  void validate() const;
  std::vector<double> points() const;
};

struct ConstantPolicyResult {
  double p_idle = 0.0;
  double p_busy = 0.0;
  EEBreakdown breakdown;
  bool feasible = false;  // false: no grid pair met the constraints
};

/// Exhaustive search over constant (P0, P1) pairs; ties go to the lowest
/// grid index (P0 major).
ConstantPolicyResult best_constant_policy(const SystemParams& params, const SensingSpec& spec,
                                          const Constraints& cons, const ChannelSampleSet& samples,
                                          const GridSpec& grid);

/// Left-hand side of the branch's stationarity condition at `power`:
/// d/dP of the per-sample Lagrangian integrand.
double stationarity_residual(Branch b, const SystemParams& params, const SensingSpec& spec,
                             const BranchProbs& probs, double gain_h, double gain_g,
                             const DualState& duals, double power);

/// Per-sample Lagrangian integrand whose derivative stationarity_residual is.
double lagrangian_integrand(Branch b, const SystemParams& params, const SensingSpec& spec,
                            const BranchProbs& probs, double gain_h, double gain_g,
                            const DualState& duals, double power);

struct BruteForceOptions {
  std::size_t power_points = 800;  // geometric grid per sample, plus zero
  std::size_t golden_iters = 50;
  std::size_t bisection_iters = 34;
};

struct BruteForceResult {
  PowerPolicy policy;  // projected to feasibility
  EEBreakdown breakdown;
  double alpha = 0.0;  // EE level found by bisection
  DualState duals;
};

/// Maximizes EE over per-sample power grids. Bisection on the EE level
/// alpha; for each alpha, the parametrized optimum is the minimum of the
/// dual function, found by nested golden-section search, with per-sample
/// maxima taken over the power grid. The final policy is scaled down until
/// feasible. Intended for sample sets of a few dozen draws.
BruteForceResult brute_force_policy(const SystemParams& params, const SensingSpec& spec,
                                    const Constraints& cons, const ChannelSampleSet& samples,
                                    const BruteForceOptions& opts = {});

}  // namespace eecr::oracle

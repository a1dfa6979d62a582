#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cvarsafe/cvar.hpp"
#include "cvarsafe/grid.hpp"
#include "cvarsafe/risk_solver.hpp"
#include "cvarsafe/system_model.hpp"
#include "cvarsafe/value_iteration.hpp"

namespace cvarsafe {

/// Optimal pre-commitment policy for one (initial state, alpha) pair: the
/// dual parameter is fixed at t = 0 and the controls come from kappa^{s*}.
struct PrecommitmentPolicy {
  double alpha = 1.0;
  State x0;
  std::size_t x0_node = 0;
  double s_star = 0.0;
  AugmentedGrid grid;
  DpSolution solution;
  /// J_0^{s*}(x0, 0), interpolated when x0 is off-grid.
  double dp_value = 0.0;
  /// Objective s* + dp_value / alpha at x0.
  double risk_value = 0.0;
};

/// Reads s* at the x node nearest to x0 and re-solves value iteration there.
/// Throws std::domain_error when x0 lies outside the state box.
PrecommitmentPolicy synthesize_policy(std::span<const double> x0, RiskLevel alpha,
                                      const DualSweep& sweep, const SystemModel& model,
                                      const AugmentedGrid& grid, unsigned threads = 1);

struct Step {
  State x;
  double z;
  double u;
  double w;
};

struct Trajectory {
  std::vector<Step> steps;  // t = 0..N-1
  State x_final;
  double z_final = 0.0;
};

struct RolloutOptions {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Pick u_t by minimizing backup_q at the exact (x_t, z_t) instead of
  /// reading the nearest grid node.
  bool reoptimize = false;
  bool record_trajectories = false;
};

struct RolloutBatch {
  std::uint64_t seed = 0;
  std::vector<double> y_prime;  // realized max_t g_K(x_t) per rollout
  std::vector<Trajectory> trajectories;  // empty unless recorded
};

/// Control applied by the policy at (t, x, z).
double policy_action(const PrecommitmentPolicy& policy, const SystemModel& model, int t,
                     std::span<const double> x, double z, bool reoptimize);

/// Independent seeded simulations under the policy. Rollout i draws from its
/// own generator seeded by (seed, i), so results do not depend on threads.
RolloutBatch rollout(const PrecommitmentPolicy& policy, const SystemModel& model,
                     const RolloutOptions& options);

struct RiskEstimate {
  double cvar_hat = 0.0;
  double var_hat = 0.0;
  double mean = 0.0;
  /// Mean of max(Y - s, 0) with Y = Y' - g_lower, and its standard error.
  double excess_hat = 0.0;
  double excess_std_err = 0.0;
};

/// Empirical VaR/CVaR of Y' and the excess statistic at dual parameter s.
RiskEstimate estimate_risk(const RolloutBatch& batch, RiskLevel alpha, double s,
                           double g_lower);

}  // namespace cvarsafe

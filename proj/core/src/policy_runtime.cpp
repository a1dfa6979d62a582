#include "cvarsafe/policy_runtime.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "cvarsafe/parallel.hpp"

namespace cvarsafe {

PrecommitmentPolicy synthesize_policy(std::span<const double> x0, RiskLevel alpha,
                                      const DualSweep& sweep, const SystemModel& model,
                                      const AugmentedGrid& grid, unsigned threads) {
  if (x0.size() != model.state_dim())
    throw std::domain_error("synthesize_policy: x0 has the wrong dimension");
  const auto bounds = model.state_bounds();
  for (std::size_t d = 0; d < x0.size(); ++d)
    if (!bounds[d].contains(x0[d]))
      throw std::domain_error("synthesize_policy: x0[" + std::to_string(d) +
                              "] outside the state bounds");

  PrecommitmentPolicy policy;
  policy.alpha = alpha.value();
  policy.x0.assign(x0.begin(), x0.end());
  policy.x0_node = grid.nearest_x(x0);
  const auto column = dual_objective_column(sweep, policy.x0_node, alpha);
  std::size_t best = 0;
  for (std::size_t k = 1; k < column.size(); ++k)
    if (column[k] < column[best]) best = k;
  policy.s_star = sweep.s_values[best];
  policy.grid = grid;
  policy.solution = value_iteration(policy.s_star, model, grid, {threads});
  policy.dp_value = interpolate(grid, policy.solution.values.at(0), x0, 0.0);
  policy.risk_value = policy.s_star + policy.dp_value / alpha.value();
  return policy;
}

double policy_action(const PrecommitmentPolicy& policy, const SystemModel& model, int t,
                     std::span<const double> x, double z, bool reoptimize) {
  const auto& grid = policy.grid;
  if (reoptimize)
    return bellman_min(model, grid, policy.solution.values.at(t + 1), x, z).action;
  return policy.solution.policy(t, grid.nearest_x(x), grid.z_axis.nearest(z));
}

namespace {

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// splitmix64 finalizer. seed_seq would cost ~6x more per rollout.
std::uint64_t mix(std::uint64_t v) {
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
  return v ^ (v >> 31);
}

std::mt19937_64 rollout_generator(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(mix(mix(seed) + index * 0x9e3779b97f4a7c15ULL));
}

}  // namespace

RolloutBatch rollout(const PrecommitmentPolicy& policy, const SystemModel& model,
                     const RolloutOptions& options) {
  RolloutBatch batch;
  batch.seed = options.seed;
  batch.y_prime.resize(options.count);
  if (options.record_trajectories) batch.trajectories.resize(options.count);

  const int horizon = model.horizon();
  parallel_for(options.count, options.threads, [&](std::size_t i) {
    auto gen = rollout_generator(options.seed, i);
    State x = policy.x0;
    State next(x.size());
    double z = 0.0;
    Trajectory* traj = options.record_trajectories ? &batch.trajectories[i] : nullptr;
    for (int t = 0; t < horizon; ++t) {
      const double u = policy_action(policy, model, t, x, z, options.reoptimize);
      const double w = model.disturbance(x, u).sample(uniform01(gen));
      if (traj) traj->steps.push_back({x, z, u, w});
      model.transition(x, u, w, next);
      z = model.z_update(z, x, u);
      x.swap(next);
    }
    if (traj) {
      traj->x_final = x;
      traj->z_final = z;
    }
    batch.y_prime[i] = model.g_lower() + std::max(model.terminal_cost(x), z);
  });
  return batch;
}

RiskEstimate estimate_risk(const RolloutBatch& batch, RiskLevel alpha, double s,
                           double g_lower) {
  if (batch.y_prime.empty()) throw std::invalid_argument("estimate_risk: empty batch");
  const auto pmf = ProbabilityMassFunction::empirical(batch.y_prime);
  RiskEstimate est;
  est.cvar_hat = cvar_dual(pmf, alpha).value;
  est.var_hat = value_at_risk(pmf, alpha);
  est.mean = pmf.mean();

  const double n = static_cast<double>(batch.y_prime.size());
  double sum = 0.0;
  for (double y : batch.y_prime) sum += std::max(y - g_lower - s, 0.0);
  est.excess_hat = sum / n;
  if (batch.y_prime.size() > 1) {
    double sq = 0.0;
    for (double y : batch.y_prime) {
      const double d = std::max(y - g_lower - s, 0.0) - est.excess_hat;
      sq += d * d;
    }
    est.excess_std_err = std::sqrt(sq / (n - 1.0) / n);
  }
  return est;
}

}  // namespace cvarsafe

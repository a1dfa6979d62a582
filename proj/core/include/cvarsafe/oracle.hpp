#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "cvarsafe/cvar.hpp"
#include "cvarsafe/tiny_instance.hpp"

namespace cvarsafe::oracle {

// Brute-force reference computations on tiny instances. Nothing here uses
// the grid dynamic program; the only shared piece is cvar_dual on an exact
// finite law.

/// Deterministic feedback policy on the augmented state: (t, x, z) -> action.
using AugmentedPolicy = std::map<std::tuple<int, std::size_t, double>, std::size_t>;

class EnumerationBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact law of Y = max(c_N(x_N), max_t c(x_t, u_t)) from x0 under `policy`.
/// Throws std::logic_error if the policy lacks a reachable (t, x, z).
ProbabilityMassFunction cost_distribution(const TinyInstance& instance, std::size_t x0,
                                          const AugmentedPolicy& policy);

double exact_policy_cvar(const TinyInstance& instance, std::size_t x0,
                         const AugmentedPolicy& policy, RiskLevel alpha);

/// min_pi E[max(Y - s, 0)] over augmented-state policies, by memoized
/// recursion on exact (t, x, z) triples.
double exact_excess_value(const TinyInstance& instance, std::size_t x0, double s);

/// min_pi E[Y]; the alpha = 1 reference.
double exact_expected_cost(const TinyInstance& instance, std::size_t x0);

struct OptimalCvar {
  double value = 0.0;
  AugmentedPolicy best_policy;
  /// min over cost atoms s of s + exact_excess_value(s) / alpha. Agrees with
  /// `value` when exchanging the two minimizations is valid.
  double exchange_value = 0.0;
  double exchange_s = 0.0;
  std::size_t policies_enumerated = 0;
};

/// Enumerates every deterministic augmented-state policy that is distinct on
/// its own reachable set and keeps the smallest CVaR. Throws
/// EnumerationBudgetExceeded beyond `budget` policies.
OptimalCvar exact_optimal_cvar(const TinyInstance& instance, std::size_t x0, RiskLevel alpha,
                               std::size_t budget = 1'000'000);

/// Best CVaR over deterministic policies that may depend on the entire
/// disturbance history. Throws EnumerationBudgetExceeded beyond `budget`
/// candidate cost laws.
double exact_history_optimal_cvar(const TinyInstance& instance, std::size_t x0,
                                  RiskLevel alpha, std::size_t budget = 1'000'000);

/// Grid pipeline result on the exact grid: dual sweep then risk_value.
struct PipelineResult {
  double value;
  double s_star;
};
PipelineResult pipeline_optimal_cvar(const TinyInstance& instance, std::size_t x0,
                                     RiskLevel alpha);

struct CheckRecord {
  std::size_t x0;
  double alpha;
  double oracle;
  double exchange;
  double pipeline;
  bool pass;
};

struct InstanceReport {
  std::vector<CheckRecord> checks;
  bool pass = true;
};

/// Compares oracle, exchange identity and grid pipeline for every initial
/// state and alpha, at absolute tolerance `tol`.
InstanceReport verify_instance(const TinyInstance& instance, const std::vector<double>& alphas,
                               double tol = 1e-9);

}  // namespace cvarsafe::oracle

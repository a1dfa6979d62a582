#include "cvarsafe/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "cvarsafe/risk_solver.hpp"

namespace cvarsafe::oracle {

namespace {

using Atoms = std::vector<ProbabilityMassFunction::Atom>;

void accumulate_paths(const TinyInstance& inst, const AugmentedPolicy& policy, int t,
                      std::size_t x, double z, double prob, Atoms& out) {
  if (t == inst.horizon) {
    out.push_back({std::max(inst.terminal_cost[x], z), prob});
    return;
  }
  const auto it = policy.find({t, x, z});
  if (it == policy.end())
    throw std::logic_error("policy undefined at reachable (t=" + std::to_string(t) +
                           ", x=" + std::to_string(x) + ", z=" + std::to_string(z) + ")");
  const std::size_t a = it->second;
  const double z_next = std::max(z, inst.stage_cost[x][a]);
  for (const auto& o : inst.outcomes[x][a])
    accumulate_paths(inst, policy, t + 1, o.next, z_next, prob * o.prob, out);
}

double excess_recursion(const TinyInstance& inst, int t, std::size_t x, double z, double s) {
  if (t == inst.horizon) return std::max(std::max(inst.terminal_cost[x], z) - s, 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < inst.num_actions; ++a) {
    const double z_next = std::max(z, inst.stage_cost[x][a]);
    double v = 0.0;
    for (const auto& o : inst.outcomes[x][a])
      v += o.prob * excess_recursion(inst, t + 1, o.next, z_next, s);
    best = std::min(best, v);
  }
  return best;
}

class PolicyEnumerator {
 public:
  PolicyEnumerator(const TinyInstance& inst, std::size_t x0, RiskLevel alpha, std::size_t budget)
      : inst_(inst), x0_(x0), alpha_(alpha), budget_(budget) {}

  OptimalCvar run() {
    best_.value = std::numeric_limits<double>::infinity();
    level(0, {{x0_, 0.0}});
    best_.policies_enumerated = count_;
    return best_;
  }

 private:
  using Node = std::pair<std::size_t, double>;

  void level(int t, const std::vector<Node>& frontier) {
    if (t == inst_.horizon) {
      evaluate();
      return;
    }
    std::vector<std::size_t> choice(frontier.size(), 0);
    while (true) {
      std::set<Node> next;
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        const auto [x, z] = frontier[i];
        current_[{t, x, z}] = choice[i];
        const double z_next = std::max(z, inst_.stage_cost[x][choice[i]]);
        for (const auto& o : inst_.outcomes[x][choice[i]]) next.insert({o.next, z_next});
      }
      level(t + 1, std::vector<Node>(next.begin(), next.end()));

      std::size_t i = 0;
      while (i < choice.size() && ++choice[i] == inst_.num_actions) choice[i++] = 0;
      if (i == choice.size()) break;
    }
    for (const auto& [x, z] : frontier) current_.erase({t, x, z});
  }

  void evaluate() {
    if (++count_ > budget_)
      throw EnumerationBudgetExceeded("policy enumeration exceeded budget of " +
                                      std::to_string(budget_));
    const double v = exact_policy_cvar(inst_, x0_, current_, alpha_);
    if (v < best_.value) {
      best_.value = v;
      best_.best_policy = current_;
    }
  }

  const TinyInstance& inst_;
  std::size_t x0_;
  RiskLevel alpha_;
  std::size_t budget_;
  std::size_t count_ = 0;
  AugmentedPolicy current_;
  OptimalCvar best_;
};

std::vector<Atoms> history_laws(const TinyInstance& inst, int t, std::size_t x, double z,
                                std::size_t budget) {
  if (t == inst.horizon) return {Atoms{{std::max(inst.terminal_cost[x], z), 1.0}}};
  std::vector<Atoms> result;
  for (std::size_t a = 0; a < inst.num_actions; ++a) {
    const double z_next = std::max(z, inst.stage_cost[x][a]);
    const auto& outs = inst.outcomes[x][a];
    std::vector<std::vector<Atoms>> children;
    for (const auto& o : outs) children.push_back(history_laws(inst, t + 1, o.next, z_next, budget));

    // Every combination of subtree choices, one per outcome.
    std::vector<std::size_t> pick(outs.size(), 0);
    while (true) {
      Atoms law;
      for (std::size_t k = 0; k < outs.size(); ++k)
        for (const auto& atom : children[k][pick[k]])
          law.push_back({atom.value, atom.prob * outs[k].prob});
      result.push_back(std::move(law));
      if (result.size() > budget)
        throw EnumerationBudgetExceeded("history policy enumeration exceeded budget of " +
                                        std::to_string(budget));
      std::size_t k = 0;
      while (k < pick.size() && ++pick[k] == children[k].size()) pick[k++] = 0;
      if (k == pick.size()) break;
    }
  }
  return result;
}

}  // namespace

ProbabilityMassFunction cost_distribution(const TinyInstance& instance, std::size_t x0,
                                          const AugmentedPolicy& policy) {
  Atoms atoms;
  accumulate_paths(instance, policy, 0, x0, 0.0, 1.0, atoms);
  return ProbabilityMassFunction::from_atoms(std::move(atoms));
}

double exact_policy_cvar(const TinyInstance& instance, std::size_t x0,
                         const AugmentedPolicy& policy, RiskLevel alpha) {
  return cvar_dual(cost_distribution(instance, x0, policy), alpha).value;
}

double exact_excess_value(const TinyInstance& instance, std::size_t x0, double s) {
  return excess_recursion(instance, 0, x0, 0.0, s);
}

double exact_expected_cost(const TinyInstance& instance, std::size_t x0) {
  // Y >= 0, so E[max(Y - 0, 0)] = E[Y].
  return excess_recursion(instance, 0, x0, 0.0, 0.0);
}

OptimalCvar exact_optimal_cvar(const TinyInstance& instance, std::size_t x0, RiskLevel alpha,
                               std::size_t budget) {
  instance.validate();
  if (x0 >= instance.num_states) throw std::invalid_argument("exact_optimal_cvar: x0 out of range");
  OptimalCvar out = PolicyEnumerator(instance, x0, alpha, budget).run();

  out.exchange_value = std::numeric_limits<double>::infinity();
  for (const double s : instance.cost_atoms()) {
    const double v = s + exact_excess_value(instance, x0, s) / alpha.value();
    if (v < out.exchange_value) {
      out.exchange_value = v;
      out.exchange_s = s;
    }
  }
  return out;
}

double exact_history_optimal_cvar(const TinyInstance& instance, std::size_t x0,
                                  RiskLevel alpha, std::size_t budget) {
  instance.validate();
  double best = std::numeric_limits<double>::infinity();
  for (auto& law : history_laws(instance, 0, x0, 0.0, budget))
    best = std::min(best, cvar_dual(ProbabilityMassFunction::from_atoms(std::move(law)), alpha).value);
  return best;
}

PipelineResult pipeline_optimal_cvar(const TinyInstance& instance, std::size_t x0,
                                     RiskLevel alpha) {
  const TinyModel model(instance);
  const auto grid = exact_grid(instance);
  const auto surface = risk_value(sweep(model, grid), alpha);
  return {surface.w_star[x0], surface.s_star[x0]};
}

InstanceReport verify_instance(const TinyInstance& instance, const std::vector<double>& alphas,
                               double tol) {
  const TinyModel model(instance);
  const auto grid = exact_grid(instance);
  const auto sw = sweep(model, grid);

  InstanceReport report;
  for (const double a : alphas) {
    const RiskLevel alpha(a);
    const auto surface = risk_value(sw, alpha);
    for (std::size_t x0 = 0; x0 < instance.num_states; ++x0) {
      const auto exact = exact_optimal_cvar(instance, x0, alpha);
      CheckRecord rec{x0, a, exact.value, exact.exchange_value, surface.w_star[x0], true};
      rec.pass = std::abs(rec.oracle - rec.exchange) <= tol &&
                 std::abs(rec.oracle - rec.pipeline) <= tol;
      report.pass = report.pass && rec.pass;
      report.checks.push_back(rec);
    }
  }
  return report;
}

}  // namespace cvarsafe::oracle

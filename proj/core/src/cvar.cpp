#include "cvarsafe/cvar.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvarsafe {

RiskLevel::RiskLevel(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::domain_error("risk level must lie in (0, 1], got " + std::to_string(alpha));
}

double value_at_risk(const ProbabilityMassFunction& dist, RiskLevel alpha) {
  // Relative slack absorbs rounding in the running CDF sum.
  const double level = 1.0 - alpha.value() - 1e-12;
  double cdf = 0.0;
  for (const auto& a : dist.atoms()) {
    cdf += a.prob;
    if (cdf >= level) return a.value;
  }
  return dist.max_value();
}

double expected_excess(const ProbabilityMassFunction& dist, double s) {
  double total = 0.0;
  for (const auto& a : dist.atoms()) total += a.prob * std::max(a.value - s, 0.0);
  return total;
}

double dual_objective(const ProbabilityMassFunction& dist, RiskLevel alpha, double s) {
  return s + expected_excess(dist, s) / alpha.value();
}

DualResult cvar_dual(const ProbabilityMassFunction& dist, RiskLevel alpha,
                     std::span<const double> s_grid) {
  if (s_grid.empty()) throw std::domain_error("cvar_dual: empty s grid");
  DualResult best{dual_objective(dist, alpha, s_grid[0]), s_grid[0]};
  for (std::size_t i = 1; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    const double v = dual_objective(dist, alpha, s);
    if (v < best.value || (v == best.value && s < best.s_star)) best = {v, s};
  }
  return best;
}

// Atoms are sorted, so E[(Y - v_i)+] = sum_{j>i} p_j v_j - v_i sum_{j>i} p_j.
// One pass from the top keeps both tail sums; linear in the atom count.
DualResult cvar_dual(const ProbabilityMassFunction& dist, RiskLevel alpha) {
  const auto atoms = dist.atoms();
  std::vector<double> objective(atoms.size());
  double tail_mass = 0.0;
  double tail_moment = 0.0;
  for (std::size_t i = atoms.size(); i-- > 0;) {
    const double v = atoms[i].value;
    const double excess = std::max(tail_moment - v * tail_mass, 0.0);
    objective[i] = v + excess / alpha.value();
    tail_mass += atoms[i].prob;
    tail_moment += atoms[i].prob * v;
  }
  DualResult best{objective[0], atoms[0].value};
  for (std::size_t i = 1; i < atoms.size(); ++i)
    if (objective[i] < best.value) best = {objective[i], atoms[i].value};
  return best;
}

double cvar_tail(const ProbabilityMassFunction& dist, RiskLevel alpha) {
  if (alpha.value() >= 1.0)
    throw std::domain_error("cvar_tail: defined for alpha in (0, 1); use cvar_dual at alpha = 1");
  const double var = value_at_risk(dist, alpha);
  return var + expected_excess(dist, var) / alpha.value();
}

}  // namespace cvarsafe

#pragma once

#include <span>

#include "cvarsafe/pmf.hpp"

namespace cvarsafe {

/// Risk-aversion level alpha in (0, 1]. Smaller is more pessimistic.
class RiskLevel {
 public:
  /// Throws std::domain_error unless 0 < alpha <= 1.
  explicit RiskLevel(double alpha);
  double value() const { return alpha_; }

 private:
  double alpha_;
};

/// Left-side (1 - alpha)-quantile: inf{ y : P(Y <= y) >= 1 - alpha }.
double value_at_risk(const ProbabilityMassFunction& dist, RiskLevel alpha);

/// E[max(Y - s, 0)].
double expected_excess(const ProbabilityMassFunction& dist, double s);

/// s + E[max(Y - s, 0)] / alpha, the function minimized by the dual form.
double dual_objective(const ProbabilityMassFunction& dist, RiskLevel alpha, double s);

struct DualResult {
  double value;
  double s_star;
};

/// CVaR via min over `s_grid` of dual_objective. Returns the smallest
/// minimizing s. Exact for a finite pmf when every atom value is in the grid.
/// Throws std::domain_error on an empty grid.
DualResult cvar_dual(const ProbabilityMassFunction& dist, RiskLevel alpha,
                     std::span<const double> s_grid);

/// Convenience overload using the atom values as the grid. Linear in the
/// number of atoms.
DualResult cvar_dual(const ProbabilityMassFunction& dist, RiskLevel alpha);

/// CVaR as VaR + E[(Y - VaR)+] / alpha. Defined for alpha < 1 only;
/// alpha == 1 throws std::domain_error.
double cvar_tail(const ProbabilityMassFunction& dist, RiskLevel alpha);

}  // namespace cvarsafe

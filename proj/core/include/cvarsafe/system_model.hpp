#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cvarsafe/pmf.hpp"

namespace cvarsafe {

struct Interval {
  double lo;
  double hi;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

using State = std::vector<double>;

/// Finite-horizon stochastic control system with bounded costs in
/// [0, c_bar]. The state space is a box, the action set a scalar interval.
/// Implementations are immutable after construction and thread-safe.
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual std::size_t state_dim() const = 0;
  virtual std::span<const Interval> state_bounds() const = 0;
  virtual Interval action_bounds() const = 0;
  virtual int horizon() const = 0;

  /// Writes f(x, u, w) into `next`. The result lies inside state_bounds().
  virtual void transition(std::span<const double> x, double u, double w,
                          std::span<double> next) const = 0;
  virtual double stage_cost(std::span<const double> x, double u) const = 0;
  virtual double terminal_cost(std::span<const double> x) const = 0;

  /// Disturbance law p(. | x, u). The reference stays valid for the model's
  /// lifetime.
  virtual const ProbabilityMassFunction& disturbance(std::span<const double> x,
                                                     double u) const = 0;

  /// Upper bound of the stage and terminal costs.
  virtual double c_bar() const = 0;
  /// Constant subtracted from g_K to obtain nonnegative costs.
  virtual double g_lower() const = 0;

  State transition(std::span<const double> x, double u, double w) const {
    State next(state_dim());
    transition(x, u, w, next);
    return next;
  }

  /// Running-maximum update of the augmented coordinate.
  double z_update(double z, std::span<const double> x, double u) const;
};

}  // namespace cvarsafe

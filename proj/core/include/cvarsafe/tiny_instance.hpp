#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvarsafe/grid.hpp"
#include "cvarsafe/system_model.hpp"

namespace cvarsafe {

/// Explicit finite control problem. States and actions are indices; the
/// disturbance outcomes of (x, u) are listed with their successor states.
struct TinyInstance {
  struct Outcome {
    double prob;
    std::size_t next;
  };

  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  int horizon = 1;
  double c_bar = 0.0;
  std::vector<std::vector<double>> stage_cost;               // [x][u]
  std::vector<double> terminal_cost;                         // [x]
  std::vector<std::vector<std::vector<Outcome>>> outcomes;   // [x][u][k]

  /// Throws std::invalid_argument on shape errors, costs outside [0, c_bar],
  /// successors out of range, or outcome probabilities not summing to 1.
  void validate() const;

  /// {0} together with every stage cost: all running maxima reachable from
  /// z = 0.
  std::vector<double> reachable_z() const;
  /// {0, c_bar} together with every stage and terminal cost.
  std::vector<double> cost_atoms() const;
};

class InstanceParseError : public std::runtime_error {
 public:
  InstanceParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Text format, one directive per line, '#' starts a comment:
//
//   tiny-instance 1
//   states 2
//   actions 2
//   horizon 2
//   c_bar 1
//   terminal <x> <cost>
//   stage <x> <u> <cost>
//   outcome <x> <u> <prob> <next>     (repeat per disturbance atom)
//
// Every (x, u) needs a stage line and at least one outcome line; every x
// needs a terminal line.
TinyInstance read_instance(std::istream& in, const std::string& source = "<stream>");
void write_instance(std::ostream& out, const TinyInstance& instance);

struct TinyLimits {
  std::size_t max_states = 3;
  std::size_t max_actions = 3;
  std::size_t max_outcomes = 3;
  int max_horizon = 3;
};

/// Seeded random instance. Costs come from {0, 1/4, 1/2, 3/4, 1} so the
/// reachable running maxima stay few, and probabilities from multiples of
/// 1/8, both exact in binary.
TinyInstance random_instance(std::uint64_t seed, const TinyLimits& limits = {});

/// SystemModel view of a tiny instance. The state is the index on a 1-D axis
/// and the disturbance value is the outcome index.
class TinyModel final : public SystemModel {
 public:
  explicit TinyModel(TinyInstance instance);

  const TinyInstance& instance() const { return instance_; }

  std::size_t state_dim() const override { return 1; }
  std::span<const Interval> state_bounds() const override { return bounds_; }
  Interval action_bounds() const override;
  int horizon() const override { return instance_.horizon; }
  void transition(std::span<const double> x, double u, double w,
                  std::span<double> next) const override;
  double stage_cost(std::span<const double> x, double u) const override;
  double terminal_cost(std::span<const double> x) const override;
  const ProbabilityMassFunction& disturbance(std::span<const double> x,
                                             double u) const override;
  double c_bar() const override { return instance_.c_bar; }
  double g_lower() const override { return 0.0; }

  using SystemModel::transition;

 private:
  std::size_t state_index(double x) const;
  std::size_t action_index(double u) const;

  TinyInstance instance_;
  std::array<Interval, 1> bounds_;
  std::vector<std::vector<ProbabilityMassFunction>> laws_;
};

/// Grid on which the dynamic program is exact for the instance: states and
/// actions as nodes, reachable running maxima (plus c_bar) as z nodes and the
/// cost atoms as s nodes.
AugmentedGrid exact_grid(const TinyInstance& instance);

}  // namespace cvarsafe

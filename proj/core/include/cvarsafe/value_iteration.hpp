#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cvarsafe/grid.hpp"
#include "cvarsafe/system_model.hpp"

namespace cvarsafe {

/// J_t^s sampled on the (x, z) grid for t = 0..N.
struct ValueTable {
  double s = 0.0;
  std::size_t x_count = 0;
  std::size_t z_count = 0;
  std::vector<std::vector<double>> slices;

  int horizon() const { return static_cast<int>(slices.size()) - 1; }
  std::span<const double> at(int t) const { return slices[static_cast<std::size_t>(t)]; }
  double operator()(int t, std::size_t x_flat, std::size_t iz) const {
    return slices[static_cast<std::size_t>(t)][x_flat * z_count + iz];
  }
};

/// Selected grid action per (x, z) node for t = 0..N-1.
struct PolicyTable {
  double s = 0.0;
  std::size_t x_count = 0;
  std::size_t z_count = 0;
  std::vector<std::vector<double>> actions;

  double operator()(int t, std::size_t x_flat, std::size_t iz) const {
    return actions[static_cast<std::size_t>(t)][x_flat * z_count + iz];
  }
};

/// Interpolation stencils of every (x node, action) pair, shared by all
/// dual parameters. Built once per (model, grid).
class TransitionCache {
 public:
  TransitionCache(const SystemModel& model, const AugmentedGrid& grid);

  struct Term {
    std::uint32_t x_flat;
    double weight;  // disturbance probability times the x interpolation weight
  };
  struct ZStep {
    std::uint32_t index;
    double weight;
  };

  std::size_t action_count() const { return action_count_; }
  std::span<const Term> terms(std::size_t x_flat, std::size_t iu) const;
  /// z-axis bracket of max(z_node[iz], c(x, u)).
  ZStep z_step(std::size_t x_flat, std::size_t iu, std::size_t iz) const {
    return z_steps_[(x_flat * action_count_ + iu) * z_count_ + iz];
  }

 private:
  std::size_t action_count_;
  std::size_t z_count_;
  std::vector<std::size_t> offsets_;
  std::vector<Term> terms_;
  std::vector<ZStep> z_steps_;
};

/// max(max(c_N(x), z) - s, 0).
double terminal_value(const SystemModel& model, std::span<const double> x, double z, double s);

/// Expected interpolated next-stage value of applying u at (x, z).
double backup_q(const SystemModel& model, const AugmentedGrid& grid,
                std::span<const double> next_values, std::span<const double> x, double z,
                double u);

struct BellmanResult {
  double value;
  double action;
};

/// Minimum of backup_q over the action grid; ties go to the smallest action.
BellmanResult bellman_min(const SystemModel& model, const AugmentedGrid& grid,
                          std::span<const double> next_values, std::span<const double> x,
                          double z);

struct DpSolution {
  ValueTable values;
  PolicyTable policy;
};

struct SolveOptions {
  /// Worker threads for the per-stage node sweep. 0 or 1 runs inline.
  unsigned threads = 1;
};

/// Backward recursion from J_N^s down to J_0^s. J_0^s(x, 0) is V^s(x).
DpSolution value_iteration(double s, const SystemModel& model, const AugmentedGrid& grid,
                           const TransitionCache& cache, SolveOptions options = {});
DpSolution value_iteration(double s, const SystemModel& model, const AugmentedGrid& grid,
                           SolveOptions options = {});

}  // namespace cvarsafe

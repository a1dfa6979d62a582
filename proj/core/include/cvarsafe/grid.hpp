#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cvarsafe/system_model.hpp"

namespace cvarsafe {

/// Strictly increasing list of grid nodes along one coordinate.
class Axis {
 public:
  /// Single node at 0.
  Axis() : nodes_{0.0} {}

  /// `count` >= 2 evenly spaced nodes; the endpoints are exactly lo and hi.
  static Axis uniform(double lo, double hi, std::size_t count);
  /// Explicit nodes; must be non-empty and strictly increasing.
  static Axis from_nodes(std::vector<double> nodes);

  std::size_t size() const { return nodes_.size(); }
  double lo() const { return nodes_.front(); }
  double hi() const { return nodes_.back(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  std::span<const double> nodes() const { return nodes_; }

  /// Position of v as (i, w) with v = (1 - w) * node[i] + w * node[i + 1].
  /// A value equal to a node yields that node with w == 0. Throws
  /// std::out_of_range for values outside [lo, hi].
  struct Bracket {
    std::size_t index;
    double weight;
  };
  Bracket locate(double v) const;

  /// Index of the closest node (lower node on an exact midpoint).
  std::size_t nearest(double v) const;

 private:
  explicit Axis(std::vector<double> nodes) : nodes_(std::move(nodes)) {}
  std::vector<double> nodes_;
};

/// Rectilinear discretization of S x Z, plus the action and dual-parameter
/// grids. Tables over (x, z) are stored row-major with the x coordinates
/// flattened (last state dimension fastest) and z innermost.
struct AugmentedGrid {
  std::vector<Axis> x_axes;
  Axis z_axis;
  Axis action_axis;
  Axis s_axis;

  /// Uniform axes spanning the model's state box, [0, c_bar] for z and s,
  /// and the model's action interval.
  static AugmentedGrid uniform(const SystemModel& model, std::span<const std::size_t> x_counts,
                               std::size_t z_count, std::size_t action_count,
                               std::size_t s_count);

  /// Throws std::invalid_argument unless the axes match the model bounds and
  /// z spans [0, c_bar] and the s nodes lie inside it.
  void validate(const SystemModel& model) const;

  std::size_t state_dim() const { return x_axes.size(); }
  std::size_t x_count() const;
  std::size_t z_count() const { return z_axis.size(); }
  std::size_t node_count() const { return x_count() * z_count(); }

  std::vector<std::size_t> unflatten(std::size_t x_flat) const;
  State x_node(std::size_t x_flat) const;
  /// Flat index of the x node nearest to `x` in each coordinate.
  std::size_t nearest_x(std::span<const double> x) const;

  std::size_t index(std::size_t x_flat, std::size_t iz) const {
    return x_flat * z_axis.size() + iz;
  }
};

/// Multilinear interpolation of a (x, z) table at an arbitrary point. Exact
/// (bitwise) at grid nodes.
double interpolate(const AugmentedGrid& grid, std::span<const double> table,
                   std::span<const double> x, double z);

}  // namespace cvarsafe

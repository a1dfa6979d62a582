#include "cvarsafe/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cvarsafe {

Axis Axis::uniform(double lo, double hi, std::size_t count) {
  if (count < 2) throw std::invalid_argument("uniform axis needs at least 2 nodes");
  if (!(hi > lo)) throw std::invalid_argument("uniform axis needs hi > lo");
  std::vector<double> nodes(count);
  const double n = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    nodes[i] = lo + (hi - lo) * (static_cast<double>(i) / n);
  nodes.front() = lo;
  nodes.back() = hi;
  return Axis(std::move(nodes));
}

Axis Axis::from_nodes(std::vector<double> nodes) {
  if (nodes.empty()) throw std::invalid_argument("axis needs at least one node");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1]))
      throw std::invalid_argument("axis nodes must be strictly increasing");
  return Axis(std::move(nodes));
}

Axis::Bracket Axis::locate(double v) const {
  if (!(v >= lo() && v <= hi()))
    throw std::out_of_range("axis query " + std::to_string(v) + " outside [" +
                            std::to_string(lo()) + ", " + std::to_string(hi()) + "]");
  if (nodes_.size() == 1) return {0, 0.0};
  // First node strictly greater than v, then step back one.
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), v);
  std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
  i = i == 0 ? 0 : i - 1;
  if (i >= nodes_.size() - 1) return {nodes_.size() - 2, 1.0};
  const double w = (v - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
  return {i, w};
}

std::size_t Axis::nearest(double v) const {
  if (v <= lo()) return 0;
  if (v >= hi()) return nodes_.size() - 1;
  const auto b = locate(v);
  if (b.index + 1 >= nodes_.size()) return b.index;
  const double dl = v - nodes_[b.index];
  const double dh = nodes_[b.index + 1] - v;
  return dh < dl ? b.index + 1 : b.index;
}

AugmentedGrid AugmentedGrid::uniform(const SystemModel& model,
                                     std::span<const std::size_t> x_counts,
                                     std::size_t z_count, std::size_t action_count,
                                     std::size_t s_count) {
  if (x_counts.size() != model.state_dim())
    throw std::invalid_argument("grid: expected " + std::to_string(model.state_dim()) +
                                " x axis counts");
  const auto bounds = model.state_bounds();
  std::vector<Axis> xs;
  for (std::size_t d = 0; d < x_counts.size(); ++d)
    xs.push_back(Axis::uniform(bounds[d].lo, bounds[d].hi, x_counts[d]));
  const auto a = model.action_bounds();
  AugmentedGrid grid{std::move(xs), Axis::uniform(0.0, model.c_bar(), z_count),
                     Axis::uniform(a.lo, a.hi, action_count),
                     Axis::uniform(0.0, model.c_bar(), s_count)};
  grid.validate(model);
  return grid;
}

void AugmentedGrid::validate(const SystemModel& model) const {
  if (x_axes.size() != model.state_dim())
    throw std::invalid_argument("grid: state dimension mismatch");
  const auto bounds = model.state_bounds();
  for (std::size_t d = 0; d < x_axes.size(); ++d)
    if (x_axes[d].lo() != bounds[d].lo || x_axes[d].hi() != bounds[d].hi)
      throw std::invalid_argument("grid.x[" + std::to_string(d) +
                                  "]: endpoints must equal the state bounds");
  const auto a = model.action_bounds();
  if (action_axis.lo() < a.lo || action_axis.hi() > a.hi)
    throw std::invalid_argument("grid.action: nodes outside the action bounds");
  const double c_bar = model.c_bar();
  auto has = [](const Axis& axis, double v) {
    return std::find(axis.nodes().begin(), axis.nodes().end(), v) != axis.nodes().end();
  };
  if (z_axis.lo() != 0.0 || z_axis.hi() != c_bar || !has(z_axis, c_bar))
    throw std::invalid_argument("grid.z: axis must span exactly [0, c_bar]");
  if (s_axis.lo() < 0.0 || s_axis.hi() > c_bar)
    throw std::invalid_argument("grid.s: nodes must lie within [0, c_bar]");
}

std::size_t AugmentedGrid::x_count() const {
  std::size_t n = 1;
  for (const auto& a : x_axes) n *= a.size();
  return n;
}

std::vector<std::size_t> AugmentedGrid::unflatten(std::size_t x_flat) const {
  std::vector<std::size_t> idx(x_axes.size());
  for (std::size_t d = x_axes.size(); d-- > 0;) {
    idx[d] = x_flat % x_axes[d].size();
    x_flat /= x_axes[d].size();
  }
  return idx;
}

State AugmentedGrid::x_node(std::size_t x_flat) const {
  const auto idx = unflatten(x_flat);
  State x(x_axes.size());
  for (std::size_t d = 0; d < x_axes.size(); ++d) x[d] = x_axes[d][idx[d]];
  return x;
}

std::size_t AugmentedGrid::nearest_x(std::span<const double> x) const {
  std::size_t flat = 0;
  for (std::size_t d = 0; d < x_axes.size(); ++d)
    flat = flat * x_axes[d].size() + x_axes[d].nearest(x[d]);
  return flat;
}

double interpolate(const AugmentedGrid& grid, std::span<const double> table,
                   std::span<const double> x, double z) {
  const std::size_t dims = grid.x_axes.size();
  std::vector<Axis::Bracket> br(dims);
  for (std::size_t d = 0; d < dims; ++d) br[d] = grid.x_axes[d].locate(x[d]);
  const auto bz = grid.z_axis.locate(z);

  double total = 0.0;
  const std::size_t corners = std::size_t{1} << dims;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      const bool up = (mask >> d) & 1U;
      const double wd = up ? br[d].weight : 1.0 - br[d].weight;
      w *= wd;
      flat = flat * grid.x_axes[d].size() + br[d].index + (up ? 1 : 0);
    }
    if (w == 0.0) continue;
    const double lo = table[grid.index(flat, bz.index)];
    const double zval = bz.weight == 0.0
                            ? lo
                            : (1.0 - bz.weight) * lo + bz.weight * table[grid.index(flat, bz.index + 1)];
    total += w * zval;
  }
  return total;
}

}  // namespace cvarsafe

#include "cvarsafe/risk_solver.hpp"

#include <algorithm>
#include <stdexcept>

#include "cvarsafe/parallel.hpp"
#include "cvarsafe/value_iteration.hpp"

namespace cvarsafe {

DualSweep sweep(const SystemModel& model, const AugmentedGrid& grid, SweepOptions options) {
  const TransitionCache cache(model, grid);
  const auto s_nodes = grid.s_axis.nodes();
  DualSweep out;
  out.s_values.assign(s_nodes.begin(), s_nodes.end());
  out.v0.resize(s_nodes.size());
  out.g_lower = model.g_lower();
  out.c_bar = model.c_bar();

  const std::size_t nx = grid.x_count();
  auto solve_one = [&](std::size_t k) {
    const auto sol = value_iteration(s_nodes[k], model, grid, cache);
    auto& row = out.v0[k];
    row.resize(nx);
    for (std::size_t ix = 0; ix < nx; ++ix) row[ix] = sol.values(0, ix, 0);
  };

  if (!options.progress) {
    parallel_for(s_nodes.size(), options.threads, solve_one);
    return out;
  }
  // Batches of `threads` keep progress reports in s order.
  const std::size_t batch = std::max<std::size_t>(options.threads, 1);
  for (std::size_t start = 0; start < s_nodes.size(); start += batch) {
    const std::size_t n = std::min(batch, s_nodes.size() - start);
    parallel_for(n, options.threads, [&](std::size_t i) { solve_one(start + i); });
    for (std::size_t k = start; k < start + n; ++k) options.progress(k, s_nodes[k]);
  }
  return out;
}

std::vector<double> dual_objective_column(const DualSweep& sweep, std::size_t x_flat,
                                          RiskLevel alpha) {
  std::vector<double> col(sweep.s_values.size());
  for (std::size_t k = 0; k < col.size(); ++k)
    col[k] = sweep.s_values[k] + sweep.v0[k][x_flat] / alpha.value();
  return col;
}

RiskSurface risk_value(const DualSweep& sweep, RiskLevel alpha) {
  if (sweep.s_values.empty()) throw std::invalid_argument("risk_value: empty sweep");
  const std::size_t nx = sweep.x_count();
  RiskSurface surface;
  surface.alpha = alpha.value();
  surface.v_star.resize(nx);
  surface.w_star.resize(nx);
  surface.s_star.resize(nx);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    double best = sweep.s_values[0] + sweep.v0[0][ix] / alpha.value();
    double arg = sweep.s_values[0];
    for (std::size_t k = 1; k < sweep.s_values.size(); ++k) {
      const double v = sweep.s_values[k] + sweep.v0[k][ix] / alpha.value();
      if (v < best) {
        best = v;
        arg = sweep.s_values[k];
      }
    }
    surface.v_star[ix] = best;
    surface.w_star[ix] = sweep.g_lower + best;
    surface.s_star[ix] = arg;
  }
  return surface;
}

SafeSetMask extract_safe_set(const RiskSurface& surface, double r) {
  SafeSetMask mask;
  mask.alpha = surface.alpha;
  mask.r = r;
  mask.inside.resize(surface.w_star.size());
  for (std::size_t i = 0; i < surface.w_star.size(); ++i) {
    mask.inside[i] = surface.w_star[i] <= r ? 1 : 0;
    mask.count += mask.inside[i];
  }
  return mask;
}

}  // namespace cvarsafe

#include "cvarsafe/value_iteration.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "cvarsafe/parallel.hpp"

namespace cvarsafe {

TransitionCache::TransitionCache(const SystemModel& model, const AugmentedGrid& grid)
    : action_count_(grid.action_axis.size()), z_count_(grid.z_count()) {
  grid.validate(model);
  const std::size_t nx = grid.x_count();
  const std::size_t dims = grid.state_dim();
  const std::size_t corners = std::size_t{1} << dims;
  offsets_.reserve(nx * action_count_ + 1);
  offsets_.push_back(0);
  z_steps_.resize(nx * action_count_ * z_count_);

  State next(dims);
  std::vector<Axis::Bracket> br(dims);
  std::vector<Term> local;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const State x = grid.x_node(ix);
    for (std::size_t iu = 0; iu < action_count_; ++iu) {
      const double u = grid.action_axis[iu];
      local.clear();
      for (const auto& atom : model.disturbance(x, u).atoms()) {
        model.transition(x, u, atom.value, next);
        for (std::size_t d = 0; d < dims; ++d) br[d] = grid.x_axes[d].locate(next[d]);
        for (std::size_t mask = 0; mask < corners; ++mask) {
          double w = atom.prob;
          std::size_t flat = 0;
          for (std::size_t d = 0; d < dims; ++d) {
            const bool up = (mask >> d) & 1U;
            w *= up ? br[d].weight : 1.0 - br[d].weight;
            flat = flat * grid.x_axes[d].size() + br[d].index + (up ? 1 : 0);
          }
          if (w != 0.0) local.push_back({static_cast<std::uint32_t>(flat), w});
        }
      }
      std::stable_sort(local.begin(), local.end(),
                       [](const Term& l, const Term& r) { return l.x_flat < r.x_flat; });
      for (const auto& t : local) {
        if (terms_.size() > offsets_.back() && terms_.back().x_flat == t.x_flat)
          terms_.back().weight += t.weight;
        else
          terms_.push_back(t);
      }
      offsets_.push_back(terms_.size());

      const double cost = model.stage_cost(x, u);
      for (std::size_t iz = 0; iz < z_count_; ++iz) {
        const double z_next = std::max(grid.z_axis[iz], cost);
        const auto b = grid.z_axis.locate(z_next);
        z_steps_[(ix * action_count_ + iu) * z_count_ + iz] = {
            static_cast<std::uint32_t>(b.index), b.weight};
      }
    }
  }
}

std::span<const TransitionCache::Term> TransitionCache::terms(std::size_t x_flat,
                                                             std::size_t iu) const {
  const std::size_t k = x_flat * action_count_ + iu;
  return std::span<const Term>(terms_).subspan(offsets_[k], offsets_[k + 1] - offsets_[k]);
}

double terminal_value(const SystemModel& model, std::span<const double> x, double z, double s) {
  return std::max(std::max(model.terminal_cost(x), z) - s, 0.0);
}

double backup_q(const SystemModel& model, const AugmentedGrid& grid,
                std::span<const double> next_values, std::span<const double> x, double z,
                double u) {
  const double z_next = model.z_update(z, x, u);
  State next(model.state_dim());
  double total = 0.0;
  for (const auto& atom : model.disturbance(x, u).atoms()) {
    model.transition(x, u, atom.value, next);
    total += atom.prob * interpolate(grid, next_values, next, z_next);
  }
  return total;
}

BellmanResult bellman_min(const SystemModel& model, const AugmentedGrid& grid,
                          std::span<const double> next_values, std::span<const double> x,
                          double z) {
  BellmanResult best{std::numeric_limits<double>::infinity(), grid.action_axis[0]};
  for (const double u : grid.action_axis.nodes()) {
    const double q = backup_q(model, grid, next_values, x, z, u);
    if (q < best.value) best = {q, u};
  }
  return best;
}

DpSolution value_iteration(double s, const SystemModel& model, const AugmentedGrid& grid,
                           const TransitionCache& cache, SolveOptions options) {
  const int horizon = model.horizon();
  const std::size_t nx = grid.x_count();
  const std::size_t nz = grid.z_count();
  const std::size_t nu = grid.action_axis.size();

  DpSolution sol;
  sol.values = {s, nx, nz, std::vector<std::vector<double>>(static_cast<std::size_t>(horizon) + 1)};
  sol.policy = {s, nx, nz, std::vector<std::vector<double>>(static_cast<std::size_t>(horizon))};

  auto& terminal = sol.values.slices.back();
  terminal.resize(nx * nz);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const State x = grid.x_node(ix);
    for (std::size_t iz = 0; iz < nz; ++iz)
      terminal[grid.index(ix, iz)] = terminal_value(model, x, grid.z_axis[iz], s);
  }

  for (int t = horizon - 1; t >= 0; --t) {
    const auto& next = sol.values.slices[static_cast<std::size_t>(t) + 1];
    auto& value = sol.values.slices[static_cast<std::size_t>(t)];
    auto& policy = sol.policy.actions[static_cast<std::size_t>(t)];
    value.assign(nx * nz, 0.0);
    policy.assign(nx * nz, 0.0);

    parallel_for(nx, options.threads, [&](std::size_t ix) {
      std::vector<double> best(nz, std::numeric_limits<double>::infinity());
      std::vector<std::size_t> arg(nz, 0);
      for (std::size_t iu = 0; iu < nu; ++iu) {
        const auto terms = cache.terms(ix, iu);
        for (std::size_t iz = 0; iz < nz; ++iz) {
          const auto zs = cache.z_step(ix, iu, iz);
          double q = 0.0;
          if (zs.weight == 0.0) {
            for (const auto& term : terms) q += term.weight * next[term.x_flat * nz + zs.index];
          } else {
            const double wl = 1.0 - zs.weight;
            for (const auto& term : terms) {
              const double* row = &next[term.x_flat * nz + zs.index];
              q += term.weight * (wl * row[0] + zs.weight * row[1]);
            }
          }
          if (q < best[iz]) {
            best[iz] = q;
            arg[iz] = iu;
          }
        }
      }
      for (std::size_t iz = 0; iz < nz; ++iz) {
        value[grid.index(ix, iz)] = best[iz];
        policy[grid.index(ix, iz)] = grid.action_axis[arg[iz]];
      }
    });
  }
  return sol;
}

DpSolution value_iteration(double s, const SystemModel& model, const AugmentedGrid& grid,
                           SolveOptions options) {
  const TransitionCache cache(model, grid);
  return value_iteration(s, model, grid, cache, options);
}

}  // namespace cvarsafe

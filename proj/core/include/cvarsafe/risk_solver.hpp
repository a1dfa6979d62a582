#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "cvarsafe/cvar.hpp"
#include "cvarsafe/grid.hpp"
#include "cvarsafe/system_model.hpp"

namespace cvarsafe {

/// J_0^s(x, 0) for every s on the dual axis and every x node.
struct DualSweep {
  std::vector<double> s_values;
  std::vector<std::vector<double>> v0;  // [s index][x node]
  double g_lower = 0.0;
  double c_bar = 0.0;

  std::size_t x_count() const { return v0.empty() ? 0 : v0.front().size(); }
};

struct SweepOptions {
  /// Dual parameters are solved concurrently on this many workers.
  unsigned threads = 1;
  /// Called after each s finishes with (s index, s). Invoked in s order.
  std::function<void(std::size_t, double)> progress;
};

DualSweep sweep(const SystemModel& model, const AugmentedGrid& grid, SweepOptions options = {});

/// s + V^s(x) / alpha for every s on the sweep's axis at one x node.
std::vector<double> dual_objective_column(const DualSweep& sweep, std::size_t x_flat,
                                          RiskLevel alpha);

struct RiskSurface {
  double alpha = 1.0;
  std::vector<double> v_star;
  std::vector<double> w_star;
  std::vector<double> s_star;
};

/// Minimizes s + V^s(x) / alpha over the swept s values at every x node.
/// Ties resolve to the smallest s.
RiskSurface risk_value(const DualSweep& sweep, RiskLevel alpha);

struct SafeSetMask {
  double alpha = 1.0;
  double r = 0.0;
  std::vector<std::uint8_t> inside;
  std::size_t count = 0;
};

/// Nodes with W*_alpha(x) <= r, compared exactly.
SafeSetMask extract_safe_set(const RiskSurface& surface, double r);

}  // namespace cvarsafe

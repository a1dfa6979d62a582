#pragma once

#include <iosfwd>
#include <string>

#include "cvarsafe/grid.hpp"
#include "cvarsafe/value_iteration.hpp"

namespace cvarsafe {

/// Shortest decimal text that round-trips the double ("%.17g").
std::string format_double(double v);

// Table CSV layout, one row per (t, x node, z node):
//
//   # s=<s>
//   t,i1,...,id,iz,value        (or "action" for policies)
//
// Indices are zero-based grid indices, rows ordered by t, then x (row-major),
// then z. Values use format_double, so reading a file back is lossless.

void write_value_table(std::ostream& out, const AugmentedGrid& grid, const ValueTable& table);
void write_policy_table(std::ostream& out, const AugmentedGrid& grid, const PolicyTable& table);

/// Throws std::runtime_error with the offending line number on malformed
/// input or a shape mismatch against `grid`.
ValueTable read_value_table(std::istream& in, const AugmentedGrid& grid);
PolicyTable read_policy_table(std::istream& in, const AugmentedGrid& grid);

}  // namespace cvarsafe

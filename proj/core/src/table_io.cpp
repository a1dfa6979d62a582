#include "cvarsafe/table_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cvarsafe {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_rows(std::ostream& out, const AugmentedGrid& grid, double s,
                const std::vector<std::vector<double>>& slices, const char* column) {
  out << "# s=" << format_double(s) << '\n' << 't';
  for (std::size_t d = 0; d < grid.state_dim(); ++d) out << ",i" << (d + 1);
  out << ",iz," << column << '\n';
  for (std::size_t t = 0; t < slices.size(); ++t) {
    for (std::size_t ix = 0; ix < grid.x_count(); ++ix) {
      const auto idx = grid.unflatten(ix);
      for (std::size_t iz = 0; iz < grid.z_count(); ++iz) {
        out << t;
        for (auto i : idx) out << ',' << i;
        out << ',' << iz << ',' << format_double(slices[t][grid.index(ix, iz)]) << '\n';
      }
    }
  }
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::runtime_error("table line " + std::to_string(line) + ": " + what);
}

std::vector<std::vector<double>> read_rows(std::istream& in, const AugmentedGrid& grid,
                                           double& s) {
  std::string text;
  std::size_t line = 0;
  if (!std::getline(in, text) || text.rfind("# s=", 0) != 0) fail(1, "expected '# s=' header");
  ++line;
  try {
    s = std::stod(text.substr(4));
  } catch (const std::exception&) {
    fail(line, "bad s value");
  }
  if (!std::getline(in, text)) fail(2, "missing column header");
  ++line;

  const std::size_t dims = grid.state_dim();
  std::vector<std::vector<double>> slices;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    std::stringstream ss(text);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != dims + 3) fail(line, "expected " + std::to_string(dims + 3) + " fields");
    try {
      const std::size_t t = std::stoul(fields[0]);
      std::size_t flat = 0;
      for (std::size_t d = 0; d < dims; ++d) {
        const std::size_t i = std::stoul(fields[d + 1]);
        if (i >= grid.x_axes[d].size()) fail(line, "x index out of range");
        flat = flat * grid.x_axes[d].size() + i;
      }
      const std::size_t iz = std::stoul(fields[dims + 1]);
      if (iz >= grid.z_count()) fail(line, "z index out of range");
      if (t >= slices.size()) slices.resize(t + 1, std::vector<double>(grid.node_count(), 0.0));
      slices[t][grid.index(flat, iz)] = std::stod(fields[dims + 2]);
    } catch (const std::invalid_argument&) {
      fail(line, "non-numeric field");
    }
  }
  const std::size_t expected_rows = slices.size() * grid.node_count();
  if (line - 2 != expected_rows) fail(line, "row count does not match the grid");
  return slices;
}

}  // namespace

void write_value_table(std::ostream& out, const AugmentedGrid& grid, const ValueTable& table) {
  write_rows(out, grid, table.s, table.slices, "value");
}

void write_policy_table(std::ostream& out, const AugmentedGrid& grid, const PolicyTable& table) {
  write_rows(out, grid, table.s, table.actions, "action");
}

ValueTable read_value_table(std::istream& in, const AugmentedGrid& grid) {
  ValueTable t;
  t.x_count = grid.x_count();
  t.z_count = grid.z_count();
  t.slices = read_rows(in, grid, t.s);
  return t;
}

PolicyTable read_policy_table(std::istream& in, const AugmentedGrid& grid) {
  PolicyTable t;
  t.x_count = grid.x_count();
  t.z_count = grid.z_count();
  t.actions = read_rows(in, grid, t.s);
  return t;
}

}  // namespace cvarsafe

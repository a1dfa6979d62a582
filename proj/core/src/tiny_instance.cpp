#include "cvarsafe/tiny_instance.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "cvarsafe/table_io.hpp"

namespace cvarsafe {

void TinyInstance::validate() const {
  if (num_states == 0) throw std::invalid_argument("instance: states must be >= 1");
  if (num_actions == 0) throw std::invalid_argument("instance: actions must be >= 1");
  if (horizon < 1) throw std::invalid_argument("instance: horizon must be >= 1");
  if (!(c_bar >= 0.0)) throw std::invalid_argument("instance: c_bar must be >= 0");
  if (stage_cost.size() != num_states || terminal_cost.size() != num_states ||
      outcomes.size() != num_states)
    throw std::invalid_argument("instance: per-state tables have the wrong size");
  auto check_cost = [&](double c, const std::string& where) {
    if (!(c >= 0.0 && c <= c_bar))
      throw std::invalid_argument("instance: " + where + " cost outside [0, c_bar]");
  };
  for (std::size_t x = 0; x < num_states; ++x) {
    check_cost(terminal_cost[x], "terminal " + std::to_string(x));
    if (stage_cost[x].size() != num_actions || outcomes[x].size() != num_actions)
      throw std::invalid_argument("instance: per-action tables have the wrong size");
    for (std::size_t u = 0; u < num_actions; ++u) {
      const std::string where = "stage " + std::to_string(x) + " " + std::to_string(u);
      check_cost(stage_cost[x][u], where);
      if (outcomes[x][u].empty()) throw std::invalid_argument("instance: " + where + " has no outcomes");
      double total = 0.0;
      for (const auto& o : outcomes[x][u]) {
        if (!(o.prob > 0.0)) throw std::invalid_argument("instance: " + where + " has a non-positive probability");
        if (o.next >= num_states) throw std::invalid_argument("instance: " + where + " has a successor out of range");
        total += o.prob;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("instance: " + where + " outcome probabilities do not sum to 1");
    }
  }
}

namespace {
std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}
}  // namespace

std::vector<double> TinyInstance::reachable_z() const {
  std::vector<double> z{0.0};
  for (const auto& row : stage_cost) z.insert(z.end(), row.begin(), row.end());
  return sorted_unique(std::move(z));
}

std::vector<double> TinyInstance::cost_atoms() const {
  std::vector<double> s{0.0, c_bar};
  for (const auto& row : stage_cost) s.insert(s.end(), row.begin(), row.end());
  s.insert(s.end(), terminal_cost.begin(), terminal_cost.end());
  return sorted_unique(std::move(s));
}

TinyInstance read_instance(std::istream& in, const std::string& source) {
  TinyInstance inst;
  std::optional<std::size_t> states, actions;
  std::optional<int> horizon;
  std::optional<double> c_bar;
  std::vector<std::vector<std::optional<double>>> stage;
  std::vector<std::optional<double>> terminal;
  bool header = false;

  auto sized = [&](std::size_t line) {
    if (!states || !actions) throw InstanceParseError(source, line, "states and actions must be declared first");
    if (stage.empty()) {
      inst.num_states = *states;
      inst.num_actions = *actions;
      stage.assign(*states, std::vector<std::optional<double>>(*actions));
      terminal.assign(*states, std::nullopt);
      inst.outcomes.assign(*states, std::vector<std::vector<TinyInstance::Outcome>>(*actions));
    }
  };

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    std::istringstream ls(text);
    std::string key;
    if (!(ls >> key)) continue;

    auto need = [&](auto& value, const char* what) {
      if (!(ls >> value)) throw InstanceParseError(source, line, std::string("expected ") + what);
    };
    auto index = [&](std::size_t bound, const char* what) {
      long long v = 0;
      need(v, what);
      if (v < 0 || static_cast<std::size_t>(v) >= bound)
        throw InstanceParseError(source, line, std::string(what) + " out of range");
      return static_cast<std::size_t>(v);
    };

    if (!header) {
      int version = 0;
      if (key != "tiny-instance" || !(ls >> version) || version != 1)
        throw InstanceParseError(source, line, "expected 'tiny-instance 1' header");
      header = true;
    } else if (key == "states" || key == "actions") {
      long long v = 0;
      need(v, "a count");
      if (v < 1) throw InstanceParseError(source, line, key + " must be >= 1");
      if (!stage.empty()) throw InstanceParseError(source, line, key + " declared after use");
      (key == "states" ? states : actions) = static_cast<std::size_t>(v);
    } else if (key == "horizon") {
      int v = 0;
      need(v, "an integer horizon");
      if (v < 1) throw InstanceParseError(source, line, "horizon must be >= 1");
      horizon = v;
    } else if (key == "c_bar") {
      double v = 0;
      need(v, "a number");
      c_bar = v;
    } else if (key == "terminal") {
      sized(line);
      const auto x = index(*states, "state");
      double c = 0;
      need(c, "a cost");
      terminal[x] = c;
    } else if (key == "stage") {
      sized(line);
      const auto x = index(*states, "state");
      const auto u = index(*actions, "action");
      double c = 0;
      need(c, "a cost");
      stage[x][u] = c;
    } else if (key == "outcome") {
      sized(line);
      const auto x = index(*states, "state");
      const auto u = index(*actions, "action");
      double p = 0;
      need(p, "a probability");
      const auto next = index(*states, "successor");
      inst.outcomes[x][u].push_back({p, next});
    } else {
      throw InstanceParseError(source, line, "unknown directive '" + key + "'");
    }
    std::string extra;
    if (ls >> extra) throw InstanceParseError(source, line, "unexpected trailing token '" + extra + "'");
  }

  if (!header) throw InstanceParseError(source, line, "empty instance");
  if (!horizon || !c_bar) throw InstanceParseError(source, line, "horizon and c_bar are required");
  sized(line);
  inst.horizon = *horizon;
  inst.c_bar = *c_bar;
  inst.stage_cost.assign(inst.num_states, std::vector<double>(inst.num_actions));
  inst.terminal_cost.resize(inst.num_states);
  for (std::size_t x = 0; x < inst.num_states; ++x) {
    if (!terminal[x]) throw InstanceParseError(source, line, "missing terminal cost for state " + std::to_string(x));
    inst.terminal_cost[x] = *terminal[x];
    for (std::size_t u = 0; u < inst.num_actions; ++u) {
      if (!stage[x][u])
        throw InstanceParseError(source, line, "missing stage cost for (" + std::to_string(x) + ", " +
                                                   std::to_string(u) + ")");
      inst.stage_cost[x][u] = *stage[x][u];
    }
  }
  try {
    inst.validate();
  } catch (const std::invalid_argument& e) {
    throw InstanceParseError(source, line, e.what());
  }
  return inst;
}

void write_instance(std::ostream& out, const TinyInstance& inst) {
  out << "tiny-instance 1\n"
      << "states " << inst.num_states << '\n'
      << "actions " << inst.num_actions << '\n'
      << "horizon " << inst.horizon << '\n'
      << "c_bar " << format_double(inst.c_bar) << '\n';
  for (std::size_t x = 0; x < inst.num_states; ++x)
    out << "terminal " << x << ' ' << format_double(inst.terminal_cost[x]) << '\n';
  for (std::size_t x = 0; x < inst.num_states; ++x)
    for (std::size_t u = 0; u < inst.num_actions; ++u) {
      out << "stage " << x << ' ' << u << ' ' << format_double(inst.stage_cost[x][u]) << '\n';
      for (const auto& o : inst.outcomes[x][u])
        out << "outcome " << x << ' ' << u << ' ' << format_double(o.prob) << ' ' << o.next << '\n';
    }
}

TinyInstance random_instance(std::uint64_t seed, const TinyLimits& limits) {
  std::mt19937_64 gen(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
  };
  auto cost = [&] { return 0.25 * static_cast<double>(pick(0, 4)); };

  TinyInstance inst;
  inst.num_states = pick(1, limits.max_states);
  inst.num_actions = pick(1, limits.max_actions);
  inst.horizon = static_cast<int>(pick(1, static_cast<std::size_t>(limits.max_horizon)));
  inst.c_bar = 1.0;
  inst.stage_cost.assign(inst.num_states, std::vector<double>(inst.num_actions));
  inst.terminal_cost.resize(inst.num_states);
  inst.outcomes.assign(inst.num_states,
                       std::vector<std::vector<TinyInstance::Outcome>>(inst.num_actions));
  for (std::size_t x = 0; x < inst.num_states; ++x) {
    inst.terminal_cost[x] = cost();
    for (std::size_t u = 0; u < inst.num_actions; ++u) {
      inst.stage_cost[x][u] = cost();
      const std::size_t k = pick(1, limits.max_outcomes);
      std::vector<std::size_t> eighths(k, 1);
      for (std::size_t extra = 8 - k; extra > 0; --extra) ++eighths[pick(0, k - 1)];
      for (std::size_t j = 0; j < k; ++j)
        inst.outcomes[x][u].push_back({static_cast<double>(eighths[j]) / 8.0,
                                       pick(0, inst.num_states - 1)});
    }
  }
  inst.validate();
  return inst;
}

TinyModel::TinyModel(TinyInstance instance) : instance_(std::move(instance)) {
  instance_.validate();
  bounds_[0] = {0.0, static_cast<double>(instance_.num_states - 1)};
  laws_.resize(instance_.num_states);
  for (std::size_t x = 0; x < instance_.num_states; ++x)
    for (std::size_t u = 0; u < instance_.num_actions; ++u) {
      std::vector<ProbabilityMassFunction::Atom> atoms;
      const auto& outs = instance_.outcomes[x][u];
      for (std::size_t k = 0; k < outs.size(); ++k)
        atoms.push_back({static_cast<double>(k), outs[k].prob});
      laws_[x].push_back(ProbabilityMassFunction::from_atoms(std::move(atoms)));
    }
}

Interval TinyModel::action_bounds() const {
  return {0.0, static_cast<double>(instance_.num_actions - 1)};
}

std::size_t TinyModel::state_index(double x) const {
  const auto i = static_cast<std::size_t>(std::llround(x));
  if (static_cast<double>(i) != x || i >= instance_.num_states)
    throw std::logic_error("tiny model: state " + std::to_string(x) + " is not a listed state");
  return i;
}

std::size_t TinyModel::action_index(double u) const {
  const auto i = static_cast<std::size_t>(std::llround(u));
  if (static_cast<double>(i) != u || i >= instance_.num_actions)
    throw std::logic_error("tiny model: action " + std::to_string(u) + " is not a listed action");
  return i;
}

void TinyModel::transition(std::span<const double> x, double u, double w,
                           std::span<double> next) const {
  const auto& outs = instance_.outcomes[state_index(x[0])][action_index(u)];
  const auto k = static_cast<std::size_t>(std::llround(w));
  if (k >= outs.size()) throw std::logic_error("tiny model: disturbance index out of range");
  next[0] = static_cast<double>(outs[k].next);
}

double TinyModel::stage_cost(std::span<const double> x, double u) const {
  return instance_.stage_cost[state_index(x[0])][action_index(u)];
}

double TinyModel::terminal_cost(std::span<const double> x) const {
  return instance_.terminal_cost[state_index(x[0])];
}

const ProbabilityMassFunction& TinyModel::disturbance(std::span<const double> x, double u) const {
  return laws_[state_index(x[0])][action_index(u)];
}

AugmentedGrid exact_grid(const TinyInstance& instance) {
  auto indices = [](std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
    return v;
  };
  auto z = instance.reachable_z();
  if (z.back() != instance.c_bar) z.push_back(instance.c_bar);
  std::vector<Axis> xs{Axis::from_nodes(indices(instance.num_states))};
  return AugmentedGrid{std::move(xs), Axis::from_nodes(std::move(z)),
                       Axis::from_nodes(indices(instance.num_actions)),
                       Axis::from_nodes(instance.cost_atoms())};
}

}  // namespace cvarsafe

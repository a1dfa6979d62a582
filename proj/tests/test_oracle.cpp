#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvarsafe/oracle.hpp"
#include "cvarsafe/tiny_instance.hpp"
#include "support/reference.hpp"

using namespace cvarsafe;

namespace {

// From state 0, a fair coin moves to state 0 (cost 0) or 1 (terminal cost 1).
TinyInstance coin() {
  std::istringstream in(R"(tiny-instance 1
states 2
actions 1
horizon 1
c_bar 1
terminal 0 0
terminal 1 1
stage 0 0 0
stage 1 0 0
outcome 0 0 0.5 0
outcome 0 0 0.5 1
outcome 1 0 1 1
)");
  return read_instance(in, "coin");
}

// Two states, two actions, two outcomes, two stages. Action 0 is cheap now but
// risky; action 1 costs 0.5 up front and is safe.
TinyInstance canonical() {
  std::istringstream in(R"(tiny-instance 1
# canonical 2x2x2 instance
states 2
actions 2
horizon 2
c_bar 1
terminal 0 0
terminal 1 1
stage 0 0 0
stage 0 1 0.5
stage 1 0 0.25
stage 1 1 0.75
outcome 0 0 0.75 0
outcome 0 0 0.25 1
outcome 0 1 1 0
outcome 1 0 0.5 1
outcome 1 0 0.5 0
outcome 1 1 0.875 0
outcome 1 1 0.125 1
)");
  return read_instance(in, "canonical");
}

}  // namespace

TEST_CASE("hand-computed CVaR of a coin flip") {
  const auto inst = coin();
  for (const auto [a, expected] : {std::pair{0.5, 1.0}, {0.75, 2.0 / 3.0}, {1.0, 0.5}}) {
    const auto r = oracle::exact_optimal_cvar(inst, 0, RiskLevel(a));
    CHECK(r.value == doctest::Approx(expected).epsilon(1e-15));
    CHECK(r.exchange_value == doctest::Approx(expected).epsilon(1e-15));
    CHECK(r.policies_enumerated == 1);
    CHECK(oracle::pipeline_optimal_cvar(inst, 0, RiskLevel(a)).value ==
          doctest::Approx(expected).epsilon(1e-15));
  }
  const auto law = oracle::cost_distribution(inst, 0, {{{0, 0, 0.0}, 0}});
  REQUIRE(law.size() == 2);
  CHECK(law.atoms()[0].prob == 0.5);
}

TEST_CASE("deterministic instance gives a point mass") {
  TinyInstance inst = coin();
  inst.outcomes[0][0] = {{1.0, 1}};
  for (const double a : {0.1, 0.5, 1.0})
    CHECK(oracle::exact_optimal_cvar(inst, 0, RiskLevel(a)).value == 1.0);
}

TEST_CASE("canonical instance: pipeline, exchange and enumeration agree") {
  const auto inst = canonical();
  for (const double a : {1.0, 0.5, 0.25, 0.1}) {
    const RiskLevel alpha(a);
    for (std::size_t x0 = 0; x0 < 2; ++x0) {
      const auto exact = oracle::exact_optimal_cvar(inst, x0, alpha);
      CHECK(std::abs(exact.value - exact.exchange_value) <= 1e-9);
      CHECK(std::abs(exact.value - oracle::pipeline_optimal_cvar(inst, x0, alpha).value) <= 1e-9);
      CHECK(exact.value ==
            doctest::Approx(oracle::exact_policy_cvar(inst, x0, exact.best_policy, alpha)));
    }
  }
  // At alpha = 1 the risk-neutral value also matches an independent DP.
  const TinyModel model(inst);
  const auto grid = exact_grid(inst);
  const auto zs = grid.z_axis.nodes();
  const auto expectation =
      ref::ExpectationDp(model, {{0.0, 1.0}}, {zs.begin(), zs.end()}, {0.0, 1.0}).solve();
  for (std::size_t x0 = 0; x0 < 2; ++x0) {
    CHECK(std::abs(oracle::exact_expected_cost(inst, x0) - expectation[x0]) <= 1e-12);
    CHECK(std::abs(oracle::exact_optimal_cvar(inst, x0, RiskLevel(1.0)).value - expectation[x0]) <=
          1e-12);
  }
}

TEST_CASE("single-action instance has one policy") {
  auto inst = random_instance(3);
  while (inst.num_actions != 1) inst = random_instance(inst.num_states * 1000 + inst.num_actions + 17);
  const auto r = oracle::exact_optimal_cvar(inst, 0, RiskLevel(0.3));
  CHECK(r.policies_enumerated == 1);
  CHECK(r.value == oracle::exact_policy_cvar(inst, 0, r.best_policy, RiskLevel(0.3)));
}

TEST_CASE("exchange identity and pipeline on generated instances") {
  const std::vector<double> alphas{1.0, 0.75, 0.5, 0.25, 0.1, 0.05};
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const auto inst = random_instance(seed);
    const auto report = oracle::verify_instance(inst, alphas);
    CHECK(report.pass);
    CHECK(report.checks.size() == alphas.size() * inst.num_states);
  }
}

TEST_CASE("history-dependent policies never beat augmented-state feedback") {
  TinyLimits lim;
  lim.max_horizon = 2;
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto inst = random_instance(seed, lim);
    if (inst.horizon != 2) continue;
    for (const double a : {0.5, 0.2}) {
      const RiskLevel alpha(a);
      const double feedback = oracle::exact_optimal_cvar(inst, 0, alpha).value;
      try {
        const double history = oracle::exact_history_optimal_cvar(inst, 0, alpha, 200000);
        CHECK(history >= feedback - 1e-12);
        CHECK(history <= feedback + 1e-12);
        ++checked;
      } catch (const oracle::EnumerationBudgetExceeded&) {
      }
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("budget and undefined policy errors") {
  const auto inst = canonical();
  CHECK_THROWS_AS(oracle::exact_optimal_cvar(inst, 0, RiskLevel(0.5), 3),
                  oracle::EnumerationBudgetExceeded);
  CHECK_THROWS_AS(oracle::exact_policy_cvar(inst, 0, {}, RiskLevel(0.5)), std::logic_error);
  CHECK_THROWS_AS(oracle::exact_optimal_cvar(inst, 5, RiskLevel(0.5)), std::invalid_argument);
}

TEST_CASE("instance text round trip") {
  const auto inst = random_instance(77);
  std::stringstream buf;
  write_instance(buf, inst);
  const auto back = read_instance(buf);
  CHECK(back.num_states == inst.num_states);
  CHECK(back.stage_cost == inst.stage_cost);
  CHECK(back.terminal_cost == inst.terminal_cost);
  REQUIRE(back.outcomes.size() == inst.outcomes.size());
  std::stringstream again;
  write_instance(again, back);
  std::stringstream first;
  write_instance(first, inst);
  CHECK(again.str() == first.str());
}

TEST_CASE("parse errors carry the line number") {
  auto parse_line = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_instance(in, "bad");
    } catch (const InstanceParseError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string head = "tiny-instance 1\nstates 1\nactions 1\nhorizon 1\nc_bar 1\n";
  CHECK(parse_line("tiny-instance 2\n") == 1);
  CHECK(parse_line(head + "terminal 0 zero\n") == 6);
  CHECK(parse_line(head + "terminal 0 0\nstage 0 0 0\noutcome 0 0 1 4\n") == 8);
  CHECK(parse_line(head + "terminal 0 0\nstage 0 0 0\nbogus\n") == 8);
  CHECK(parse_line(head + "terminal 0 2\nstage 0 0 0\noutcome 0 0 1 0\n") > 0);
  CHECK(parse_line(head + "terminal 0 0\nstage 0 0 0\noutcome 0 0 1 0\n") == 0);
}

TEST_CASE("shipped corpus passes") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(CVARSAFE_TEST_DATA) / "oracle_corpus";
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".tiny") continue;
    std::ifstream in(e.path());
    const auto inst = read_instance(in, e.path().string());
    CHECK(inst.num_states <= 3);
    CHECK(inst.num_actions <= 3);
    CHECK(inst.horizon <= 3);
    CHECK(oracle::verify_instance(inst, {1.0, 0.5, 0.05}).pass);
    ++n;
  }
  CHECK(n >= 50);
}

#include <doctest.h>

#include <array>
#include <cmath>

#include "cvarsafe/oracle.hpp"
#include "cvarsafe/policy_runtime.hpp"
#include "cvarsafe/stormwater.hpp"
#include "cvarsafe/tiny_instance.hpp"

using namespace cvarsafe;

namespace {

stormwater::StormwaterModel model_with(ProbabilityMassFunction runoff) {
  return {stormwater::StormwaterParams::for_design(stormwater::Design::a), std::move(runoff)};
}

AugmentedGrid small_grid(const SystemModel& m) {
  const std::vector<std::size_t> counts{11, 13};
  return AugmentedGrid::uniform(m, counts, 5, 5, 9);
}

// The synthesized feedback policy written as a map over reachable (t, x, z).
oracle::AugmentedPolicy as_map(const TinyInstance& inst, const PrecommitmentPolicy& p) {
  oracle::AugmentedPolicy map;
  const auto zs = inst.reachable_z();
  for (int t = 0; t < inst.horizon; ++t)
    for (std::size_t x = 0; x < inst.num_states; ++x)
      for (const double z : zs) {
        const std::size_t iz = p.grid.z_axis.nearest(z);
        REQUIRE(p.grid.z_axis[iz] == z);
        map[{t, x, z}] = static_cast<std::size_t>(p.solution.policy(t, x, iz));
      }
  return map;
}

}  // namespace

TEST_CASE("synthesis reads s* at the nearest node and solves there") {
  const auto m = model_with(stormwater::smoke_runoff());
  const auto g = small_grid(m);
  const auto sw = sweep(m, g);
  const std::array<double, 2> x0{3.1, 4.4};
  const RiskLevel alpha(0.05);
  const auto p = synthesize_policy(x0, alpha, sw, m, g);
  const auto surface = risk_value(sw, alpha);
  CHECK(p.x0_node == g.nearest_x(x0));
  CHECK(p.s_star == surface.s_star[p.x0_node]);
  CHECK(p.solution.values.s == p.s_star);
  CHECK(p.solution.policy.s == p.s_star);

  const std::array<double, 2> outside{5.5, 1.0};
  CHECK_THROWS_AS(synthesize_policy(outside, alpha, sw, m, g), std::domain_error);
  const std::array<double, 1> wrong_dim{1.0};
  CHECK_THROWS_AS(synthesize_policy(wrong_dim, alpha, sw, m, g), std::domain_error);
}

TEST_CASE("synthesized policy attains the exact optimal CVaR on tiny instances") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto inst = random_instance(seed);
    const TinyModel model(inst);
    const auto grid = exact_grid(inst);
    const auto sw = sweep(model, grid);
    for (const double a : {1.0, 0.5, 0.2}) {
      const RiskLevel alpha(a);
      for (std::size_t x0 = 0; x0 < inst.num_states; ++x0) {
        const std::array<double, 1> x{static_cast<double>(x0)};
        const auto p = synthesize_policy(x, alpha, sw, model, grid);
        const double attained = oracle::exact_policy_cvar(inst, x0, as_map(inst, p), alpha);
        const double best = oracle::exact_optimal_cvar(inst, x0, alpha).value;
        CHECK(std::abs(attained - best) <= 1e-9);
        CHECK(std::abs(p.risk_value - best) <= 1e-9);
      }
    }
  }
}

TEST_CASE("rollouts are reproducible and independent of threads") {
  const auto m = model_with(stormwater::moment_matched_runoff());
  const auto g = small_grid(m);
  const auto sw = sweep(m, g);
  const std::array<double, 2> x0{2.0, 3.0};
  const auto p = synthesize_policy(x0, RiskLevel(0.05), sw, m, g);
  RolloutOptions o{500, 42, 1, false, true};
  const auto a = rollout(p, m, o);
  const auto b = rollout(p, m, o);
  o.threads = 4;
  const auto c = rollout(p, m, o);
  CHECK(a.y_prime == b.y_prime);
  CHECK(a.y_prime == c.y_prime);
  REQUIRE(c.trajectories.size() == 500);
  CHECK(c.trajectories[123].steps.back().w == a.trajectories[123].steps.back().w);
  o.seed = 43;
  CHECK(rollout(p, m, o).y_prime != a.y_prime);
  // A shorter batch is a prefix of a longer one.
  o.seed = 42;
  o.count = 50;
  const auto d = rollout(p, m, o);
  CHECK(std::equal(d.y_prime.begin(), d.y_prime.end(), a.y_prime.begin()));
}

TEST_CASE("recorded z traces match recomputation") {
  const auto m = model_with(stormwater::moment_matched_runoff());
  const auto g = small_grid(m);
  const auto sw = sweep(m, g);
  const std::array<double, 2> x0{3.5, 3.5};
  const auto p = synthesize_policy(x0, RiskLevel(0.005), sw, m, g);
  for (const bool reopt : {false, true}) {
    const auto batch = rollout(p, m, {200, 7, 2, reopt, true});
    for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
      const auto& tr = batch.trajectories[i];
      REQUIRE(tr.steps.size() == 20);
      double z = 0.0;
      for (const auto& st : tr.steps) {
        CHECK(st.z == z);
        CHECK(st.u >= 0.0);
        CHECK(st.u <= 1.0);
        z = m.z_update(z, st.x, st.u);
      }
      CHECK(tr.z_final == z);
      CHECK(batch.y_prime[i] == std::max(m.terminal_cost(tr.x_final), z));
    }
  }
}

TEST_CASE("degenerate runoff gives a constant outcome") {
  const auto m = model_with(ProbabilityMassFunction::point_mass(12.2));
  const auto g = small_grid(m);
  const auto sw = sweep(m, g);
  const std::array<double, 2> x0{4.0, 4.5};
  const auto p = synthesize_policy(x0, RiskLevel(0.1), sw, m, g);
  const auto batch = rollout(p, m, {300, 3, 2, false, false});
  for (const double y : batch.y_prime) CHECK(y == batch.y_prime.front());
  const auto est = estimate_risk(batch, RiskLevel(0.1), p.s_star, 0.0);
  CHECK(est.cvar_hat == batch.y_prime.front());
  CHECK(est.var_hat == batch.y_prime.front());
  CHECK(est.excess_std_err == 0.0);
}

TEST_CASE("always-safe start: s* = 0 and no cost") {
  const auto m = model_with(ProbabilityMassFunction::point_mass(1.0));
  const auto g = small_grid(m);
  const auto sw = sweep(m, g);
  const std::array<double, 2> x0{0.0, 0.0};
  const auto p = synthesize_policy(x0, RiskLevel(0.05), sw, m, g);
  CHECK(p.s_star == 0.0);
  CHECK(p.dp_value <= 1e-12);  // interpolation rounding near nodes
  for (const double y : rollout(p, m, {100, 1, 1, false, false}).y_prime) CHECK(y == m.g_lower());
}

TEST_CASE("risk estimates delegate to the CVaR core") {
  RolloutBatch batch;
  batch.y_prime = {0.0, 2.0, 0.0, 2.0};
  const auto est = estimate_risk(batch, RiskLevel(0.5), 1.0, 0.0);
  CHECK(est.cvar_hat == 2.0);
  CHECK(est.var_hat == 0.0);
  CHECK(est.mean == 1.0);
  CHECK(est.excess_hat == 0.5);
  CHECK(est.excess_std_err == doctest::Approx(std::sqrt(1.0 / 3.0 / 4.0)));
  CHECK_THROWS_AS(estimate_risk(RolloutBatch{}, RiskLevel(0.5), 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("Monte Carlo excess agrees with the DP value on a tiny instance") {
  const auto inst = random_instance(5);
  const TinyModel model(inst);
  const auto grid = exact_grid(inst);
  const auto sw = sweep(model, grid);
  const std::array<double, 1> x{0.0};
  const auto p = synthesize_policy(x, RiskLevel(0.25), sw, model, grid);
  const auto batch = rollout(p, model, {100000, 11, 2, false, false});
  const auto est = estimate_risk(batch, RiskLevel(0.25), p.s_star, 0.0);
  CHECK(std::abs(est.excess_hat - p.dp_value) <= 3.0 * est.excess_std_err + 1e-12);
}

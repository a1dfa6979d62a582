#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "cvarsafe/stormwater.hpp"
#include "support/reference.hpp"

using namespace cvarsafe;
using namespace cvarsafe::stormwater;

namespace {

const StormwaterParams kBase = StormwaterParams::for_design(Design::a);
const StormwaterParams kPump = StormwaterParams::for_design(Design::b);

double qpump(double x1, double x2, double u) {
  const std::array<double, 2> x{x1, x2};
  return q_pump(x, u, kPump);
}

double qvalve(double x1, double x2, double u) {
  const std::array<double, 2> x{x1, x2};
  return q_valve(x, u, kBase);
}

}  // namespace

TEST_CASE("signed distance g_K and costs") {
  const StormwaterModel m(kBase, moment_matched_runoff());
  const std::array<double, 2> a{3, 4}, b{5, 6}, c{4, 3}, d{3.5, 4};
  CHECK(g_k(a, kBase) == 0.0);
  CHECK(g_k(b, kBase) == 2.0);
  CHECK(g_k(c, kBase) == 1.0);
  CHECK(m.stage_cost(a, 0.3) == 0.0);
  CHECK(m.stage_cost(b, 0.7) == 2.0);
  CHECK(m.terminal_cost(b) == 2.0);
  CHECK(m.stage_cost(d, 1.0) == 0.5);
  CHECK(m.c_bar() == 2.0);
  CHECK(m.g_lower() == 0.0);
}

TEST_CASE("z update") {
  const StormwaterModel m(kBase, moment_matched_runoff());
  const std::array<double, 2> a{3, 4}, b{5, 6};
  CHECK(m.z_update(0.0, a, 0.0) == 0.0);
  CHECK(m.z_update(1.5, a, 0.0) == 1.5);
  CHECK(m.z_update(0.2, b, 0.0) == 2.0);
  CHECK(m.z_update(m.z_update(0.2, b, 0.0), b, 0.0) == 2.0);
}

TEST_CASE("storm outlet ramp") {
  CHECK(q_storm2(1.0, kBase) == 0.0);
  CHECK(q_storm2(0.5, kBase) == 0.0);
  CHECK(q_storm2(6.0, kBase) == doctest::Approx(3.8208952716685776).epsilon(1e-14));
  CHECK(q_storm2(3.5, kBase) == doctest::Approx(3.8208952716685776 / 2).epsilon(1e-14));
  CHECK(q_storm2(2.0, kBase) == doctest::Approx(0.7641790543337157).epsilon(1e-14));
  // Design c: same radius and elevation on tank 1, ramp up to kbar1.
  const auto pc = StormwaterParams::for_design(Design::c);
  CHECK(q_storm1(1.0, pc) == 0.0);
  CHECK(q_storm1(5.0, pc) == doctest::Approx(0.61 * M_PI / 9.0 * std::sqrt(2 * 32.2 * 4.0)));
}

TEST_CASE("combined sewer outlets") {
  CHECK(q_cso(3.0, 1, kBase) == 0.0);
  CHECK(q_cso(2.0, 1, kBase) == 0.0);
  CHECK(q_cso(5.0, 1, kBase) == doctest::Approx(4.0779219688111805).epsilon(1e-14));
  CHECK(q_cso(4.0, 1, kBase) == doctest::Approx(4.0779219688111805 / 2).epsilon(1e-14));
  CHECK(q_cso(4.0, 2, kBase) == 0.0);
  CHECK(q_cso(6.0, 2, kBase) == doctest::Approx(3.058441476608385).epsilon(1e-14));
}

TEST_CASE("valve") {
  CHECK(qvalve(4.0, 5.0, 0.0) == 0.0);
  CHECK(qvalve(1.0, 2.0, 1.0) == 0.0);
  CHECK(qvalve(3.0, 2.0, 1.0) == doctest::Approx(3.96155139653788).epsilon(1e-13));
  // Flow reverses when tank 2 is higher.
  CHECK(qvalve(1.0, 4.0, 1.0) < 0.0);
}

TEST_CASE("pump examples") {
  CHECK(qpump(3, 3, 1.0) == -10.0);
  CHECK(qpump(3, 0, 0.5) == 0.0);
  CHECK(qpump(1, 3, -1.0) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("pump closed form matches the case form on random samples") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> x1(0.0, 5.0), x2(0.0, 6.0), u(-1.0, 1.0);
  std::uniform_real_distribution<double> near(-0.2, 0.2);
  const auto& pp = *kPump.pump;
  for (int i = 0; i < 10000; ++i) {
    // Half the samples concentrate around the ramp.
    const double a = i % 2 ? x1(gen) : pp.z_p + near(gen);
    const double b = i % 4 < 2 ? x2(gen) : pp.z_p + near(gen);
    const double v = i % 10 == 0 ? 0.0 : u(gen);
    CHECK(std::abs(qpump(a, b, v) - ref::q_pump_cases(a, b, v, pp)) <= 1e-12);
  }
}

namespace {

// Left and right limits at b from linear extrapolation of two samples on each
// side. Exact up to rounding for functions that are linear on either side.
template <class F>
double limit_gap(F f, double b, double h = 1e-6) {
  const double right = 2.0 * f(b + h) - f(b + 2.0 * h);
  const double left = 2.0 * f(b - h) - f(b - 2.0 * h);
  return std::abs(right - left);
}

}  // namespace

TEST_CASE("piecewise-linear flows are continuous across branch boundaries") {
  const auto& pp = *kPump.pump;
  for (const double b : {pp.z_p - pp.eps, pp.z_p, pp.z_p + pp.eps}) {
    for (const double u : {-1.0, -0.3, 0.4, 1.0}) {
      CHECK(limit_gap([&](double v) { return qpump(v, 3.0, u); }, b) <= 1e-8);
      CHECK(limit_gap([&](double v) { return qpump(3.0, v, u); }, b) <= 1e-8);
      CHECK(limit_gap([&](double v) { return qpump(v, v, u); }, b) <= 1e-8);
    }
  }
  for (const double x : {0.0, 0.5, 1.0, 3.0})
    CHECK(limit_gap([&](double v) { return qpump(x, x + 1, v); }, 0.0) <= 1e-8);
  for (const auto [fn, knee, top] :
       {std::tuple{0, 1.0, 6.0}, std::tuple{1, 3.0, 5.0}, std::tuple{2, 4.0, 6.0}}) {
    auto f = [&](double v) { return fn == 0 ? q_storm2(v, kBase) : q_cso(v, fn, kBase); };
    CHECK(limit_gap(f, knee) <= 1e-8);
    CHECK(std::abs(f(top) - (2.0 * f(top - 1e-6) - f(top - 2e-6))) <= 1e-8);
  }
}

TEST_CASE("valve is continuous at zero head") {
  // Square-root cusp: the one-sided differences decay like sqrt(h).
  const double k = kBase.pi_tilde * kBase.r_v * kBase.r_v * std::sqrt(2.0 * kBase.g_tilde);
  for (const double h : {1e-6, 1e-8, 1e-10}) {
    CHECK(std::abs(qvalve(1.0 + h, 2.0, 1.0) - qvalve(1.0, 2.0, 1.0)) <= k * std::sqrt(h) * 1.0001);
    CHECK(std::abs(qvalve(1.0 - h, 2.0, 1.0) - qvalve(1.0, 2.0, 1.0)) == 0.0);
    CHECK(std::abs(qvalve(3.0, 4.0 + h, 1.0) - qvalve(3.0, 4.0, 1.0)) <= k * std::sqrt(h) * 1.0001);
  }
  for (const double x : {0.5, 2.0, 4.0})
    CHECK(std::abs(qvalve(x, x + 1.0, 1e-9) - qvalve(x, x + 1.0, 0.0)) <= 1e-8);
}

TEST_CASE("transition examples") {
  const StormwaterModel m(kBase, moment_matched_runoff());
  const std::array<double, 2> empty{0, 0}, mid{2, 2}, full{5, 6};
  const auto a = m.transition(empty, 0.0, 0.0);
  CHECK(a[0] == 0.0);
  CHECK(a[1] == 0.0);
  const auto b = m.transition(mid, 0.0, 12.2);
  CHECK(b[0] == doctest::Approx(2.0732).epsilon(1e-14));
  CHECK(b[1] == doctest::Approx(2.2058447770219933).epsilon(1e-14));
  CHECK(b[0] == doctest::Approx(2 + 12.2 / 30000 * 180).epsilon(1e-15));
  CHECK(b[1] == doctest::Approx(2 + (12.2 - q_storm2(2.0, kBase)) / 10000 * 180).epsilon(1e-15));
  const auto c = m.transition(full, 0.0, 1e5);
  CHECK(c[0] == 5.0);
  CHECK(c[1] == 6.0);
}

TEST_CASE("transitions stay in the state box for every design") {
  for (const auto d : {Design::a, Design::b, Design::c, Design::d}) {
    const StormwaterModel m(StormwaterParams::for_design(d), moment_matched_runoff());
    const auto box = m.state_bounds();
    const auto ub = m.action_bounds();
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j)
        for (int k = 0; k <= 10; ++k) {
          const std::array<double, 2> x{box[0].lo + (box[0].hi - box[0].lo) * i / 20.0,
                                        box[1].lo + (box[1].hi - box[1].lo) * j / 20.0};
          const double u = ub.lo + (ub.hi - ub.lo) * k / 10.0;
          for (const auto& w : m.disturbance(x, u).atoms()) {
            const auto n = m.transition(x, u, w.value);
            CHECK(box[0].contains(n[0]));
            CHECK(box[1].contains(n[1]));
          }
          const double c = m.stage_cost(x, u);
          CHECK(c >= 0.0);
          CHECK(c <= 2.0);
        }
  }
}

TEST_CASE("design differences") {
  const auto pb = StormwaterParams::for_design(Design::b);
  CHECK(pb.pump.has_value());
  const StormwaterModel mb(pb, moment_matched_runoff());
  CHECK(mb.action_bounds().lo == -1.0);
  CHECK(mb.action_bounds().hi == 1.0);
  const StormwaterModel ma(kBase, moment_matched_runoff());
  CHECK(ma.action_bounds().lo == 0.0);
  CHECK(StormwaterParams::for_design(Design::d).a2 == 12000.0);
  // Design c drains tank 1 above the outlet elevation; design a does not.
  const StormwaterModel mc(StormwaterParams::for_design(Design::c), moment_matched_runoff());
  const std::array<double, 2> x{2.5, 0.5};
  CHECK(mc.transition(x, 0.0, 0.0)[0] < ma.transition(x, 0.0, 0.0)[0]);
  CHECK(parse_design("c") == Design::c);
  CHECK_THROWS_AS(parse_design("e"), std::invalid_argument);
}

TEST_CASE("parameter validation names the field") {
  auto p = kBase;
  p.kbar1 = 2.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("kbar1"), std::invalid_argument);
  p = kBase;
  p.a2 = -1.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("a2"), std::invalid_argument);
  p = kBase;
  p.pump = PumpParams{};
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("pump"), std::invalid_argument);
  p = kPump;
  p.pump->eps = 2.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = kPump;
  p.pump.reset();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("runoff laws") {
  const auto mm = moment_matched_runoff();
  const TargetMoments target;
  CHECK(mm.size() == 9);
  CHECK(std::abs(mm.mean() - target.mean) / target.mean <= 0.02);
  CHECK(std::abs(mm.variance() - target.variance) / target.variance <= 0.02);
  CHECK(std::abs(mm.skewness() - target.skew) / target.skew <= 0.02);
  CHECK(mm.min_value() >= 0.0);

  const auto sm = smoke_runoff();
  REQUIRE(sm.size() == 2);
  CHECK(sm.atoms()[0].value == doctest::Approx(9.053573455489545).epsilon(1e-14));
  CHECK(sm.atoms()[1].value == doctest::Approx(15.346426544510454).epsilon(1e-14));
  CHECK(sm.mean() == doctest::Approx(12.2));
  CHECK(sm.variance() == doctest::Approx(9.9));
}

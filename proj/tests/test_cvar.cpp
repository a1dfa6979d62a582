#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cvarsafe/cvar.hpp"
#include "support/reference.hpp"

using namespace cvarsafe;
using Pmf = ProbabilityMassFunction;

namespace {

Pmf two_point() { return Pmf::from_atoms({{0.0, 0.5}, {2.0, 0.5}}); }
Pmf four_point() { return Pmf::from_atoms({{1, 0.25}, {2, 0.25}, {3, 0.25}, {4, 0.25}}); }

Pmf random_pmf(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> n(1, 32);
  std::uniform_real_distribution<double> val(-5.0, 5.0), mass(0.01, 1.0);
  std::vector<Pmf::Atom> atoms(static_cast<std::size_t>(n(gen)));
  double total = 0.0;
  for (auto& a : atoms) {
    a = {val(gen), mass(gen)};
    total += a.prob;
  }
  for (auto& a : atoms) a.prob /= total;
  return Pmf::from_atoms(atoms);
}

}  // namespace

TEST_CASE("pmf construction sorts, merges and validates") {
  const auto p = Pmf::from_atoms({{3, 0.25}, {1, 0.25}, {3, 0.5}});
  REQUIRE(p.size() == 2);
  CHECK(p.atoms()[0].value == 1.0);
  CHECK(p.atoms()[1].prob == 0.75);
  CHECK_THROWS_AS(Pmf::from_atoms({}), std::invalid_argument);
  CHECK_THROWS_AS(Pmf::from_atoms({{0, -0.1}, {1, 1.1}}), std::invalid_argument);
  CHECK_THROWS_AS(Pmf::from_atoms({{0, 0.5}, {1, 0.4}}), std::invalid_argument);
  CHECK_THROWS_AS(Pmf::from_atoms({{NAN, 1.0}}), std::invalid_argument);
  CHECK(Pmf::point_mass(2.5).mean() == 2.5);
  const std::vector<double> samples{1, 1, 2, 4};
  const auto e = Pmf::empirical(samples);
  CHECK(e.size() == 3);
  CHECK(e.mean() == doctest::Approx(2.0));
}

TEST_CASE("pmf inverse-CDF sampling") {
  const auto p = four_point();
  CHECK(p.sample(0.0) == 1.0);
  CHECK(p.sample(0.2499) == 1.0);
  CHECK(p.sample(0.25) == 2.0);
  CHECK(p.sample(0.9999999) == 4.0);
}

TEST_CASE("risk level domain") {
  CHECK_THROWS_AS(RiskLevel(0.0), std::domain_error);
  CHECK_THROWS_AS(RiskLevel(1.5), std::domain_error);
  CHECK_THROWS_AS(RiskLevel(-0.1), std::domain_error);
  CHECK(RiskLevel(1.0).value() == 1.0);
}

TEST_CASE("value at risk examples") {
  CHECK(value_at_risk(two_point(), RiskLevel(0.5)) == 0.0);
  CHECK(value_at_risk(Pmf::point_mass(7.0), RiskLevel(0.3)) == 7.0);
  CHECK(value_at_risk(four_point(), RiskLevel(0.25)) == 3.0);
  CHECK(value_at_risk(four_point(), RiskLevel(1.0)) == 1.0);
}

TEST_CASE("expected excess examples") {
  CHECK(expected_excess(two_point(), 1.0) == 0.5);
  CHECK(expected_excess(four_point(), 4.0) == 0.0);
  CHECK(expected_excess(four_point(), 10.0) == 0.0);
  CHECK(expected_excess(four_point(), 0.0) == 2.5);
}

TEST_CASE("dual form examples") {
  const std::vector<double> grid{0, 1, 2};
  const auto r = cvar_dual(two_point(), RiskLevel(0.5), grid);
  CHECK(r.value == 2.0);
  CHECK(r.s_star == 0.0);

  const auto m = cvar_dual(four_point(), RiskLevel(1.0));
  CHECK(m.value == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(m.s_star == 1.0);

  const auto d = cvar_dual(Pmf::point_mass(1.25), RiskLevel(0.1));
  CHECK(d.value == 1.25);
  CHECK(d.s_star == 1.25);

  CHECK_THROWS_AS(cvar_dual(two_point(), RiskLevel(0.5), std::span<const double>{}),
                  std::domain_error);
}

TEST_CASE("tail form examples") {
  CHECK(cvar_tail(two_point(), RiskLevel(0.5)) == 2.0);
  CHECK(cvar_tail(four_point(), RiskLevel(0.5)) == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(cvar_tail(Pmf::point_mass(3.0), RiskLevel(0.5)) == 3.0);
  CHECK_THROWS_AS(cvar_tail(two_point(), RiskLevel(1.0)), std::domain_error);
}

TEST_CASE("random pmfs: dual, tail and quantile forms agree") {
  std::mt19937_64 gen(20240601);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_pmf(gen);
    std::vector<std::pair<double, double>> raw;
    for (const auto& a : p.atoms()) raw.emplace_back(a.value, a.prob);
    double prev = -INFINITY;
    for (const double a : {1.0, 0.99, 0.5, 0.25, 0.05}) {
      const RiskLevel alpha(a);
      const double dual = cvar_dual(p, alpha).value;
      if (a < 1.0) CHECK(std::abs(dual - cvar_tail(p, alpha)) <= 1e-10);
      else CHECK(std::abs(dual - p.mean()) <= 1e-10);
      CHECK(std::abs(dual - ref::cvar_by_quantile(raw, a)) <= 1e-10);
      CHECK(dual >= p.mean() - 1e-12);
      CHECK(dual <= p.max_value() + 1e-12);
      CHECK(dual >= prev - 1e-12);
      prev = dual;
    }
  }
}

TEST_CASE("translation equivariance and Lipschitz bound of the dual objective") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> shift(-10.0, 10.0), sdist(-6.0, 6.0), step(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_pmf(gen);
    const double a = shift(gen);
    for (const double al : {0.05, 0.5, 0.99}) {
      const RiskLevel alpha(al);
      CHECK(std::abs(cvar_dual(p.shifted(a), alpha).value - (cvar_dual(p, alpha).value + a)) <=
            1e-10);
      const double s = sdist(gen);
      const double d = step(gen);
      const double gap = std::abs(dual_objective(p, alpha, s + d) - dual_objective(p, alpha, s));
      CHECK(gap <= d * (1.0 + al) / al + 1e-12);
    }
  }
}

TEST_CASE("dual objective boundary behavior") {
  const auto p = four_point();
  const RiskLevel alpha(0.25);
  CHECK(dual_objective(p, alpha, 4.0) == 4.0);
  CHECK(dual_objective(p, alpha, 6.0) == 6.0);
  // Below the support: (mean - (1 - alpha) s) / alpha.
  CHECK(dual_objective(p, alpha, -1.0) == doctest::Approx((2.5 - 0.75 * -1.0) / 0.25));
}

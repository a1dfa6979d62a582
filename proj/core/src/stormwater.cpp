#include "cvarsafe/stormwater.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cvarsafe::stormwater {

Design parse_design(std::string_view name) {
  if (name == "a") return Design::a;
  if (name == "b") return Design::b;
  if (name == "c") return Design::c;
  if (name == "d") return Design::d;
  throw std::invalid_argument("unknown design '" + std::string(name) + "' (expected a, b, c or d)");
}

std::string_view design_name(Design design) {
  switch (design) {
    case Design::a: return "a";
    case Design::b: return "b";
    case Design::c: return "c";
    case Design::d: return "d";
  }
  return "?";
}

StormwaterParams StormwaterParams::for_design(Design design) {
  StormwaterParams p;
  p.design = design;
  if (design == Design::b) p.pump = PumpParams{};
  if (design == Design::d) p.a2 = 12000.0;
  return p;
}

void StormwaterParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("stormwater.") + name + ": must be > 0");
  };
  positive(a1, "a1");
  positive(a2, "a2");
  positive(c_d, "c_d");
  positive(g_tilde, "g_tilde");
  positive(pi_tilde, "pi_tilde");
  positive(k1, "k1");
  positive(k2, "k2");
  positive(r_s, "r_s");
  positive(r_v, "r_v");
  positive(dt, "dt");
  positive(z1, "z1");
  positive(z1_in, "z1_in");
  positive(z2, "z2");
  positive(n_cso1, "n_cso1");
  positive(n_cso2, "n_cso2");
  positive(r_cso1, "r_cso1");
  positive(r_cso2, "r_cso2");
  if (!(kbar1 > k1)) throw std::invalid_argument("stormwater.kbar1: must exceed k1");
  if (!(kbar2 > k2)) throw std::invalid_argument("stormwater.kbar2: must exceed k2");
  if (!(z2 < kbar2)) throw std::invalid_argument("stormwater.z2: must be below kbar2");
  if (design == Design::c && !(z2 < kbar1))
    throw std::invalid_argument("stormwater.z2: design c needs z2 below kbar1");
  if (g_lower > 0.0)
    throw std::invalid_argument("stormwater.g_lower: must not exceed min g_K = 0");
  if (horizon < 1) throw std::invalid_argument("stormwater.horizon: must be >= 1");
  if (design == Design::b && !pump)
    throw std::invalid_argument("stormwater.pump: design b requires pump parameters");
  if (design != Design::b && pump)
    throw std::invalid_argument("stormwater.pump: pump requested on non-pump design " +
                                std::string(design_name(design)));
  if (pump) {
    positive(pump->q_pump_max, "pump.q_pump_max");
    positive(pump->eps, "pump.eps");
    positive(pump->z_p, "pump.z_p");
    if (!(pump->z_p - pump->eps > 0.0))
      throw std::invalid_argument("stormwater.pump: z_p - eps must be > 0");
  }
}

ProbabilityMassFunction moment_matched_runoff() {
  // Max-entropy fit on a uniform 2.25 cfs grid under the three moment
  // constraints, rounded to 1e-6.
  return ProbabilityMassFunction::from_atoms({
      {6.00, 0.024816},
      {8.25, 0.143527},
      {10.50, 0.297697},
      {12.75, 0.280936},
      {15.00, 0.153030},
      {17.25, 0.061042},
      {19.50, 0.022620},
      {21.75, 0.009880},
      {24.00, 0.006452},
  });
}

ProbabilityMassFunction smoke_runoff() {
  const TargetMoments m;
  const double sd = std::sqrt(m.variance);
  return ProbabilityMassFunction::from_atoms({{m.mean - sd, 0.5}, {m.mean + sd, 0.5}});
}

double g_k(std::span<const double> x, const StormwaterParams& p) {
  return std::max({x[0] - p.k1, x[1] - p.k2, 0.0});
}

double ramp_peak(double radius, double count, double outlet_z, double top,
                 const StormwaterParams& p) {
  return count * p.c_d * p.pi_tilde * radius * radius * std::sqrt(2.0 * p.g_tilde * (top - outlet_z));
}

double ramp_outflow(double level, double outlet_z, double top, double peak) {
  const double span = top - outlet_z;
  return peak - (peak / span) * std::min(top - level, span);
}

double q_storm2(double x2, const StormwaterParams& p) {
  return ramp_outflow(x2, p.z2, p.kbar2, ramp_peak(p.r_s, 1.0, p.z2, p.kbar2, p));
}

double q_storm1(double x1, const StormwaterParams& p) {
  return ramp_outflow(x1, p.z2, p.kbar1, ramp_peak(p.r_s, 1.0, p.z2, p.kbar1, p));
}

double q_cso(double level, int tank, const StormwaterParams& p) {
  if (tank == 1)
    return ramp_outflow(level, p.k1, p.kbar1, ramp_peak(p.r_cso1, p.n_cso1, p.k1, p.kbar1, p));
  if (tank == 2)
    return ramp_outflow(level, p.k2, p.kbar2, ramp_peak(p.r_cso2, p.n_cso2, p.k2, p.kbar2, p));
  throw std::invalid_argument("q_cso: tank must be 1 or 2");
}

double q_valve(std::span<const double> x, double u, const StormwaterParams& p) {
  const double h = std::max(x[0] - p.z1, 0.0) - std::max(x[1] - p.z1_in, 0.0);
  if (h == 0.0) return 0.0;
  const double sign = h > 0.0 ? 1.0 : -1.0;
  return u * p.pi_tilde * p.r_v * p.r_v * sign * std::sqrt(2.0 * p.g_tilde * std::abs(h));
}

double q_pump(std::span<const double> x, double u, const StormwaterParams& p) {
  if (!p.pump) throw std::invalid_argument("q_pump: model has no pump");
  const auto& pump = *p.pump;
  auto nu = [&](double y) { return std::max(0.0, std::min(y, 2.0 * pump.eps)); };
  const double y1 = x[0] + pump.eps - pump.z_p;
  const double y2 = x[1] + pump.eps - pump.z_p;
  return (-pump.q_pump_max / (2.0 * pump.eps)) *
         (std::min(0.0, u) * nu(y1) + std::max(0.0, u) * nu(y2));
}

StormwaterModel::StormwaterModel(StormwaterParams params, ProbabilityMassFunction runoff)
    : params_(std::move(params)), runoff_(std::move(runoff)) {
  params_.validate();
  bounds_ = {Interval{0.0, params_.kbar1}, Interval{0.0, params_.kbar2}};
}

Interval StormwaterModel::action_bounds() const {
  return params_.design == Design::b ? Interval{-1.0, 1.0} : Interval{0.0, 1.0};
}

void StormwaterModel::transition(std::span<const double> x, double u, double w,
                                 std::span<double> next) const {
  const auto& p = params_;
  const double exchange = p.design == Design::b ? q_pump(x, u, p) : q_valve(x, u, p);
  double inflow1 = w - q_cso(x[0], 1, p) - exchange;
  if (p.design == Design::c) inflow1 -= q_storm1(x[0], p);
  const double inflow2 = w - q_cso(x[1], 2, p) + exchange - q_storm2(x[1], p);
  next[0] = std::clamp(x[0] + inflow1 / p.a1 * p.dt, 0.0, p.kbar1);
  next[1] = std::clamp(x[1] + inflow2 / p.a2 * p.dt, 0.0, p.kbar2);
}

double StormwaterModel::stage_cost(std::span<const double> x, double /*u*/) const {
  return g_k(x, params_) - params_.g_lower;
}

double StormwaterModel::terminal_cost(std::span<const double> x) const {
  return g_k(x, params_) - params_.g_lower;
}

const ProbabilityMassFunction& StormwaterModel::disturbance(std::span<const double>,
                                                            double) const {
  return runoff_;
}

double StormwaterModel::c_bar() const {
  return std::max(params_.kbar1 - params_.k1, params_.kbar2 - params_.k2) - params_.g_lower;
}

}  // namespace cvarsafe::stormwater

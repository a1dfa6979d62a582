#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cvarsafe/system_model.hpp"

namespace cvarsafe::stormwater {

/// a: baseline, b: valve replaced by a bidirectional pump, c: tank 1 gets a
/// storm-sewer outlet, d: tank 2 surface area increased to 12000 ft^2.
enum class Design { a, b, c, d };

Design parse_design(std::string_view name);
std::string_view design_name(Design design);

struct PumpParams {
  double q_pump_max = 10.0;  // cfs
  double eps = 1.0 / 12.0;   // ft
  double z_p = 1.0;          // ft
};

/// Two-tank model parameters. Lengths in ft, areas in ft^2, time in s.
struct StormwaterParams {
  Design design = Design::a;
  double a1 = 30000.0;
  double a2 = 10000.0;
  double c_d = 0.61;
  double g_tilde = 32.2;
  double pi_tilde = 3.14159265358979323846;
  double k1 = 3.0;
  double k2 = 4.0;
  double kbar1 = 5.0;
  double kbar2 = 6.0;
  double r_s = 1.0 / 3.0;
  double r_v = 1.0 / 3.0;
  double dt = 180.0;
  double z1 = 1.0;
  double z1_in = 2.0;
  double z2 = 1.0;
  double n_cso1 = 3.0;
  double n_cso2 = 1.0;
  double r_cso1 = 0.25;
  double r_cso2 = 0.375;
  double g_lower = 0.0;
  int horizon = 20;
  std::optional<PumpParams> pump;

  /// Table defaults adjusted for the given design.
  static StormwaterParams for_design(Design design);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Moments published for the surface-runoff law.
struct TargetMoments {
  double mean = 12.2;
  double variance = 9.9;
  double skew = 0.74;
};

/// 9-atom runoff pmf (cfs) matching TargetMoments within 2%.
ProbabilityMassFunction moment_matched_runoff();
/// Two equally likely atoms at mean +- standard deviation.
ProbabilityMassFunction smoke_runoff();

double g_k(std::span<const double> x, const StormwaterParams& p);

/// Peak outflow of a linear-ramp outlet between `outlet_z` and `top`.
double ramp_peak(double radius, double count, double outlet_z, double top,
                 const StormwaterParams& p);
/// Linear-ramp outflow: zero at or below `outlet_z`, `peak` at `top`.
double ramp_outflow(double level, double outlet_z, double top, double peak);

double q_storm2(double x2, const StormwaterParams& p);
/// Tank 1 storm outlet of design c. Same radius and elevation as tank 2's.
double q_storm1(double x1, const StormwaterParams& p);
/// Combined-sewer outflow of tank 1 (`tank` = 1) or tank 2 (`tank` = 2).
double q_cso(double level, int tank, const StormwaterParams& p);
double q_valve(std::span<const double> x, double u, const StormwaterParams& p);
/// Closed min/max form of the pump flow. Requires p.pump.
double q_pump(std::span<const double> x, double u, const StormwaterParams& p);

class StormwaterModel final : public SystemModel {
 public:
  StormwaterModel(StormwaterParams params, ProbabilityMassFunction runoff);

  const StormwaterParams& params() const { return params_; }

  std::size_t state_dim() const override { return 2; }
  std::span<const Interval> state_bounds() const override { return bounds_; }
  Interval action_bounds() const override;
  int horizon() const override { return params_.horizon; }
  void transition(std::span<const double> x, double u, double w,
                  std::span<double> next) const override;
  double stage_cost(std::span<const double> x, double u) const override;
  double terminal_cost(std::span<const double> x) const override;
  const ProbabilityMassFunction& disturbance(std::span<const double> x,
                                             double u) const override;
  double c_bar() const override;
  double g_lower() const override { return params_.g_lower; }

  using SystemModel::transition;

 private:
  StormwaterParams params_;
  ProbabilityMassFunction runoff_;
  std::array<Interval, 2> bounds_;
};

}  // namespace cvarsafe::stormwater

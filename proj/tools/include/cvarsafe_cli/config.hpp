#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvarsafe/grid.hpp"
#include "cvarsafe/pmf.hpp"
#include "cvarsafe/stormwater.hpp"
#include "cvarsafe/system_model.hpp"

namespace cvarsafe::cli {

/// Validation failure; the message starts with the offending field path,
/// e.g. "grid.x[1]: must be >= 2".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  /// "stormwater" or "tiny".
  std::string kind = "stormwater";
  stormwater::Design design = stormwater::Design::a;
  /// Table I/II overrides by field name ("a1", "k2", "horizon", ...).
  nlohmann::json param_overrides = nlohmann::json::object();
  nlohmann::json pump_overrides = nlohmann::json::object();
  /// "moment_matched", "smoke" or "custom".
  std::string disturbance = "moment_matched";
  std::vector<ProbabilityMassFunction::Atom> custom_atoms;
  /// Instance file for kind == "tiny".
  std::string tiny_path;

  /// Defaults plus overrides, then the design change: b adds the pump,
  /// c adds the tank 1 storm outlet, d scales a2 by 1.2.
  stormwater::StormwaterParams params_for(stormwater::Design design) const;
  ProbabilityMassFunction runoff() const;
};

struct GridConfig {
  std::vector<std::size_t> x{25, 25};
  std::size_t z = 11;
  std::size_t action = 11;
  std::size_t s = 21;
};

struct DeployConfig {
  std::vector<double> x0;
  double alpha = 0.05;
  std::size_t rollouts = 10000;
  /// Trajectories written to rollouts.csv; statistics use every rollout.
  std::size_t export_limit = 1000;
};

struct RunConfig {
  ModelConfig model;
  GridConfig grid;
  std::vector<double> alpha{0.99, 0.05, 0.005, 0.0005, 0.00005};
  std::vector<double> r{0.2, 1.0, 1.8};
  std::vector<std::string> designs{"a", "b", "c", "d"};
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string output = "out";
  bool reoptimize = false;
  bool persist_tables = false;
  DeployConfig deploy;

  /// Canonical JSON of every setting that affects artifact contents
  /// (threads and output directory excluded).
  nlohmann::json resolved() const;
  /// 16 hex digits of FNV-1a 64 over resolved().dump().
  std::string hash() const;
};

/// Defaults reproduce the baseline design; any subset of keys may be given.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Checks cross-field constraints (alpha in (0, 1], r within [g_lower,
/// g_upper], grid counts, x0 in bounds). Throws ConfigError.
void validate(const RunConfig& config);

/// Model and grid built from the configuration. Tiny instances use their
/// exact grid; `design` overrides the configured stormwater design.
struct BuiltProblem {
  std::unique_ptr<SystemModel> model;
  AugmentedGrid grid;
};
BuiltProblem build_problem(const RunConfig& config);
BuiltProblem build_problem(const RunConfig& config, stormwater::Design design);

}  // namespace cvarsafe::cli

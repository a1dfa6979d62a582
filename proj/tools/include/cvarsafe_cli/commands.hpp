#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvarsafe/risk_solver.hpp"
#include "cvarsafe_cli/config.hpp"

namespace cvarsafe::cli {

/// Raised for missing or malformed artifact files.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every command writes its artifacts under `config.output` and progress to
/// `log`. The return value is the process exit code.

/// sweep.csv (one row per s, one column per x node) and sweep_meta.json.
int cmd_sweep(const RunConfig& config, std::ostream& log);

/// surface_alpha=<a>.csv, mask_alpha=<a>_r=<r>.csv and summary.json from the
/// sweep stored in `sweep_dir`.
int cmd_safe_sets(const RunConfig& config, const std::filesystem::path& sweep_dir,
                  std::ostream& log);

/// deploy_summary.json and rollouts.csv for the policy at deploy.x0. Reuses
/// the sweep in the output directory when it matches the configuration.
int cmd_deploy(const RunConfig& config, std::ostream& log);

struct OracleOptions {
  std::vector<double> alphas{1.0, 0.75, 0.5, 0.25, 0.1, 0.05};
  double tolerance = 1e-9;
  /// Per-(x0, alpha) policy count above which generated instances are skipped.
  std::size_t budget = 20000;
};

/// Checks every *.tiny file in `corpus_dir` against brute-force enumeration.
/// Exit code 0 on success (and on an empty corpus), 1 on a mismatch, 2 on a
/// parse error.
int cmd_oracle(const std::filesystem::path& corpus_dir, const RunConfig& config,
               const OracleOptions& options, std::ostream& log);

/// Writes `count` random instances that fit the enumeration budget into
/// `corpus_dir` as instance_<k>.tiny. Returns the seeds that were kept.
std::vector<std::uint64_t> generate_corpus(const std::filesystem::path& corpus_dir,
                                           std::size_t count, std::uint64_t seed,
                                           const OracleOptions& options);

/// Sweeps each configured design and tabulates safe-set counts with the
/// relative change against design a (compare.csv, compare_summary.json).
int cmd_compare_designs(const RunConfig& config, std::ostream& log);

// Artifact helpers shared with the tests.

/// Hash of the settings that determine the sweep (model and grid).
std::string sweep_hash(const RunConfig& config);
void write_sweep(const std::filesystem::path& dir, const RunConfig& config,
                 const AugmentedGrid& grid, const DualSweep& sweep);
/// Throws ArtifactError when the files are missing, malformed or were
/// produced for a different model or grid.
DualSweep read_sweep(const std::filesystem::path& dir, const RunConfig& config,
                     const AugmentedGrid& grid);

/// "%g" rendering used in artifact file names.
std::string format_label(double v);

}  // namespace cvarsafe::cli

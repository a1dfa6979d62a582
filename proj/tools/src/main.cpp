#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cvarsafe/tiny_instance.hpp"
#include "cvarsafe_cli/commands.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::vector<double> alpha;
  std::vector<double> r;
  std::vector<double> x0;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration (defaults if omitted)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Rollout seed");
}

cvarsafe::cli::RunConfig resolve(const Overrides& o, bool deploy) {
  auto cfg = o.config_path.empty() ? cvarsafe::cli::parse_config(nlohmann::json::object())
                                   : cvarsafe::cli::load_config(o.config_path);
  if (o.out) cfg.output = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.alpha.empty()) {
    if (deploy) {
      if (o.alpha.size() != 1) throw cvarsafe::cli::ConfigError("--alpha: deploy takes one value");
      cfg.deploy.alpha = o.alpha.front();
    } else {
      cfg.alpha = o.alpha;
    }
  }
  if (!o.r.empty()) cfg.r = o.r;
  if (!o.x0.empty()) cfg.deploy.x0 = o.x0;
  cvarsafe::cli::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive safe sets via CVaR state augmentation"};
  app.require_subcommand(1);
  Overrides o;

  auto* sweep = app.add_subcommand("sweep", "Solve V^s for every s on the dual axis");
  add_common(sweep, o);

  std::string sweep_dir;
  auto* safe = app.add_subcommand("safe-sets", "Risk surfaces and safe-set masks from a sweep");
  add_common(safe, o);
  safe->add_option("--alpha", o.alpha, "Risk levels (replaces the configured list)");
  safe->add_option("--r", o.r, "Thresholds (replaces the configured list)");
  safe->add_option("--sweep", sweep_dir, "Directory holding sweep.csv (default: --out)");

  auto* deploy = app.add_subcommand("deploy", "Synthesize the policy at x0 and simulate it");
  add_common(deploy, o);
  deploy->add_option("--alpha", o.alpha, "Risk level")->expected(1);
  deploy->add_option("--x0", o.x0, "Initial state");
  std::optional<std::size_t> rollouts;
  deploy->add_option("--rollouts", rollouts, "Number of rollouts");

  std::string corpus;
  std::size_t generate = 0;
  std::uint64_t corpus_seed = 1;
  auto* oracle = app.add_subcommand("oracle", "Check the solver against brute-force enumeration");
  add_common(oracle, o);
  oracle->add_option("corpus", corpus, "Directory of *.tiny instances")->required();
  oracle->add_option("--generate", generate, "Write this many random instances first");
  oracle->add_option("--corpus-seed", corpus_seed, "First generator seed for --generate");

  auto* compare = app.add_subcommand("compare-designs", "Safe-set counts across designs");
  add_common(compare, o);
  compare->add_option("--alpha", o.alpha, "Risk levels");
  compare->add_option("--r", o.r, "Thresholds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return cvarsafe::cli::cmd_sweep(resolve(o, false), std::cout);
    if (safe->parsed()) {
      const auto cfg = resolve(o, false);
      return cvarsafe::cli::cmd_safe_sets(cfg, sweep_dir.empty() ? cfg.output : sweep_dir, std::cout);
    }
    if (deploy->parsed()) {
      auto cfg = resolve(o, true);
      if (rollouts) cfg.deploy.rollouts = *rollouts;
      return cvarsafe::cli::cmd_deploy(cfg, std::cout);
    }
    if (oracle->parsed()) {
      const auto cfg = resolve(o, false);
      const cvarsafe::cli::OracleOptions opts;
      if (generate > 0) {
        const auto seeds = cvarsafe::cli::generate_corpus(corpus, generate, corpus_seed, opts);
        std::cout << "oracle: generated " << seeds.size() << " instances (seeds " << seeds.front()
                  << ".." << seeds.back() << ")\n";
      }
      return cvarsafe::cli::cmd_oracle(corpus, cfg, opts, std::cout);
    }
    if (compare->parsed()) return cvarsafe::cli::cmd_compare_designs(resolve(o, false), std::cout);
  } catch (const cvarsafe::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cvarsafe::cli::ArtifactError& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return 3;
  } catch (const cvarsafe::InstanceParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

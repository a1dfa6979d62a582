#include "cvarsafe_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cvarsafe/oracle.hpp"
#include "cvarsafe/policy_runtime.hpp"
#include "cvarsafe/table_io.hpp"
#include "cvarsafe/tiny_instance.hpp"
#include "cvarsafe/value_iteration.hpp"

namespace cvarsafe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

class WallClock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw ArtifactError(path.string() + ": write failed");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError(path.string() + ": cannot open (run `sweep` first?)");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string hash_line(const RunConfig& config) { return "# config_hash=" + config.hash() + "\n"; }

// Column names x1..xd.
std::string state_header(std::size_t dim) {
  std::string h;
  for (std::size_t d = 0; d < dim; ++d) h += (d ? ",x" : "x") + std::to_string(d + 1);
  return h;
}

std::string state_cells(std::span<const double> x) {
  std::string s;
  for (std::size_t d = 0; d < x.size(); ++d) s += (d ? "," : "") + format_double(x[d]);
  return s;
}

json axis_json(const Axis& axis) {
  return json(std::vector<double>(axis.nodes().begin(), axis.nodes().end()));
}

}  // namespace

std::string format_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string sweep_hash(const RunConfig& config) {
  RunConfig probe;
  probe.model = config.model;
  probe.grid = config.grid;
  json doc = probe.resolved();
  doc = {{"model", doc["model"]}, {"grid", doc["grid"]}};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_sweep(const fs::path& dir, const RunConfig& config, const AugmentedGrid& grid,
                 const DualSweep& sweep) {
  fs::create_directories(dir);
  std::ostringstream csv;
  csv << hash_line(config) << "s";
  for (std::size_t ix = 0; ix < sweep.x_count(); ++ix) csv << ",n" << ix;
  csv << "\n";
  for (std::size_t k = 0; k < sweep.s_values.size(); ++k) {
    csv << format_double(sweep.s_values[k]);
    for (const double v : sweep.v0[k]) csv << "," << format_double(v);
    csv << "\n";
  }
  write_text(dir / "sweep.csv", csv.str());

  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["config_hash"] = config.hash();
  meta["sweep_hash"] = sweep_hash(config);
  meta["g_lower"] = sweep.g_lower;
  meta["c_bar"] = sweep.c_bar;
  json axes = json::array();
  for (const auto& a : grid.x_axes) axes.push_back(axis_json(a));
  meta["grid"] = {{"x", axes},
                  {"z", axis_json(grid.z_axis)},
                  {"action", axis_json(grid.action_axis)},
                  {"s", axis_json(grid.s_axis)}};
  meta["columns"] = "n<k> is the flat x node index, last state coordinate fastest";
  write_json(dir / "sweep_meta.json", meta);
}

DualSweep read_sweep(const fs::path& dir, const RunConfig& config, const AugmentedGrid& grid) {
  const auto meta_path = dir / "sweep_meta.json";
  json meta;
  try {
    meta = json::parse(read_text(meta_path));
  } catch (const json::exception& e) {
    throw ArtifactError(meta_path.string() + ": " + e.what());
  }
  if (meta.value("sweep_hash", std::string{}) != sweep_hash(config))
    throw ArtifactError(meta_path.string() +
                        ": sweep was computed for a different model or grid; rerun `sweep`");

  const auto csv_path = dir / "sweep.csv";
  std::istringstream in(read_text(csv_path));
  DualSweep sw;
  sw.g_lower = meta.at("g_lower").get<double>();
  sw.c_bar = meta.at("c_bar").get<double>();
  std::string line;
  std::size_t line_no = 0;
  const std::size_t nx = grid.x_count();
  auto bad = [&](const std::string& what) {
    throw ArtifactError(csv_path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line[0] == 's') continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      const std::string cell = line.substr(pos, end - pos);
      char* stop = nullptr;
      const double v = std::strtod(cell.c_str(), &stop);
      if (cell.empty() || *stop != '\0') bad("malformed number '" + cell + "'");
      row.push_back(v);
      pos = end + 1;
    }
    if (row.size() != nx + 1) bad("expected " + std::to_string(nx + 1) + " columns");
    sw.s_values.push_back(row[0]);
    sw.v0.emplace_back(row.begin() + 1, row.end());
  }
  if (sw.s_values.size() != grid.s_axis.size())
    throw ArtifactError(csv_path.string() + ": expected " + std::to_string(grid.s_axis.size()) +
                        " s rows, found " + std::to_string(sw.s_values.size()));
  return sw;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  const WallClock clock;
  const auto problem = build_problem(config);
  problem.grid.validate(*problem.model);
  const fs::path out_dir(config.output);

  SweepOptions opts;
  opts.threads = config.threads;
  const std::size_t ns = problem.grid.s_axis.size();
  opts.progress = [&](std::size_t k, double s) {
    log << "sweep: s[" << k + 1 << "/" << ns << "] = " << format_double(s) << " done\n"
        << std::flush;
  };
  const auto sw = sweep(*problem.model, problem.grid, opts);
  write_sweep(out_dir, config, problem.grid, sw);

  if (config.persist_tables) {
    const fs::path tables = out_dir / "tables";
    fs::create_directories(tables);
    const TransitionCache cache(*problem.model, problem.grid);
    for (std::size_t k = 0; k < ns; ++k) {
      const double s = problem.grid.s_axis[k];
      const auto sol = value_iteration(s, *problem.model, problem.grid, cache, {config.threads});
      std::ostringstream v, p;
      write_value_table(v, problem.grid, sol.values);
      write_policy_table(p, problem.grid, sol.policy);
      write_text(tables / ("value_s=" + std::to_string(k) + ".csv"), v.str());
      write_text(tables / ("policy_s=" + std::to_string(k) + ".csv"), p.str());
    }
  }
  log << "sweep: wrote " << (out_dir / "sweep.csv").string() << " (" << ns << " x "
      << problem.grid.x_count() << ")\n";
  log << "wall time: " << clock.seconds() << " s\n";
  return 0;
}

int cmd_safe_sets(const RunConfig& config, const fs::path& sweep_dir, std::ostream& log) {
  const WallClock clock;
  const auto problem = build_problem(config);
  const auto sw = read_sweep(sweep_dir, config, problem.grid);
  const fs::path out_dir(config.output);
  fs::create_directories(out_dir);
  const std::size_t nx = problem.grid.x_count();
  const std::size_t dim = problem.grid.state_dim();
  const double g_upper = sw.g_lower + sw.c_bar;

  json counts = json::array();
  for (const double a : config.alpha) {
    const auto surface = risk_value(sw, RiskLevel(a));
    std::ostringstream csv;
    csv << hash_line(config) << state_header(dim) << ",v_star,w_star,s_star\n";
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const auto x = problem.grid.x_node(ix);
      csv << state_cells(x) << "," << format_double(surface.v_star[ix]) << ","
          << format_double(surface.w_star[ix]) << "," << format_double(surface.s_star[ix]) << "\n";
    }
    write_text(out_dir / ("surface_alpha=" + format_label(a) + ".csv"), csv.str());

    for (const double r : config.r) {
      const auto mask = extract_safe_set(surface, r);
      std::ostringstream m;
      m << hash_line(config) << state_header(dim) << ",in_set\n";
      for (std::size_t ix = 0; ix < nx; ++ix)
        m << state_cells(problem.grid.x_node(ix)) << "," << int(mask.inside[ix]) << "\n";
      write_text(out_dir / ("mask_alpha=" + format_label(a) + "_r=" + format_label(r) + ".csv"),
                 m.str());
      counts.push_back({{"alpha", a}, {"r", r}, {"count", mask.count}});
      log << "safe-sets: alpha=" << format_label(a) << " r=" << format_label(r) << " cells "
          << mask.count << "/" << nx << "\n";
    }
  }

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["config_hash"] = config.hash();
  summary["model"] = config.model.kind;
  if (config.model.kind == "stormwater")
    summary["design"] = std::string(stormwater::design_name(config.model.design));
  summary["g_lower"] = sw.g_lower;
  summary["g_upper"] = g_upper;
  summary["total_cells"] = nx;
  summary["counts"] = counts;
  write_json(out_dir / "summary.json", summary);
  log << "wall time: " << clock.seconds() << " s\n";
  return 0;
}

int cmd_deploy(const RunConfig& config, std::ostream& log) {
  const WallClock clock;
  if (config.deploy.x0.empty()) throw ConfigError("deploy.x0: required (or pass --x0)");
  const auto problem = build_problem(config);
  const fs::path out_dir(config.output);
  fs::create_directories(out_dir);

  DualSweep sw;
  try {
    sw = read_sweep(out_dir, config, problem.grid);
    log << "deploy: reusing sweep in " << out_dir.string() << "\n";
  } catch (const ArtifactError&) {
    log << "deploy: no matching sweep in " << out_dir.string() << ", solving\n";
    sw = sweep(*problem.model, problem.grid, {config.threads, {}});
  }

  const RiskLevel alpha(config.deploy.alpha);
  const auto policy =
      synthesize_policy(config.deploy.x0, alpha, sw, *problem.model, problem.grid, config.threads);

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["config_hash"] = config.hash();
  summary["x0"] = config.deploy.x0;
  summary["x0_node"] = state_cells(problem.grid.x_node(policy.x0_node));
  summary["alpha"] = policy.alpha;
  summary["s_star"] = policy.s_star;
  summary["dp_value"] = policy.dp_value;
  summary["risk_value"] = problem.model->g_lower() + policy.risk_value;
  summary["rollouts"] = config.deploy.rollouts;
  summary["seed"] = config.seed;
  summary["reoptimize"] = config.reoptimize;

  if (config.deploy.rollouts > 0) {
    RolloutOptions ro;
    ro.count = config.deploy.rollouts;
    ro.seed = config.seed;
    ro.threads = config.threads;
    ro.reoptimize = config.reoptimize;
    const auto batch = rollout(policy, *problem.model, ro);
    const auto est = estimate_risk(batch, alpha, policy.s_star, problem.model->g_lower());
    summary["cvar_hat"] = est.cvar_hat;
    summary["var_hat"] = est.var_hat;
    summary["mean"] = est.mean;
    summary["excess_hat"] = est.excess_hat;
    summary["std_err"] = est.excess_std_err;
    summary["excess_gap"] = std::abs(est.excess_hat - policy.dp_value);

    // Rollout i depends only on (seed, i), so the exported prefix matches the
    // statistics batch exactly.
    ro.count = std::min(config.deploy.rollouts, config.deploy.export_limit);
    ro.record_trajectories = true;
    const auto recorded = rollout(policy, *problem.model, ro);
    const std::size_t dim = problem.grid.state_dim();
    std::ostringstream csv;
    csv << hash_line(config) << "rollout_id,t," << state_header(dim) << ",z,u,w\n";
    for (std::size_t i = 0; i < recorded.trajectories.size(); ++i) {
      const auto& tr = recorded.trajectories[i];
      for (std::size_t t = 0; t < tr.steps.size(); ++t) {
        const auto& st = tr.steps[t];
        csv << i << "," << t << "," << state_cells(st.x) << "," << format_double(st.z) << ","
            << format_double(st.u) << "," << format_double(st.w) << "\n";
      }
      csv << i << "," << tr.steps.size() << "," << state_cells(tr.x_final) << ","
          << format_double(tr.z_final) << ",,\n";
    }
    write_text(out_dir / "rollouts.csv", csv.str());
    log << "deploy: excess_hat " << format_double(est.excess_hat) << " +- "
        << format_double(est.excess_std_err) << " vs J0 " << format_double(policy.dp_value)
        << "\n";
  }
  write_json(out_dir / "deploy_summary.json", summary);
  log << "deploy: risk value " << format_double(summary["risk_value"].get<double>())
      << " at s* = " << format_double(policy.s_star) << "\n";
  log << "wall time: " << clock.seconds() << " s\n";
  return 0;
}

std::vector<std::uint64_t> generate_corpus(const fs::path& corpus_dir, std::size_t count,
                                           std::uint64_t seed, const OracleOptions& options) {
  fs::create_directories(corpus_dir);
  std::vector<std::uint64_t> kept;
  for (std::uint64_t s = seed; kept.size() < count; ++s) {
    const auto inst = random_instance(s);
    // Single-action instances have no policy choice to check.
    bool fits = inst.num_actions > 1;
    try {
      for (std::size_t x0 = 0; fits && x0 < inst.num_states; ++x0)
        oracle::exact_optimal_cvar(inst, x0, RiskLevel(0.5), options.budget);
    } catch (const oracle::EnumerationBudgetExceeded&) {
      fits = false;
    }
    if (!fits) continue;
    char name[64];
    std::snprintf(name, sizeof name, "instance_%03zu.tiny", kept.size());
    std::ostringstream text;
    text << "# random_instance seed " << s << "\n";
    write_instance(text, inst);
    write_text(corpus_dir / name, text.str());
    kept.push_back(s);
  }
  return kept;
}

int cmd_oracle(const fs::path& corpus_dir, const RunConfig& config, const OracleOptions& options,
               std::ostream& log) {
  const WallClock clock;
  if (!fs::is_directory(corpus_dir))
    throw ArtifactError(corpus_dir.string() + ": corpus directory not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(corpus_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".tiny") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  const fs::path out_dir(config.output);
  fs::create_directories(out_dir);
  std::ostringstream csv;
  csv << "file,x0,alpha,oracle,exchange,pipeline,pass\n";
  if (files.empty()) {
    log << "oracle: warning: no *.tiny instances in " << corpus_dir.string() << "\n";
    write_text(out_dir / "oracle_report.csv", csv.str());
    return 0;
  }

  std::size_t failed = 0;
  for (const auto& path : files) {
    std::ifstream in(path);
    TinyInstance inst;
    try {
      inst = read_instance(in, path.filename().string());
    } catch (const InstanceParseError& e) {
      log << "oracle: parse error: " << e.what() << "\n";
      return 2;
    }
    const auto report = oracle::verify_instance(inst, options.alphas, options.tolerance);
    for (const auto& c : report.checks)
      csv << path.filename().string() << "," << c.x0 << "," << format_label(c.alpha) << ","
          << format_double(c.oracle) << "," << format_double(c.exchange) << ","
          << format_double(c.pipeline) << "," << (c.pass ? 1 : 0) << "\n";
    if (!report.pass) {
      ++failed;
      log << "oracle: MISMATCH in " << path.filename().string() << "\n";
    }
  }
  write_text(out_dir / "oracle_report.csv", csv.str());
  log << "oracle: " << files.size() - failed << "/" << files.size() << " instances agree\n";
  log << "wall time: " << clock.seconds() << " s\n";
  return failed == 0 ? 0 : 1;
}

int cmd_compare_designs(const RunConfig& config, std::ostream& log) {
  const WallClock clock;
  if (config.model.kind != "stormwater")
    throw ConfigError("model.kind: compare-designs needs the stormwater model");
  const fs::path out_dir(config.output);
  fs::create_directories(out_dir);

  struct Row {
    std::string design;
    double alpha;
    double r;
    std::size_t count;
  };
  std::vector<Row> rows;
  std::size_t total = 0;
  for (const auto& name : config.designs) {
    const auto design = stormwater::parse_design(name);
    const auto problem = build_problem(config, design);
    log << "compare-designs: sweeping design " << name << "\n" << std::flush;
    const auto sw = sweep(*problem.model, problem.grid, {config.threads, {}});
    total = problem.grid.x_count();
    for (const double a : config.alpha) {
      const auto surface = risk_value(sw, RiskLevel(a));
      for (const double r : config.r)
        rows.push_back({name, a, r, extract_safe_set(surface, r).count});
    }
  }

  auto baseline = [&](double a, double r) -> const Row* {
    for (const auto& row : rows)
      if (row.design == "a" && row.alpha == a && row.r == r) return &row;
    return nullptr;
  };

  std::ostringstream csv;
  csv << hash_line(config) << "design,alpha,r,count,ratio_vs_a\n";
  json entries = json::array();
  for (const auto& row : rows) {
    const Row* base = baseline(row.alpha, row.r);
    json e = {{"design", row.design}, {"alpha", row.alpha}, {"r", row.r}, {"count", row.count}};
    std::string ratio_cell;
    if (base && base->count > 0) {
      const double ratio = (double(row.count) - double(base->count)) / double(base->count);
      e["ratio_vs_a"] = ratio;
      ratio_cell = format_double(ratio);
    } else {
      e["ratio_vs_a"] = nullptr;
    }
    entries.push_back(e);
    csv << row.design << "," << format_label(row.alpha) << "," << format_label(row.r) << ","
        << row.count << "," << ratio_cell << "\n";
    log << "compare-designs: " << row.design << " alpha=" << format_label(row.alpha)
        << " r=" << format_label(row.r) << " count " << row.count
        << (ratio_cell.empty() ? "" : " ratio " + ratio_cell) << "\n";
  }
  write_text(out_dir / "compare.csv", csv.str());

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["config_hash"] = config.hash();
  summary["total_cells"] = total;
  summary["rows"] = entries;
  write_json(out_dir / "compare_summary.json", summary);
  log << "wall time: " << clock.seconds() << " s\n";
  return 0;
}

}  // namespace cvarsafe::cli

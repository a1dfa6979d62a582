#include "cvarsafe_cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cvarsafe/tiny_instance.hpp"

namespace cvarsafe::cli {

using nlohmann::json;

namespace {

struct DoubleField {
  const char* name;
  double stormwater::StormwaterParams::*member;
};

constexpr DoubleField kParamFields[] = {
    {"a1", &stormwater::StormwaterParams::a1},
    {"a2", &stormwater::StormwaterParams::a2},
    {"c_d", &stormwater::StormwaterParams::c_d},
    {"g_tilde", &stormwater::StormwaterParams::g_tilde},
    {"pi_tilde", &stormwater::StormwaterParams::pi_tilde},
    {"k1", &stormwater::StormwaterParams::k1},
    {"k2", &stormwater::StormwaterParams::k2},
    {"kbar1", &stormwater::StormwaterParams::kbar1},
    {"kbar2", &stormwater::StormwaterParams::kbar2},
    {"r_s", &stormwater::StormwaterParams::r_s},
    {"r_v", &stormwater::StormwaterParams::r_v},
    {"dt", &stormwater::StormwaterParams::dt},
    {"z1", &stormwater::StormwaterParams::z1},
    {"z1_in", &stormwater::StormwaterParams::z1_in},
    {"z2", &stormwater::StormwaterParams::z2},
    {"n_cso1", &stormwater::StormwaterParams::n_cso1},
    {"n_cso2", &stormwater::StormwaterParams::n_cso2},
    {"r_cso1", &stormwater::StormwaterParams::r_cso1},
    {"r_cso2", &stormwater::StormwaterParams::r_cso2},
    {"g_lower", &stormwater::StormwaterParams::g_lower},
};

struct PumpField {
  const char* name;
  double stormwater::PumpParams::*member;
};

constexpr PumpField kPumpFields[] = {
    {"q_pump_max", &stormwater::PumpParams::q_pump_max},
    {"eps", &stormwater::PumpParams::eps},
    {"z_p", &stormwater::PumpParams::z_p},
};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void expect_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool flag(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TinyInstance load_tiny(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("model.tiny_path", "cannot open '" + path + "'");
  return read_instance(in, path);
}

}  // namespace

stormwater::StormwaterParams ModelConfig::params_for(stormwater::Design d) const {
  auto p = stormwater::StormwaterParams::for_design(stormwater::Design::a);
  for (const auto& f : kParamFields)
    if (param_overrides.contains(f.name)) p.*f.member = param_overrides[f.name].get<double>();
  if (param_overrides.contains("horizon")) p.horizon = param_overrides["horizon"].get<int>();
  p.design = d;
  if (d == stormwater::Design::b) {
    stormwater::PumpParams pump;
    for (const auto& f : kPumpFields)
      if (pump_overrides.contains(f.name)) pump.*f.member = pump_overrides[f.name].get<double>();
    p.pump = pump;
  }
  if (d == stormwater::Design::d) p.a2 *= 1.2;
  return p;
}

ProbabilityMassFunction ModelConfig::runoff() const {
  if (disturbance == "moment_matched") return stormwater::moment_matched_runoff();
  if (disturbance == "smoke") return stormwater::smoke_runoff();
  return ProbabilityMassFunction::from_atoms(custom_atoms);
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  expect_keys(doc, "", {"model", "grid", "alpha", "r", "designs", "seed", "threads", "output",
                        "flags", "deploy"});

  if (doc.contains("model")) {
    const auto& m = doc["model"];
    expect_keys(m, "model", {"kind", "design", "params", "pump", "disturbance", "tiny_path"});
    if (m.contains("kind")) {
      cfg.model.kind = text(m["kind"], "model.kind");
      if (cfg.model.kind != "stormwater" && cfg.model.kind != "tiny")
        fail("model.kind", "expected \"stormwater\" or \"tiny\"");
    }
    if (m.contains("design")) {
      try {
        cfg.model.design = stormwater::parse_design(text(m["design"], "model.design"));
      } catch (const std::invalid_argument& e) {
        fail("model.design", e.what());
      }
    }
    if (m.contains("params")) {
      const auto& p = m["params"];
      if (!p.is_object()) fail("model.params", "expected an object");
      for (const auto& [key, value] : p.items()) {
        const std::string path = "model.params." + key;
        bool known = key == "horizon";
        for (const auto& f : kParamFields) known = known || key == f.name;
        if (!known) fail(path, "unknown key");
        if (key == "horizon") {
          if (!value.is_number_integer() || value.get<long long>() < 1) fail(path, "expected an integer >= 1");
        } else {
          number(value, path);
        }
        cfg.model.param_overrides[key] = value;
      }
    }
    if (m.contains("pump")) {
      const auto& p = m["pump"];
      expect_keys(p, "model.pump", {"q_pump_max", "eps", "z_p"});
      for (const auto& [key, value] : p.items()) {
        number(value, "model.pump." + key);
        cfg.model.pump_overrides[key] = value;
      }
    }
    if (m.contains("disturbance")) {
      const auto& d = m["disturbance"];
      if (d.is_string()) {
        cfg.model.disturbance = d.get<std::string>();
        if (cfg.model.disturbance != "moment_matched" && cfg.model.disturbance != "smoke")
          fail("model.disturbance", "expected \"moment_matched\", \"smoke\" or {\"atoms\": [...]}");
      } else {
        expect_keys(d, "model.disturbance", {"atoms"});
        if (!d.contains("atoms") || !d["atoms"].is_array() || d["atoms"].empty())
          fail("model.disturbance.atoms", "expected a non-empty array of [value, prob] pairs");
        cfg.model.disturbance = "custom";
        const auto& atoms = d["atoms"];
        for (std::size_t i = 0; i < atoms.size(); ++i) {
          const std::string path = "model.disturbance.atoms[" + std::to_string(i) + "]";
          if (!atoms[i].is_array() || atoms[i].size() != 2) fail(path, "expected [value, prob]");
          cfg.model.custom_atoms.push_back(
              {number(atoms[i][0], path + "[0]"), number(atoms[i][1], path + "[1]")});
        }
        try {
          ProbabilityMassFunction::from_atoms(cfg.model.custom_atoms);
        } catch (const std::invalid_argument& e) {
          fail("model.disturbance.atoms", e.what());
        }
      }
    }
    if (m.contains("tiny_path")) cfg.model.tiny_path = text(m["tiny_path"], "model.tiny_path");
  }

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    expect_keys(g, "grid", {"x", "z", "action", "s"});
    if (g.contains("x")) {
      if (!g["x"].is_array()) fail("grid.x", "expected an array of node counts");
      cfg.grid.x.clear();
      for (std::size_t i = 0; i < g["x"].size(); ++i)
        cfg.grid.x.push_back(count(g["x"][i], "grid.x[" + std::to_string(i) + "]"));
    }
    if (g.contains("z")) cfg.grid.z = count(g["z"], "grid.z");
    if (g.contains("action")) cfg.grid.action = count(g["action"], "grid.action");
    if (g.contains("s")) cfg.grid.s = count(g["s"], "grid.s");
  }

  if (doc.contains("alpha")) cfg.alpha = numbers(doc["alpha"], "alpha");
  if (doc.contains("r")) cfg.r = numbers(doc["r"], "r");
  if (doc.contains("designs")) {
    const auto& d = doc["designs"];
    if (!d.is_array()) fail("designs", "expected an array of design names");
    cfg.designs.clear();
    for (std::size_t i = 0; i < d.size(); ++i)
      cfg.designs.push_back(text(d[i], "designs[" + std::to_string(i) + "]"));
  }
  if (doc.contains("seed")) cfg.seed = count(doc["seed"], "seed");
  if (doc.contains("threads")) cfg.threads = static_cast<unsigned>(count(doc["threads"], "threads"));
  if (doc.contains("output")) cfg.output = text(doc["output"], "output");
  if (doc.contains("flags")) {
    const auto& f = doc["flags"];
    expect_keys(f, "flags", {"reoptimize", "persist_tables"});
    if (f.contains("reoptimize")) cfg.reoptimize = flag(f["reoptimize"], "flags.reoptimize");
    if (f.contains("persist_tables")) cfg.persist_tables = flag(f["persist_tables"], "flags.persist_tables");
  }
  if (doc.contains("deploy")) {
    const auto& d = doc["deploy"];
    expect_keys(d, "deploy", {"x0", "alpha", "rollouts", "export_limit"});
    if (d.contains("x0")) cfg.deploy.x0 = numbers(d["x0"], "deploy.x0");
    if (d.contains("alpha")) cfg.deploy.alpha = number(d["alpha"], "deploy.alpha");
    if (d.contains("rollouts")) cfg.deploy.rollouts = count(d["rollouts"], "deploy.rollouts");
    if (d.contains("export_limit")) cfg.deploy.export_limit = count(d["export_limit"], "deploy.export_limit");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  auto cfg = parse_config(doc);
  if (!cfg.model.tiny_path.empty() && std::filesystem::path(cfg.model.tiny_path).is_relative())
    cfg.model.tiny_path = (path.parent_path() / cfg.model.tiny_path).string();
  return cfg;
}

void validate(const RunConfig& cfg) {
  for (std::size_t i = 0; i < cfg.alpha.size(); ++i)
    if (!(cfg.alpha[i] > 0.0 && cfg.alpha[i] <= 1.0))
      fail("alpha[" + std::to_string(i) + "]", "must lie in (0, 1]");
  if (!(cfg.deploy.alpha > 0.0 && cfg.deploy.alpha <= 1.0)) fail("deploy.alpha", "must lie in (0, 1]");
  for (std::size_t i = 0; i < cfg.designs.size(); ++i) {
    try {
      stormwater::parse_design(cfg.designs[i]);
    } catch (const std::invalid_argument& e) {
      fail("designs[" + std::to_string(i) + "]", e.what());
    }
  }

  std::unique_ptr<SystemModel> model;
  if (cfg.model.kind == "tiny") {
    if (cfg.model.tiny_path.empty()) fail("model.tiny_path", "required when model.kind is \"tiny\"");
    try {
      model = std::make_unique<TinyModel>(load_tiny(cfg.model.tiny_path));
    } catch (const InstanceParseError& e) {
      fail("model.tiny_path", e.what());
    }
  } else {
    if (cfg.grid.x.size() != 2) fail("grid.x", "expected 2 node counts for the stormwater model");
    for (std::size_t i = 0; i < cfg.grid.x.size(); ++i)
      if (cfg.grid.x[i] < 2) fail("grid.x[" + std::to_string(i) + "]", "must be >= 2");
    if (cfg.grid.z < 2) fail("grid.z", "must be >= 2");
    if (cfg.grid.action < 2) fail("grid.action", "must be >= 2");
    if (cfg.grid.s < 2) fail("grid.s", "must be >= 2");
    std::vector<stormwater::Design> designs{cfg.model.design};
    for (const auto& d : cfg.designs) designs.push_back(stormwater::parse_design(d));
    for (const auto d : designs) {
      try {
        cfg.model.params_for(d).validate();
      } catch (const std::invalid_argument& e) {
        std::string what = e.what();
        const std::string prefix = "stormwater.";
        if (what.rfind(prefix, 0) == 0) what = "model.params." + what.substr(prefix.size());
        throw ConfigError(what);
      }
    }
    model = std::make_unique<stormwater::StormwaterModel>(cfg.model.params_for(cfg.model.design),
                                                         cfg.model.runoff());
  }

  const double g_lo = model->g_lower();
  const double g_hi = g_lo + model->c_bar();
  for (std::size_t i = 0; i < cfg.r.size(); ++i)
    if (!(cfg.r[i] >= g_lo && cfg.r[i] <= g_hi))
      fail("r[" + std::to_string(i) + "]", "must lie in [g_lower, g_upper] = [" +
                                               std::to_string(g_lo) + ", " + std::to_string(g_hi) + "]");
  if (!cfg.deploy.x0.empty()) {
    if (cfg.deploy.x0.size() != model->state_dim())
      fail("deploy.x0", "expected " + std::to_string(model->state_dim()) + " coordinates");
    const auto bounds = model->state_bounds();
    for (std::size_t d = 0; d < bounds.size(); ++d)
      if (!bounds[d].contains(cfg.deploy.x0[d]))
        fail("deploy.x0[" + std::to_string(d) + "]", "outside the state bounds");
  }
}

json RunConfig::resolved() const {
  json doc;
  json m;
  m["kind"] = model.kind;
  if (model.kind == "tiny") {
    std::ostringstream text_out;
    write_instance(text_out, load_tiny(model.tiny_path));
    m["instance"] = text_out.str();
  } else {
    m["design"] = std::string(stormwater::design_name(model.design));
    const auto p = model.params_for(model.design);
    json params;
    for (const auto& f : kParamFields) params[f.name] = p.*f.member;
    params["horizon"] = p.horizon;
    m["params"] = params;
    json pump;
    const auto pp = model.params_for(stormwater::Design::b).pump.value();
    for (const auto& f : kPumpFields) pump[f.name] = pp.*f.member;
    m["pump"] = pump;
    m["param_overrides"] = model.param_overrides;
    json atoms = json::array();
    const auto law = model.runoff();
    for (const auto& a : law.atoms()) atoms.push_back({a.value, a.prob});
    m["disturbance"] = {{"name", model.disturbance}, {"atoms", atoms}};
  }
  doc["model"] = m;
  doc["grid"] = {{"x", grid.x}, {"z", grid.z}, {"action", grid.action}, {"s", grid.s}};
  doc["alpha"] = alpha;
  doc["r"] = r;
  doc["designs"] = designs;
  doc["seed"] = seed;
  doc["flags"] = {{"reoptimize", reoptimize}, {"persist_tables", persist_tables}};
  doc["deploy"] = {{"x0", deploy.x0},
                   {"alpha", deploy.alpha},
                   {"rollouts", deploy.rollouts},
                   {"export_limit", deploy.export_limit}};
  return doc;
}

std::string RunConfig::hash() const { return fnv1a_hex(resolved().dump()); }

BuiltProblem build_problem(const RunConfig& cfg) { return build_problem(cfg, cfg.model.design); }

BuiltProblem build_problem(const RunConfig& cfg, stormwater::Design design) {
  if (cfg.model.kind == "tiny") {
    auto inst = load_tiny(cfg.model.tiny_path);
    auto grid = exact_grid(inst);
    return {std::make_unique<TinyModel>(std::move(inst)), std::move(grid)};
  }
  auto model = std::make_unique<stormwater::StormwaterModel>(cfg.model.params_for(design),
                                                            cfg.model.runoff());
  auto grid = AugmentedGrid::uniform(*model, cfg.grid.x, cfg.grid.z, cfg.grid.action, cfg.grid.s);
  return {std::move(model), std::move(grid)};
}

}  // namespace cvarsafe::cli

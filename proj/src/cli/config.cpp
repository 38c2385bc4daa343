#include "cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <type_traits>

#include "common/error.hpp"

namespace contoursel::cli {

namespace {

using nlohmann::json;

// Every key of `user` must exist in `base`; objects are checked recursively.
void checkKeys(const json& user, const json& base, const std::string& where) {
  if (!user.is_object()) fail(ErrorCode::config, where + " must be a JSON object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) fail(ErrorCode::config, "unknown config key '" + path + "'");
    if (base.at(key).is_object()) checkKeys(value, base.at(key), path);
  }
}

std::vector<suite::FunctionCode> parseFunctions(const json& j) {
  std::vector<suite::FunctionCode> out;
  for (const auto& s : j) out.push_back(suite::parse_function_code(s.get<std::string>()));
  return out;
}

json functionNames(const std::vector<suite::FunctionCode>& fs) {
  json out = json::array();
  for (auto f : fs) out.push_back(std::string(suite::to_string(f)));
  return out;
}

std::string policyName(perf::UnsolvedPolicy p) {
  return p == perf::UnsolvedPolicy::drop ? "drop" : "keep_penalized";
}

}  // namespace

std::string to_string(Protocol p) { return p == Protocol::loocv ? "loocv" : "moo_split"; }

std::filesystem::path ExperimentConfig::output_root() const {
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return output_dir;
}

harness::SooDatasetOptions ExperimentConfig::soo_options() const {
  harness::SooDatasetOptions o;
  o.functions = functions;
  o.dimensions = dimensions;
  o.instances = instances;
  o.master_seed = seed;
  o.budget_per_dimension = budget_per_dimension;
  o.probe = probe;
  o.unsolved = unsolved;
  o.penalty_override = penalty_override;
  return o;
}

harness::MooDatasetOptions ExperimentConfig::moo_options() const {
  harness::MooDatasetOptions o;
  o.functions = moo_functions;
  o.repetitions = repetitions;
  o.master_seed = seed;
  o.budget = moo_budget;
  o.window_scale = window_scale;
  o.probe = probe;
  return o;
}

ExperimentConfig default_config(Protocol protocol) {
  ExperimentConfig c;
  c.protocol = protocol;
  if (protocol == Protocol::moo_split) {
    c.model.variant = nn::Variant::separate;
    c.model.objective_count = 2;
    c.model.residual_blocks = 1;
    c.model.target_transform = nn::TargetTransform::relhv_clip;
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  auto train = nn::to_json(c.train);
  return {{"protocol", to_string(c.protocol)},
          {"seed", c.seed},
          {"output_dir", c.output_dir},
          {"threads", c.threads},
          {"suite",
           {{"functions", functionNames(c.functions)},
            {"dimensions", c.dimensions},
            {"instances", c.instances},
            {"moo_functions", functionNames(c.moo_functions)}}},
          {"probe",
           {{"r_probe", c.probe.r_probe},
            {"r_out", c.probe.r_out},
            {"levels", c.probe.levels},
            {"window_scale", c.window_scale}}},
          {"solvers",
           {{"budget_per_dimension", c.budget_per_dimension},
            {"moo_budget", c.moo_budget},
            {"repetitions", c.repetitions}}},
          {"perf",
           {{"unsolved_policy", policyName(c.unsolved)},
            {"penalty_override", c.penalty_override ? json(*c.penalty_override) : json(nullptr)}}},
          {"model", nn::to_json(c.model)},
          {"train", train},
          {"stats", {{"tie_policy", harness::to_string(c.tie_policy)}}},
          {"paths",
           {{"runs", c.paths.runs},
            {"hv", c.paths.hv},
            {"model", c.paths.model},
            {"selection", c.paths.selection},
            {"report_a", c.paths.report_a},
            {"report_b", c.paths.report_b}}}};
}

// Integers only: nlohmann would silently truncate 2.5 or wrap -1.
template <class T>
T integer(const json& v, const char* key) {
  if (!v.is_number_integer()) fail(ErrorCode::config, std::string(key) + " must be an integer");
  if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)
      fail(ErrorCode::config, std::string(key) + " must be non-negative");
  }
  return v.get<T>();
}

ExperimentConfig config_from_json(const nlohmann::json& user) {
  if (!user.is_object()) fail(ErrorCode::config, "config must be a JSON object");
  Protocol protocol = Protocol::loocv;
  if (user.contains("protocol")) {
    const auto& p = user.at("protocol");
    if (p == "loocv") protocol = Protocol::loocv;
    else if (p == "moo_split") protocol = Protocol::moo_split;
    else fail(ErrorCode::config, "protocol must be 'loocv' or 'moo_split'");
  }
  json full = to_json(default_config(protocol));
  checkKeys(user, full, "");
  full.merge_patch(user);
  // merge_patch removes keys set to null; restore the nullable one.
  if (!full["perf"].contains("penalty_override")) full["perf"]["penalty_override"] = nullptr;

  ExperimentConfig c = default_config(protocol);
  try {
    c.seed = integer<std::uint64_t>(full.at("seed"), "seed");
    c.output_dir = full.at("output_dir").get<std::string>();
    c.threads = integer<int>(full.at("threads"), "threads");
    const auto& s = full.at("suite");
    c.functions = parseFunctions(s.at("functions"));
    c.dimensions = s.at("dimensions").get<std::vector<int>>();
    c.instances = integer<int>(s.at("instances"), "instances");
    c.moo_functions = parseFunctions(s.at("moo_functions"));
    const auto& p = full.at("probe");
    c.probe.r_probe = integer<int>(p.at("r_probe"), "r_probe");
    c.probe.r_out = integer<int>(p.at("r_out"), "r_out");
    c.probe.levels = integer<int>(p.at("levels"), "levels");
    c.window_scale = p.at("window_scale").get<double>();
    const auto& sv = full.at("solvers");
    c.budget_per_dimension = integer<std::int64_t>(sv.at("budget_per_dimension"), "budget_per_dimension");
    c.moo_budget = integer<std::int64_t>(sv.at("moo_budget"), "moo_budget");
    c.repetitions = integer<int>(sv.at("repetitions"), "repetitions");
    const auto& pf = full.at("perf");
    const auto policy = pf.at("unsolved_policy").get<std::string>();
    if (policy == "drop") c.unsolved = perf::UnsolvedPolicy::drop;
    else if (policy == "keep_penalized") c.unsolved = perf::UnsolvedPolicy::keep_penalized;
    else fail(ErrorCode::config, "unsolved_policy must be 'drop' or 'keep_penalized'");
    if (!pf.at("penalty_override").is_null()) c.penalty_override = pf.at("penalty_override").get<double>();
    c.model = nn::spec_from_json(full.at("model"));
    c.train = nn::train_config_from_json(full.at("train"));
    c.tie_policy = harness::parse_tie_policy(full.at("stats").at("tie_policy").get<std::string>());
    const auto& ps = full.at("paths");
    c.paths = {ps.at("runs").get<std::string>(),      ps.at("hv").get<std::string>(),
               ps.at("model").get<std::string>(),     ps.at("selection").get<std::string>(),
               ps.at("report_a").get<std::string>(),  ps.at("report_b").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::config, std::string("bad config value: ") + e.what());
  }

  auto require_config = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::config, what);
  };
  require_config(c.threads >= 1, "threads must be >= 1");
  require_config(!c.functions.empty() && !c.dimensions.empty(), "suite must not be empty");
  for (auto f : c.functions) require_config(suite::kind_of(f) == suite::ProblemKind::soo, "suite.functions must be single-objective");
  for (auto f : c.moo_functions) require_config(suite::kind_of(f) == suite::ProblemKind::moo, "suite.moo_functions must be bi-objective");
  for (int d : c.dimensions)
    require_config(d == 2 || d == 3 || d == 5 || d == 10, "dimensions must be in {2,3,5,10}");
  require_config(c.instances >= 1, "instances must be >= 1");
  require_config(c.probe.r_probe >= 2 && c.probe.r_out >= 2, "resolutions must be >= 2");
  require_config(c.probe.levels >= 0, "levels must be >= 0");
  require_config(c.window_scale > 0.0 && c.window_scale <= 1.0, "window_scale must be in (0, 1]");
  require_config(c.budget_per_dimension >= 1 && c.moo_budget >= 1, "budgets must be >= 1");
  require_config(c.repetitions >= 1, "repetitions must be >= 1");
  require_config(c.model.input_resolution == c.probe.r_out,
                 "model.input_resolution must equal probe.r_out");
  require_config(c.model.output_count == 3, "model.output_count must match the 3-solver portfolio");
  require_config(c.model.objective_count == (c.protocol == Protocol::moo_split ? 2 : 1),
                 "model.objective_count must be 1 for loocv and 2 for moo_split");
  c.train.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig apply_patch(const ExperimentConfig& c, const nlohmann::json& patch) {
  json full = to_json(c);
  checkKeys(patch, full, "");
  full.merge_patch(patch);
  return config_from_json(full);
}

}  // namespace contoursel::cli

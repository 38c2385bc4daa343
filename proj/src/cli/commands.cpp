#include "cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"

namespace contoursel::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTrainTag = 0x7a1;
constexpr std::uint64_t kModelTag = 0x7a2;
constexpr std::uint64_t kGradCheckTag = 0x9c;

fs::path orDefault(const std::string& configured, const fs::path& fallback) {
  return configured.empty() ? fallback : fs::path(configured);
}

fs::path runsPath(const ExperimentConfig& c) { return orDefault(c.paths.runs, c.output_root() / "runs.csv"); }
fs::path hvPath(const ExperimentConfig& c) { return orDefault(c.paths.hv, c.output_root() / "hv.csv"); }
fs::path referencePath(const ExperimentConfig& c) {
  return hvPath(c).parent_path() / "moo_reference.json";
}
fs::path modelPath(const ExperimentConfig& c) {
  return orDefault(c.paths.model, c.output_root() / "model.json");
}
fs::path selectionPath(const ExperimentConfig& c) {
  return orDefault(c.paths.selection, c.output_root() / "selection.csv");
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// Existing run records are reused so that external data can be ingested.
std::vector<perf::RunRecord> loadRuns(const ExperimentConfig& c) {
  const auto path = runsPath(c);
  if (fs::exists(path)) return perf::read_runs(path);
  auto runs = harness::generate_runs(c.soo_options());
  perf::write_runs(path, runs);
  return runs;
}

harness::MooPerfData loadMooPerf(const ExperimentConfig& c) {
  if (fs::exists(hvPath(c))) return harness::read_moo_perf(hvPath(c), referencePath(c));
  auto perf = harness::generate_moo_perf(c.moo_options());
  perf::write_hv(hvPath(c), perf.hv);
  harness::write_moo_reference(referencePath(c), perf);
  return perf;
}

// Effective config plus the modelling choices the protocol depends on.
void writeMetadata(const ExperimentConfig& c) {
  nlohmann::json meta = {
      {"config", to_json(c)},
      {"choices",
       {{"loss", "mse"},
        {"aggregation", "cells weighted by configuration count"},
        {"relhv_aggregation", "mean normalised HV over repetitions, per instance"},
        {"relhv_targets", "training repetitions 0-14 only; scoring uses 15-19"},
        {"hv_best", "dense sample of the analytic Pareto front"},
        {"reference_point", "worst value over all final sets, inflated by 1.1"},
        {"select_ties", "lowest index"}}}};
  csv::write_text(c.output_root() / "experiment.json", meta.dump(2) + "\n");
}

std::vector<perf::ConfigKey> sooConfigs(const ExperimentConfig& c) {
  std::vector<perf::ConfigKey> keys;
  for (auto f : c.functions)
    for (int d : c.dimensions) keys.push_back({f, d});
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

void writeStackWithSidecar(const probe::ContourStack& stack, suite::FunctionCode function,
                           int dimension, const ExperimentConfig& c, const fs::path& path) {
  probe::write_stack(stack, path);
  auto side = probe::sidecar(stack, function, dimension, c.probe);
  auto json_path = path;
  json_path.replace_extension(".json");
  csv::write_text(json_path, side.dump(2) + "\n");
}

std::string repName(const std::string& instance, int rep) {
  std::string r = std::to_string(rep);
  if (r.size() < 2) r = "0" + r;
  return instance + "_rep" + r;
}

}  // namespace

std::string cmd_probe(const ExperimentConfig& c) {
  const auto dir = c.output_root() / "stacks";
  std::int64_t evaluations = 0;
  std::size_t count = 0;
  if (c.protocol == Protocol::loocv) {
    for (const auto& key : sooConfigs(c)) {
      const auto stack = harness::probe_soo_config(key, c.seed, c.probe);
      writeStackWithSidecar(stack, key.function, key.dimension, c,
                            dir / (harness::config_label(key) + ".cstk"));
      evaluations += stack.evaluations_spent;
      ++count;
    }
  } else {
    const auto options = c.moo_options();
    for (auto f : c.moo_functions) {
      const auto inst = harness::moo_instance(f, c.seed);
      const std::string name(suite::to_string(f));
      for (int rep = 0; rep < c.repetitions; ++rep) {
        const auto pair = harness::probe_moo_repetition(inst, options, rep);
        writeStackWithSidecar(pair.obj1, f, 2, c, dir / (repName(name, rep) + "_obj1.cstk"));
        writeStackWithSidecar(pair.obj2, f, 2, c, dir / (repName(name, rep) + "_obj2.cstk"));
        evaluations += pair.obj1.evaluations_spent + pair.obj2.evaluations_spent;
        count += 2;
      }
    }
  }
  return "stacks=" + std::to_string(count) + " evaluations=" + std::to_string(evaluations) +
         " dir=" + dir.string();
}

std::string cmd_render(const ExperimentConfig& c) {
  const auto dir = c.output_root() / "stacks";
  std::vector<fs::path> stacks;
  if (fs::exists(dir))
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".cstk") stacks.push_back(entry.path());
  if (stacks.empty()) fail(ErrorCode::io, "no stacks in " + dir.string() + "; run probe first");
  std::sort(stacks.begin(), stacks.end());
  const auto out = c.output_root() / "images";
  std::size_t images = 0;
  for (const auto& path : stacks) {
    const auto stack = probe::read_stack(path);
    for (int v = 0; v < stack.view_count(); ++v) {
      probe::write_pgm(stack.views[static_cast<std::size_t>(v)],
                       out / (path.stem().string() + "_v" + std::to_string(v) + ".pgm"));
      ++images;
    }
  }
  return "images=" + std::to_string(images) + " dir=" + out.string();
}

std::string cmd_gen_perf(const ExperimentConfig& c) {
  if (c.protocol == Protocol::loocv) {
    const auto runs = harness::generate_runs(c.soo_options());
    perf::write_runs(runsPath(c), runs);
    return "records=" + std::to_string(runs.size()) + " path=" + runsPath(c).string();
  }
  const auto perf = harness::generate_moo_perf(c.moo_options());
  perf::write_hv(hvPath(c), perf.hv);
  harness::write_moo_reference(referencePath(c), perf);
  return "records=" + std::to_string(perf.hv.size()) + " path=" + hvPath(c).string();
}

std::string cmd_train(const ExperimentConfig& c) {
  std::vector<nn::TrainingSample> samples;
  if (c.protocol == Protocol::loocv) {
    const auto runs = loadRuns(c);
    auto data = harness::build_soo_dataset(c.soo_options(), runs);
    samples = std::move(data.samples);
  } else {
    const auto data = harness::build_moo_dataset(c.moo_options(), loadMooPerf(c));
    samples = harness::moo_training_samples(data, harness::moo_perf(data));
  }
  nn::TrainConfig tc = c.train;
  tc.seed = derive_seed(c.seed, {kTrainTag});
  auto result = nn::train(nn::Model(c.model, derive_seed(c.seed, {kModelTag})), samples, tc);
  nn::save_model(result.model, modelPath(c));
  std::ostringstream curve;
  curve << "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e)
    curve << e + 1 << ',' << csv::format_double(result.loss_curve[e]) << '\n';
  csv::write_text(c.output_root() / "loss_curve.csv", curve.str());
  writeMetadata(c);
  return "samples=" + std::to_string(samples.size()) + " final_loss=" +
         fmt(result.loss_curve.empty() ? 0.0 : result.loss_curve.back()) +
         " model=" + modelPath(c).string();
}

std::string cmd_evaluate(const ExperimentConfig& c) {
  const auto root = c.output_root();
  const auto fitter = harness::cnn_fitter(c.model, c.train);
  writeMetadata(c);
  if (c.protocol == Protocol::loocv) {
    const auto runs = loadRuns(c);
    const auto data = harness::build_soo_dataset(c.soo_options(), runs);
    harness::LoocvOptions options;
    options.master_seed = c.seed;
    options.threads = c.threads;
    const auto report = harness::run_loocv_soo(data, fitter, options);
    harness::write_selection(selectionPath(c), report);
    harness::write_soo_report(root / "soo_report.csv", harness::aggregate_report(report));
    perf::write_relert_matrix(root / "relert_matrix.csv", data.table);
    return "configs=" + std::to_string(report.entries.size()) + " cnn=" + fmt(report.mean_achieved()) +
           " sbs=" + fmt(report.mean_sbs()) + " vbs=" + fmt(report.mean_vbs()) +
           " sbs_algorithm=" + report.sbs;
  }
  const auto data = harness::build_moo_dataset(c.moo_options(), loadMooPerf(c));
  const auto result = harness::run_moo_experiment(data, fitter, c.seed);
  harness::write_selection(selectionPath(c), result.report);
  harness::write_moo_report(root / "moo_report.csv", harness::aggregate_moo(result.report));
  return "selections=" + std::to_string(result.report.entries.size()) +
         " cnn=" + fmt(result.report.mean_achieved()) + " sbs=" + fmt(result.report.mean_sbs()) +
         " vbs=" + fmt(result.report.mean_vbs()) + " sbs_algorithm=" + result.report.sbs;
}

std::string cmd_report(const ExperimentConfig& c) {
  const auto root = c.output_root();
  const auto report = harness::read_selection(selectionPath(c));
  if (report.entries.empty()) fail(ErrorCode::data, "selection file has no rows");
  if (c.protocol == Protocol::loocv) {
    const auto rows = harness::aggregate_report(report);
    harness::write_soo_report(root / "soo_report.csv", rows);
    std::string extra;
    if (fs::exists(runsPath(c))) {
      const auto table = perf::relert_matrix(perf::build_ert_table(perf::read_runs(runsPath(c))),
                                             c.penalty_override, c.unsolved);
      perf::write_relert_matrix(root / "relert_matrix.csv", table);
      extra = " relert_matrix=" + (root / "relert_matrix.csv").string();
    }
    return "rows=" + std::to_string(rows.size()) + " overall=" + fmt(rows.back().mean) +
           " path=" + (root / "soo_report.csv").string() + extra;
  }
  const auto rows = harness::aggregate_moo(report);
  harness::write_moo_report(root / "moo_report.csv", rows);
  return "rows=" + std::to_string(rows.size()) + " path=" + (root / "moo_report.csv").string();
}

std::string cmd_stats(const ExperimentConfig& c) {
  const auto root = c.output_root();
  const auto path_a = orDefault(c.paths.report_a, root / "soo_report.csv");
  const auto path_b = orDefault(c.paths.report_b, path_a);
  const auto rows_a = harness::read_soo_report(path_a);
  const auto rows_b = path_b == path_a ? rows_a : harness::read_soo_report(path_b);
  auto methodsOf = [](const std::vector<harness::Cell>& rows) {
    std::vector<std::string> names;
    for (const auto& r : rows)
      if (r.method != "VBS" && std::find(names.begin(), names.end(), r.method) == names.end())
        names.push_back(r.method);
    return names;
  };
  std::vector<harness::MethodComparison> out;
  const auto ma = methodsOf(rows_a), mb = methodsOf(rows_b);
  for (std::size_t i = 0; i < ma.size(); ++i)
    for (std::size_t j = 0; j < mb.size(); ++j) {
      if (ma[i] == mb[j]) continue;
      // Within one file each unordered pair once, with SBS on the right.
      if (path_a == path_b && (ma[i] == "SBS" || (mb[j] != "SBS" && j < i))) continue;
      out.push_back(harness::compare_methods(harness::method_cells(rows_a, ma[i]),
                                             harness::method_cells(rows_b, mb[j]), c.tie_policy));
    }
  if (out.empty()) fail(ErrorCode::data, "no method pairs to compare");
  const auto path = root / "stats.csv";
  harness::write_stats(path, out);
  const auto& f = out.front();
  return "comparisons=" + std::to_string(out.size()) + " " + f.method_a + "_vs_" + f.method_b +
         " W=" + fmt(f.test.w) + " p=" + fmt(f.test.p) + " n_effective=" +
         std::to_string(f.test.n_effective) + " tie_policy=" + harness::to_string(c.tie_policy) +
         " path=" + path.string();
}

std::string cmd_gradcheck(const ExperimentConfig& c) {
  auto spec = nn::gradcheck_spec(c.model.variant, c.model.residual_blocks);
  spec.objective_count = c.model.objective_count;
  double worst = 0.0;
  std::string where;
  for (int k = 0; k < kGradCheckSeeds; ++k) {
    const auto r = nn::grad_check_random(spec, derive_seed(c.seed, {kGradCheckTag, static_cast<std::uint64_t>(k)}));
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      where = r.worst_parameter;
    }
  }
  std::string summary = "variant=" + nn::to_string(spec.variant) + " seeds=" +
                        std::to_string(kGradCheckSeeds) + " max_relative_error=" + fmt(worst) +
                        " worst=" + where;
  if (!(worst < kGradCheckTolerance)) fail(ErrorCode::check_failed, "gradcheck failed: " + summary);
  return summary + " pass";
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"probe", "render", "gen-perf", "train",
                                                 "evaluate", "report", "stats", "gradcheck"};
  return names;
}

std::string run_command(const std::string& name, const ExperimentConfig& c) {
  static const std::map<std::string, std::function<std::string(const ExperimentConfig&)>> table = {
      {"probe", cmd_probe},       {"render", cmd_render}, {"gen-perf", cmd_gen_perf},
      {"train", cmd_train},       {"evaluate", cmd_evaluate}, {"report", cmd_report},
      {"stats", cmd_stats},       {"gradcheck", cmd_gradcheck}};
  const auto it = table.find(name);
  if (it == table.end()) fail(ErrorCode::invalid_argument, "unknown command '" + name + "'");
  return it->second(c);
}

}  // namespace contoursel::cli

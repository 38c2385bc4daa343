#include "harness/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"

namespace contoursel::harness {

namespace {

constexpr std::uint64_t kFoldTag = 0xf01d;
constexpr std::uint64_t kMooProbeTag = 0x3d0;
constexpr std::uint64_t kMooRunTag = 0x50f;
constexpr std::uint64_t kMooFitTag = 0x77;
constexpr int kFrontSamples = 100001;

double meanOf(const std::vector<SelectionEntry>& entries, double SelectionEntry::*field) {
  if (entries.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : entries) s += e.*field;
  return s / static_cast<double>(entries.size());
}

std::string cellField(int v) { return v == 0 ? "all" : std::to_string(v); }

int parseCellField(const std::string& s, const std::string& where) {
  if (s == "all") return 0;
  return static_cast<int>(csv::parse_int(s, where));
}

}  // namespace

std::size_t select(std::span<const double> predictions, SelectMode mode) {
  if (predictions.empty()) fail(ErrorCode::selection, "no predictions to select from");
  std::size_t best = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (std::isnan(predictions[i])) fail(ErrorCode::selection, "NaN prediction at index " + std::to_string(i));
    const bool better = mode == SelectMode::minimize ? predictions[i] < predictions[best]
                                                     : predictions[i] > predictions[best];
    if (better) best = i;
  }
  return best;
}

FoldFitter cnn_fitter(nn::ModelSpec spec, nn::TrainConfig config) {
  return [spec, config](std::span<const nn::TrainingSample* const> train,
                        std::uint64_t fold_seed) -> Predictor {
    nn::Model fresh(spec, derive_seed(fold_seed, {1}));
    nn::TrainConfig cfg = config;
    cfg.seed = derive_seed(fold_seed, {2});
    auto model = std::make_shared<nn::Model>(nn::train(std::move(fresh), train, cfg).model);
    return [model](const nn::ModelInput& input) { return model->predict(input); };
  };
}

nn::ModelInput to_model_input(std::span<const probe::ContourStack* const> stacks, int dimension) {
  if (stacks.empty()) fail(ErrorCode::invalid_argument, "no stacks");
  nn::ModelInput in;
  in.resolution = stacks.front()->resolution();
  in.dimension = dimension;
  for (const auto* s : stacks) {
    if (s->resolution() != in.resolution)
      fail(ErrorCode::contract, "stacks of one sample must share a resolution");
    for (const auto& v : s->views) in.views.push_back(v.values);
  }
  return in;
}

std::string config_label(const perf::ConfigKey& key) { return perf::to_string(key); }

std::vector<perf::RunRecord> generate_runs(const SooDatasetOptions& options) {
  solve::SooRunPlan plan;
  for (auto f : options.functions)
    for (int d : options.dimensions) plan.configs.push_back({f, d});
  std::sort(plan.configs.begin(), plan.configs.end());
  plan.instances = options.instances;
  plan.master_seed = options.master_seed;
  const auto portfolio = solve::soo_portfolio();
  return solve::generate_perf_dataset(plan, portfolio, options.budget_per_dimension);
}

SooDataset build_soo_dataset(const SooDatasetOptions& options,
                             std::span<const perf::RunRecord> runs) {
  auto table = perf::relert_matrix(perf::build_ert_table(runs), options.penalty_override,
                                   options.unsolved);
  std::vector<probe::ContourStack> stacks;
  stacks.reserve(table.configs.size());
  for (const auto& key : table.configs)
    stacks.push_back(probe_soo_config(key, options.master_seed, options.probe));
  return assemble_soo_dataset(std::move(table), std::move(stacks));
}

SooDataset assemble_soo_dataset(perf::PerfTable table, std::vector<probe::ContourStack> stacks) {
  if (stacks.size() != table.configs.size())
    fail(ErrorCode::data, "one stack per config required");
  SooDataset data;
  data.table = std::move(table);
  data.stacks = std::move(stacks);
  for (std::size_t c = 0; c < data.table.configs.size(); ++c) {
    const probe::ContourStack* s = &data.stacks[c];
    nn::TrainingSample sample;
    sample.input = to_model_input({&s, 1}, data.table.configs[c].dimension);
    sample.target = nn::relert_targets(data.table.relert_row(c), data.table.penalty);
    sample.tag = config_label(data.table.configs[c]);
    data.samples.push_back(std::move(sample));
  }
  return data;
}

double SelectionReport::mean_achieved() const { return meanOf(entries, &SelectionEntry::achieved); }
double SelectionReport::mean_sbs() const { return meanOf(entries, &SelectionEntry::sbs); }
double SelectionReport::mean_vbs() const { return meanOf(entries, &SelectionEntry::vbs); }

SelectionReport run_loocv_soo(const SooDataset& data, const FoldFitter& fitter,
                              const LoocvOptions& options) {
  const auto& table = data.table;
  const std::size_t n = table.configs.size();
  if (n < 2) fail(ErrorCode::protocol, "leave-one-out needs at least two configs");
  if (data.samples.size() != n) fail(ErrorCode::data, "one sample per config required");

  SelectionReport report;
  report.method = options.method;
  report.algorithms = table.algorithms;
  report.sbs = perf::sbs(table);
  const std::size_t sbs_index = *table.algorithm_index(report.sbs);
  report.entries.resize(n);
  std::vector<std::exception_ptr> errors(n);

  auto runFold = [&](std::size_t c) {
    const std::string held_out = data.samples[c].tag;
    std::vector<const nn::TrainingSample*> train;
    for (std::size_t j = 0; j < n; ++j)
      if (j != c) train.push_back(&data.samples[j]);
    for (const auto* s : train)
      if (s->tag == held_out) fail(ErrorCode::internal, "held-out config in its own training set");
    if (options.observer) options.observer(held_out, train);
    const auto predictor = fitter(train, derive_seed(options.master_seed, {kFoldTag, c}));
    SelectionEntry e;
    e.label = held_out;
    e.function = std::string(suite::to_string(table.configs[c].function));
    e.dimension = table.configs[c].dimension;
    e.group = suite::true_group(table.configs[c].function);
    e.predicted = predictor(data.samples[c].input);
    if (e.predicted.size() != table.algorithms.size())
      fail(ErrorCode::contract, "prediction size does not match the portfolio");
    e.chosen = select(e.predicted, SelectMode::minimize);
    const auto row = table.relert_row(c);
    e.achieved = row[e.chosen];
    e.sbs = row[sbs_index];
    e.vbs = *std::min_element(row.begin(), row.end());
    report.entries[c] = std::move(e);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < n; c = next++) {
      try {
        runFold(c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (!errors[c]) continue;
    try {
      std::rethrow_exception(errors[c]);
    } catch (const Error& e) {
      fail(e.code(), "fold " + data.samples[c].tag + ": " + e.what());
    } catch (const std::exception& e) {
      fail(ErrorCode::internal, "fold " + data.samples[c].tag + ": " + e.what());
    }
  }
  return report;
}

std::string moo_family(const std::string& instance) {
  return instance.rfind("zdt", 0) == 0 ? "zdt" : instance;
}

double analytic_best_hv(const suite::ProblemInstance& inst, const perf::Point2& reference) {
  std::vector<perf::Point2> front;
  front.reserve(kFrontSamples);
  const bool segment = inst.id().function == suite::FunctionCode::bi_sphere;
  const auto& a = inst.center_a();
  const auto& b = inst.center_b();
  for (int k = 0; k < kFrontSamples; ++k) {
    const double t = static_cast<double>(k) / (kFrontSamples - 1);
    std::array<double, 2> x;
    if (segment) {
      // Pareto set of two spheres: the segment between their centres.
      x = {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    } else {
      // ZDT Pareto set: second mapped coordinate at 0.
      x = {suite::kDomainLo + t * (suite::kDomainHi - suite::kDomainLo), suite::kDomainLo};
    }
    const auto [f1, f2] = inst.evaluate_moo(x);
    front.push_back({f1, f2});
  }
  return perf::hypervolume_2d(front, reference);
}

suite::ProblemInstance moo_instance(suite::FunctionCode function, std::uint64_t master_seed) {
  return suite::make_instance({suite::ProblemKind::moo, function, 2, 0},
                              suite::instance_seed(master_seed, function, 2, 0));
}

probe::MooStackPair probe_moo_repetition(const suite::ProblemInstance& inst,
                                         const MooDatasetOptions& options, int repetition) {
  Rng rng(derive_seed(options.master_seed, {kMooProbeTag, static_cast<std::uint64_t>(inst.id().function),
                                            static_cast<std::uint64_t>(repetition)}));
  return probe::build_moo_stacks(inst, options.window_scale, rng, options.probe);
}

probe::ContourStack probe_soo_config(const perf::ConfigKey& key, std::uint64_t master_seed,
                                     const probe::ProbeParams& params) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < probe::kViewCount; ++i)
    seeds.push_back(suite::instance_seed(master_seed, key.function, key.dimension, i));
  return probe::build_soo_stack(key.function, key.dimension, seeds, params);
}

namespace {

std::vector<suite::FunctionCode> sortedByName(std::vector<suite::FunctionCode> fs) {
  std::sort(fs.begin(), fs.end(), [](auto x, auto y) { return suite::to_string(x) < suite::to_string(y); });
  return fs;
}

}  // namespace

MooPerfData generate_moo_perf(const MooDatasetOptions& options) {
  if (options.repetitions < 1) fail(ErrorCode::invalid_argument, "repetitions must be >= 1");
  MooPerfData out;
  const auto portfolio = solve::moo_portfolio(options.budget);
  for (auto f : sortedByName(options.functions)) {
    const std::string name(suite::to_string(f));
    const auto inst = moo_instance(f, options.master_seed);
    std::vector<std::vector<perf::Point2>> fronts;
    std::vector<perf::HvRecord> records;
    for (int rep = 0; rep < options.repetitions; ++rep) {
      for (auto config : portfolio) {
        config.seed = derive_seed(options.master_seed,
                                  {kMooRunTag, static_cast<std::uint64_t>(config.preset),
                                   static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(rep)});
        fronts.push_back(solve::run_moo(config, inst, std::nullopt).front);
        records.push_back({config.name(), name, rep, 0.0});
      }
    }
    const auto ref = perf::reference_point(fronts);
    for (std::size_t k = 0; k < records.size(); ++k)
      records[k].hv = perf::hypervolume_2d(fronts[k], ref);
    out.reference[name] = ref;
    out.hv_best[name] = analytic_best_hv(inst, ref);
    out.hv.insert(out.hv.end(), records.begin(), records.end());
  }
  return out;
}

MooDataset build_moo_dataset(const MooDatasetOptions& options) {
  return build_moo_dataset(options, generate_moo_perf(options));
}

MooDataset build_moo_dataset(const MooDatasetOptions& options, MooPerfData perf) {
  MooDataset data;
  data.repetitions = options.repetitions;
  for (auto f : sortedByName(options.functions)) {
    const std::string name(suite::to_string(f));
    if (!perf.hv_best.count(name)) fail(ErrorCode::data, "no hypervolume data for " + name);
    const auto inst = moo_instance(f, options.master_seed);
    data.instances.push_back(name);
    auto& inputs = data.inputs.emplace_back();
    for (int rep = 0; rep < options.repetitions; ++rep) {
      const auto pair = probe_moo_repetition(inst, options, rep);
      const probe::ContourStack* both[2] = {&pair.obj1, &pair.obj2};
      inputs.push_back(to_model_input(both, 2));
    }
  }
  data.hv = std::move(perf.hv);
  data.hv_best = std::move(perf.hv_best);
  data.reference = std::move(perf.reference);
  return data;
}

perf::MooPerf moo_perf(const MooDataset& data) {
  if (data.repetitions < kMooRepetitions)
    fail(ErrorCode::protocol, "the 15/5 split needs 20 repetitions per instance, got " +
                                  std::to_string(data.repetitions));
  return perf::build_moo_perf(data.hv, data.hv_best);
}

std::vector<nn::TrainingSample> moo_training_samples(const MooDataset& data, const perf::MooPerf& perf) {
  std::vector<nn::TrainingSample> samples;
  for (std::size_t i = 0; i < data.instances.size(); ++i) {
    const auto pi = perf.instance_index(data.instances[i]);
    if (!pi) fail(ErrorCode::data, "no performance data for " + data.instances[i]);
    for (int rep = 0; rep < kMooTrainRepetitions; ++rep)
      samples.push_back({data.inputs[i][static_cast<std::size_t>(rep)],
                         nn::relhv_targets(perf.relhv_row(*pi)),
                         data.instances[i] + "/" + std::to_string(rep)});
  }
  return samples;
}

MooExperimentResult run_moo_experiment(const MooDataset& data, const FoldFitter& fitter,
                                       std::uint64_t seed, const std::string& method) {
  MooExperimentResult result;
  result.perf = moo_perf(data);
  const auto& test = result.perf;
  const auto samples = moo_training_samples(data, result.perf);
  std::vector<const nn::TrainingSample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  const auto predictor = fitter(ptrs, derive_seed(seed, {kMooFitTag}));

  auto& report = result.report;
  report.method = method;
  report.algorithms = test.algorithms;
  report.sbs = test.sbs;
  const std::size_t sbs_index = static_cast<std::size_t>(
      std::find(test.algorithms.begin(), test.algorithms.end(), test.sbs) - test.algorithms.begin());
  for (std::size_t i = 0; i < data.instances.size(); ++i) {
    const auto ti = *test.instance_index(data.instances[i]);
    const auto row = test.relhv_row(ti);
    double sum = 0.0;
    for (int rep = kMooTrainRepetitions; rep < kMooRepetitions; ++rep) {
      SelectionEntry e;
      e.label = data.instances[i] + "/" + std::to_string(rep);
      e.function = data.instances[i];
      e.family = moo_family(data.instances[i]);
      e.dimension = 2;
      e.predicted = predictor(data.inputs[i][static_cast<std::size_t>(rep)]);
      if (e.predicted.size() != test.algorithms.size())
        fail(ErrorCode::contract, "prediction size does not match the portfolio");
      e.chosen = select(e.predicted, SelectMode::maximize);
      e.achieved = row[e.chosen];
      e.sbs = row[sbs_index];
      e.vbs = *std::max_element(row.begin(), row.end());
      sum += e.achieved;
      report.entries.push_back(std::move(e));
    }
    result.instance_achieved.push_back(sum / (kMooRepetitions - kMooTrainRepetitions));
  }
  return result;
}

double combine_cells(std::span<const Cell> cells) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& c : cells) {
    sum += c.mean * static_cast<double>(c.count);
    count += c.count;
  }
  if (count == 0) fail(ErrorCode::data, "no configurations to aggregate");
  return sum / static_cast<double>(count);
}

std::vector<Cell> aggregate_report(const SelectionReport& report) {
  const std::pair<std::string, double SelectionEntry::*> methods[] = {
      {report.method, &SelectionEntry::achieved},
      {"SBS", &SelectionEntry::sbs},
      {"VBS", &SelectionEntry::vbs}};
  std::vector<Cell> rows;
  for (const auto& [name, field] : methods) {
    std::map<std::pair<int, int>, Cell> cells;
    for (const auto& e : report.entries) {
      auto& c = cells[{e.dimension, e.group}];
      c.dimension = e.dimension;
      c.group = e.group;
      c.method = name;
      c.mean += e.*field;
      c.count += 1;
    }
    std::vector<Cell> base;
    for (auto& [key, c] : cells) {
      c.mean /= static_cast<double>(c.count);
      base.push_back(c);
    }
    rows.insert(rows.end(), base.begin(), base.end());
    auto rollup = [&](auto keep, int d, int g) {
      std::vector<Cell> part;
      for (const auto& c : base)
        if (keep(c)) part.push_back(c);
      if (part.empty()) return;
      std::size_t count = 0;
      for (const auto& c : part) count += c.count;
      rows.push_back({d, g, name, count, combine_cells(part)});
    };
    std::set<int> dims, groups;
    for (const auto& c : base) {
      dims.insert(c.dimension);
      groups.insert(c.group);
    }
    for (int d : dims) rollup([d](const Cell& c) { return c.dimension == d; }, d, 0);
    for (int g : groups) rollup([g](const Cell& c) { return c.group == g; }, 0, g);
    rollup([](const Cell&) { return true; }, 0, 0);
  }
  return rows;
}

std::vector<Cell> method_cells(std::span<const Cell> rows, const std::string& method) {
  std::vector<Cell> out;
  for (const auto& c : rows)
    if (c.method == method && c.dimension != 0 && c.group != 0) out.push_back(c);
  std::sort(out.begin(), out.end(), [](const Cell& a, const Cell& b) {
    return std::pair(a.dimension, a.group) < std::pair(b.dimension, b.group);
  });
  return out;
}

std::vector<FamilyRow> aggregate_moo(const SelectionReport& report) {
  const auto& entries = report.entries;
  const std::pair<std::string, double SelectionEntry::*> methods[] = {
      {report.method, &SelectionEntry::achieved},
      {"SBS", &SelectionEntry::sbs},
      {"VBS", &SelectionEntry::vbs}};
  std::set<std::string> families;
  for (const auto& e : entries) families.insert(e.family);
  std::vector<FamilyRow> rows;
  for (const auto& [name, field] : methods) {
    for (const auto& fam : families) {
      double s = 0.0;
      int n = 0;
      for (const auto& e : entries)
        if (e.family == fam) {
          s += e.*field;
          ++n;
        }
      rows.push_back({fam, name, s / n});
    }
    rows.push_back({"all", name, meanOf(entries, field)});
  }
  return rows;
}

void write_soo_report(const std::filesystem::path& path, std::span<const Cell> rows) {
  std::ostringstream out;
  out << "dimension,group,method,mean_relert,configs\n";
  for (const auto& c : rows)
    out << cellField(c.dimension) << ',' << cellField(c.group) << ',' << c.method << ','
        << csv::format_double(c.mean) << ',' << c.count << '\n';
  csv::write_text(path, out.str());
}

std::vector<Cell> read_soo_report(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto cd = t.column("dimension"), cg = t.column("group"), cm = t.column("method"),
             cv = t.column("mean_relert"), cn = t.column("configs");
  std::vector<Cell> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = path.string() + ":" + std::to_string(t.line_numbers[i]);
    const auto count = csv::parse_int(r[cn], where);
    if (count < 1) fail(ErrorCode::parse, where + ": configs must be >= 1");
    rows.push_back({parseCellField(r[cd], where), parseCellField(r[cg], where), r[cm],
                    static_cast<std::size_t>(count), csv::parse_double(r[cv], where)});
  }
  return rows;
}

void write_moo_report(const std::filesystem::path& path, std::span<const FamilyRow> rows) {
  std::ostringstream out;
  out << "family,method,mean_relhv\n";
  for (const auto& r : rows) out << r.family << ',' << r.method << ',' << csv::format_double(r.mean) << '\n';
  csv::write_text(path, out.str());
}

void write_selection(const std::filesystem::path& path, const SelectionReport& report) {
  std::ostringstream out;
  out << "method,label,function,family,dimension,group,chosen,achieved,sbs,vbs";
  for (const auto& a : report.algorithms) out << ",pred_" << a;
  out << '\n';
  for (const auto& e : report.entries) {
    if (e.predicted.size() != report.algorithms.size() || e.chosen >= report.algorithms.size())
      fail(ErrorCode::contract, "selection entry " + e.label + " does not match the portfolio");
    out << report.method << ',' << e.label << ',' << e.function << ',' << e.family << ','
        << e.dimension << ',' << e.group << ',' << report.algorithms[e.chosen] << ','
        << csv::format_double(e.achieved) << ',' << csv::format_double(e.sbs) << ','
        << csv::format_double(e.vbs);
    for (double p : e.predicted) out << ',' << csv::format_double(p);
    out << '\n';
  }
  csv::write_text(path, out.str());
}

SelectionReport read_selection(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto c_method = t.column("method"), c_label = t.column("label"), c_fn = t.column("function"),
             c_fam = t.column("family"), c_dim = t.column("dimension"), c_group = t.column("group"),
             c_chosen = t.column("chosen"), c_ach = t.column("achieved"), c_sbs = t.column("sbs"),
             c_vbs = t.column("vbs");
  SelectionReport report;
  std::vector<std::size_t> pred_columns;
  for (std::size_t k = 0; k < t.header.size(); ++k)
    if (t.header[k].rfind("pred_", 0) == 0) {
      report.algorithms.push_back(t.header[k].substr(5));
      pred_columns.push_back(k);
    }
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = path.string() + ":" + std::to_string(t.line_numbers[i]);
    if (i == 0) report.method = r[c_method];
    SelectionEntry e;
    e.label = r[c_label];
    e.function = r[c_fn];
    e.family = r[c_fam];
    e.dimension = static_cast<int>(csv::parse_int(r[c_dim], where));
    e.group = static_cast<int>(csv::parse_int(r[c_group], where));
    auto it = std::find(report.algorithms.begin(), report.algorithms.end(), r[c_chosen]);
    if (it == report.algorithms.end()) fail(ErrorCode::parse, where + ": unknown algorithm " + r[c_chosen]);
    e.chosen = static_cast<std::size_t>(it - report.algorithms.begin());
    e.achieved = csv::parse_double(r[c_ach], where);
    e.sbs = csv::parse_double(r[c_sbs], where);
    e.vbs = csv::parse_double(r[c_vbs], where);
    for (auto k : pred_columns) e.predicted.push_back(csv::parse_double(r[k], where));
    report.entries.push_back(std::move(e));
  }
  return report;
}

void write_moo_reference(const std::filesystem::path& path, const MooPerfData& perf) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, ref] : perf.reference)
    j[name] = {{"reference", {ref[0], ref[1]}}, {"hv_best", perf.hv_best.at(name)}};
  csv::write_text(path, j.dump(2) + "\n");
}

MooPerfData read_moo_perf(const std::filesystem::path& hv_csv, const std::filesystem::path& reference_json) {
  MooPerfData out;
  out.hv = perf::read_hv(hv_csv);
  std::ifstream in(reference_json);
  if (!in) fail(ErrorCode::io, "cannot open " + reference_json.string());
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& [name, v] : j.items()) {
      const auto ref = v.at("reference").get<std::vector<double>>();
      if (ref.size() != 2) fail(ErrorCode::parse, reference_json.string() + ": reference must have 2 values");
      out.reference[name] = {ref[0], ref[1]};
      out.hv_best[name] = v.at("hv_best").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, reference_json.string() + ": " + e.what());
  }
  return out;
}

std::string to_string(TiePolicy p) { return p == TiePolicy::drop ? "drop" : "pratt"; }

TiePolicy parse_tie_policy(const std::string& s) {
  if (s == "drop") return TiePolicy::drop;
  if (s == "pratt") return TiePolicy::pratt;
  fail(ErrorCode::invalid_argument, "unknown tie policy: " + s);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    TiePolicy ties) {
  if (a.size() != b.size()) fail(ErrorCode::invalid_argument, "paired samples differ in length");
  if (a.empty()) fail(ErrorCode::invalid_argument, "paired samples are empty");
  WilcoxonResult res;
  res.ties = ties;
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - b[i];
    if (x != 0.0 || ties == TiePolicy::pratt) d.push_back(x);
  }
  // Average ranks of |d|.
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });
  std::vector<double> rank(d.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  std::vector<double> used;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) continue;
    used.push_back(rank[i]);
    (d[i] > 0.0 ? res.w_plus : res.w_minus) += rank[i];
  }
  res.n_effective = used.size();
  if (used.empty()) {
    res.degenerate = true;
    return res;
  }
  res.w = std::min(res.w_plus, res.w_minus);
  const double total = res.w_plus + res.w_minus;
  if (res.n_effective <= 20) {
    // Ranks are multiples of 1/2; count sign assignments by doubled rank sum.
    std::int64_t sum2 = 0;
    std::vector<std::int64_t> r2;
    for (double r : used) {
      r2.push_back(std::llround(2.0 * r));
      sum2 += r2.back();
    }
    std::vector<double> count(static_cast<std::size_t>(sum2) + 1, 0.0);
    count[0] = 1.0;
    for (auto r : r2)
      for (std::int64_t s = sum2; s >= r; --s) count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r)];
    const std::int64_t w2 = std::llround(2.0 * res.w);
    double hits = 0.0;
    for (std::int64_t s = 0; s <= sum2; ++s)
      if (std::min(s, sum2 - s) <= w2) hits += count[static_cast<std::size_t>(s)];
    res.p = std::min(1.0, hits / std::ldexp(1.0, static_cast<int>(res.n_effective)));
    res.exact = true;
  } else {
    double var = 0.0;
    for (double r : used) var += r * r;
    var /= 4.0;
    const double z = std::min(0.0, (res.w - total / 2.0 + 0.5) / std::sqrt(var));
    res.p = std::min(1.0, std::erfc(-z / std::sqrt(2.0)));
    res.exact = false;
  }
  return res;
}

MethodComparison compare_methods(std::span<const Cell> a, std::span<const Cell> b, TiePolicy ties) {
  if (a.empty() || b.empty()) fail(ErrorCode::data, "no cells to compare");
  std::map<std::pair<int, int>, double> bmap;
  for (const auto& c : b) bmap[{c.dimension, c.group}] = c.mean;
  std::vector<double> va, vb;
  for (const auto& c : a) {
    auto it = bmap.find({c.dimension, c.group});
    if (it == bmap.end())
      fail(ErrorCode::data, "cell d=" + std::to_string(c.dimension) + " g=" + std::to_string(c.group) +
                                " missing for " + b.front().method);
    va.push_back(c.mean);
    vb.push_back(it->second);
  }
  if (va.size() != b.size()) fail(ErrorCode::data, "methods cover different cells");
  MethodComparison m;
  m.method_a = a.front().method;
  m.method_b = b.front().method;
  m.test = wilcoxon_signed_rank(va, vb, ties);
  m.direction = m.test.w_minus > m.test.w_plus ? "a_lower"
                : m.test.w_plus > m.test.w_minus ? "b_lower"
                                                 : "none";
  return m;
}

void write_stats(const std::filesystem::path& path, std::span<const MethodComparison> rows) {
  std::ostringstream out;
  out << "method_a,method_b,W,p,n_effective,tie_policy,direction\n";
  for (const auto& r : rows)
    out << r.method_a << ',' << r.method_b << ',' << csv::format_double(r.test.w) << ','
        << csv::format_double(r.test.p) << ',' << r.test.n_effective << ','
        << to_string(r.test.ties) << ',' << r.direction << '\n';
  csv::write_text(path, out.str());
}

}  // namespace contoursel::harness

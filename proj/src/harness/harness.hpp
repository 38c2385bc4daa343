#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neural/model.hpp"
#include "neural/train.hpp"
#include "perfdata/perfdata.hpp"
#include "prober/prober.hpp"
#include "solvers/solvers.hpp"

namespace contoursel::harness {

enum class SelectMode { minimize, maximize };

// argmin / argmax; ties go to the lowest index. NaN -> selection error.
std::size_t select(std::span<const double> predictions, SelectMode mode);

// Prediction for one input, in target-transform space.
using Predictor = std::function<std::vector<double>(const nn::ModelInput&)>;
// Fits a predictor on the given training samples. Called once per fold.
using FoldFitter = std::function<Predictor(std::span<const nn::TrainingSample* const> train,
                                           std::uint64_t fold_seed)>;

// Trains a fresh model per call.
FoldFitter cnn_fitter(nn::ModelSpec spec, nn::TrainConfig config);

nn::ModelInput to_model_input(std::span<const probe::ContourStack* const> stacks, int dimension);

// Single-objective experiment data: one stack and one target vector per config.
struct SooDatasetOptions {
  std::vector<suite::FunctionCode> functions{suite::kSooFunctions.begin(), suite::kSooFunctions.end()};
  std::vector<int> dimensions{suite::kSooDimensions.begin(), suite::kSooDimensions.end()};
  int instances = 5;
  std::uint64_t master_seed = 1;
  std::int64_t budget_per_dimension = 5000;
  probe::ProbeParams probe;
  perf::UnsolvedPolicy unsolved = perf::UnsolvedPolicy::drop;
  std::optional<double> penalty_override;
};

struct SooDataset {
  perf::PerfTable table;                    // configs align with samples
  std::vector<probe::ContourStack> stacks;  // per config
  std::vector<nn::TrainingSample> samples;  // tag = config label
};

std::string config_label(const perf::ConfigKey& key);

// Runs the solver portfolio and probes every config.
std::vector<perf::RunRecord> generate_runs(const SooDatasetOptions& options);
SooDataset build_soo_dataset(const SooDatasetOptions& options,
                             std::span<const perf::RunRecord> runs);
// Builds samples from existing stacks (configs in table order).
SooDataset assemble_soo_dataset(perf::PerfTable table, std::vector<probe::ContourStack> stacks);

struct SelectionEntry {
  std::string label;     // config label or instance/repetition
  std::string function;  // function or instance name
  std::string family;    // MOO family; empty for SOO
  int dimension = 0;
  int group = 0;
  std::vector<double> predicted;
  std::size_t chosen = 0;
  double achieved = 0.0;
  double sbs = 0.0;
  double vbs = 0.0;
};

struct SelectionReport {
  std::string method;
  std::vector<std::string> algorithms;
  std::string sbs;
  std::vector<SelectionEntry> entries;

  double mean_achieved() const;
  double mean_sbs() const;
  double mean_vbs() const;
};

// Observes each fold's training set before fitting (for leakage checks).
using FoldObserver = std::function<void(const std::string& held_out,
                                        std::span<const nn::TrainingSample* const> train)>;

struct LoocvOptions {
  std::string method = "cnn";
  std::uint64_t master_seed = 1;
  int threads = 1;
  FoldObserver observer;
};

// Leave-one-config-out: fresh predictor per fold, argmin of predicted targets.
SelectionReport run_loocv_soo(const SooDataset& data, const FoldFitter& fitter,
                              const LoocvOptions& options);

// Bi-objective experiment data.
struct MooDatasetOptions {
  std::vector<suite::FunctionCode> functions{suite::kMooFunctions.begin(), suite::kMooFunctions.end()};
  int repetitions = 20;
  std::uint64_t master_seed = 1;
  std::int64_t budget = solve::kMooBudget;
  double window_scale = probe::kMooWindowScale;
  probe::ProbeParams probe;
};

struct MooPerfData {
  std::vector<perf::HvRecord> hv;
  std::map<std::string, double> hv_best;
  std::map<std::string, perf::Point2> reference;
};

// Bi-objective instance of a function under a master seed (instance 0).
suite::ProblemInstance moo_instance(suite::FunctionCode function, std::uint64_t master_seed);
// Contour stacks of one repetition.
probe::MooStackPair probe_moo_repetition(const suite::ProblemInstance& inst,
                                         const MooDatasetOptions& options, int repetition);
// Stack of one single-objective config, views from instances 0..4.
probe::ContourStack probe_soo_config(const perf::ConfigKey& key, std::uint64_t master_seed,
                                     const probe::ProbeParams& params);

// Solver runs only: HV per (algorithm, instance, repetition), reference points
// and analytic best HV.
MooPerfData generate_moo_perf(const MooDatasetOptions& options);

struct MooDataset {
  std::vector<std::string> instances;                // function names
  std::vector<std::vector<nn::ModelInput>> inputs;   // [instance][repetition]
  std::vector<perf::HvRecord> hv;
  std::map<std::string, double> hv_best;
  std::map<std::string, perf::Point2> reference;
  int repetitions = 0;
};

MooDataset build_moo_dataset(const MooDatasetOptions& options);
MooDataset build_moo_dataset(const MooDatasetOptions& options, MooPerfData perf);

// Best attainable HV from a dense sample of the analytic Pareto front.
double analytic_best_hv(const suite::ProblemInstance& inst, const perf::Point2& reference);

std::string moo_family(const std::string& instance);

inline constexpr int kMooTrainRepetitions = 15;
inline constexpr int kMooRepetitions = 20;

struct MooExperimentResult {
  SelectionReport report;      // one entry per held-out repetition
  perf::MooPerf perf;          // relHV per instance from all repetitions
  std::vector<double> instance_achieved;  // mean relHV per instance
};

// Per-instance relHV from the mean HV over every repetition; protocol error
// when fewer than 20 repetitions exist.
perf::MooPerf moo_perf(const MooDataset& data);
// Samples of repetitions 0..14 with the instance's relHV targets.
std::vector<nn::TrainingSample> moo_training_samples(const MooDataset& data, const perf::MooPerf& perf);

// Trains on the contour stacks of repetitions 0..14 of every instance and
// selects on those of 15..19.
MooExperimentResult run_moo_experiment(const MooDataset& data, const FoldFitter& fitter,
                                       std::uint64_t seed, const std::string& method = "cnn");

// Table cell; dimension/group 0 means "all".
struct Cell {
  int dimension = 0;
  int group = 0;
  std::string method;
  std::size_t count = 0;
  double mean = 0.0;
};

// Count-weighted mean of cells.
double combine_cells(std::span<const Cell> cells);

// Rows for the method, SBS and VBS: every (dimension, group) cell, per-dimension
// "all" rows, per-group "all" rows and the overall mean.
std::vector<Cell> aggregate_report(const SelectionReport& report);
// (dimension, group) cells of one method only, sorted.
std::vector<Cell> method_cells(std::span<const Cell> rows, const std::string& method);

struct FamilyRow {
  std::string family;  // "all" for the overall row
  std::string method;
  double mean = 0.0;
};
std::vector<FamilyRow> aggregate_moo(const SelectionReport& report);

void write_soo_report(const std::filesystem::path& path, std::span<const Cell> rows);
std::vector<Cell> read_soo_report(const std::filesystem::path& path);
void write_moo_report(const std::filesystem::path& path, std::span<const FamilyRow> rows);
void write_selection(const std::filesystem::path& path, const SelectionReport& report);
SelectionReport read_selection(const std::filesystem::path& path);

void write_moo_reference(const std::filesystem::path& path, const MooPerfData& perf);
// Reads hv records plus the reference/best-HV sidecar.
MooPerfData read_moo_perf(const std::filesystem::path& hv_csv, const std::filesystem::path& reference_json);

enum class TiePolicy {
  drop,   // zero differences removed before ranking
  pratt,  // zeros ranked with the rest, then their ranks discarded
};
std::string to_string(TiePolicy p);
TiePolicy parse_tie_policy(const std::string& s);

struct WilcoxonResult {
  double w = 0.0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p = 1.0;
  std::size_t n_effective = 0;
  bool exact = true;
  bool degenerate = false;  // every difference is zero
  TiePolicy ties = TiePolicy::drop;
};

// Two-sided test on a - b. Exact for n_effective <= 20, normal approximation
// with continuity correction above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    TiePolicy ties = TiePolicy::drop);

struct MethodComparison {
  std::string method_a;
  std::string method_b;
  WilcoxonResult test;
  std::string direction;  // "a_lower", "b_lower" or "none"
};

// Paired test over the matching (dimension, group) cells of two methods.
MethodComparison compare_methods(std::span<const Cell> a, std::span<const Cell> b,
                                 TiePolicy ties = TiePolicy::drop);

void write_stats(const std::filesystem::path& path, std::span<const MethodComparison> rows);

}  // namespace contoursel::harness

// Acceptance binary: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "harness/harness.hpp"
#include "neural/model.hpp"
#include "neural/train.hpp"
#include "perfdata/perfdata.hpp"
#include "prober/prober.hpp"
#include "suite/suite.hpp"

using namespace contoursel;

namespace {

// Pinned tolerances and limits.
constexpr double kExactTol = 1e-12;
constexpr double kHvOracleTol = 0.01;
constexpr double kParityTol = 0.01;
constexpr double kGradTol = 1e-4;
constexpr double kOverfitMse = 1e-4;
constexpr double kMetricSeconds = 10.0;
constexpr double kGradSeconds = 60.0;
constexpr double kLearnSeconds = 30.0 * 60.0;
constexpr double kMooSeconds = 20.0 * 60.0;
constexpr double kProbeSeconds = 1.0;

constexpr std::uint64_t kMasterSeeds[] = {1, 2, 3};

// Selector settings, as in configs/learnability.json and configs/moo_selection.json.
const std::vector<int> kSelectorChannels = {8, 16, 32};
constexpr double kSelectorLearningRate = 3e-3;
constexpr int kSooEpochs = 200;
constexpr int kMooEpochs = 60;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed sub-checks into one line.
struct Checker {
  Outcome out;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      out.pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }

  Outcome done() {
    std::string s;
    for (const auto& n : notes) s += (s.empty() ? "" : "; ") + n;
    out.detail = s;
    return out;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int threadCount() { return std::max(1u, std::thread::hardware_concurrency()); }

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---- criterion 1 -----------------------------------------------------------

perf::RunRecord run(const std::string& alg, suite::FunctionCode f, int inst, std::int64_t fe, bool ok) {
  return {alg, f, 2, inst, fe, ok};
}

// Fraction of a g x g grid over [lo, ref] dominated by the front, times the box area.
double gridHv(const std::vector<perf::Point2>& pts, const perf::Point2& ref, int g) {
  double lo0 = ref[0], lo1 = ref[1];
  for (const auto& p : pts) {
    lo0 = std::min(lo0, p[0]);
    lo1 = std::min(lo1, p[1]);
  }
  const double w = (ref[0] - lo0) / g, h = (ref[1] - lo1) / g;
  // per column, the lowest f2 among points with f1 <= cell centre
  std::size_t hits = 0;
  for (int i = 0; i < g; ++i) {
    const double x = lo0 + (i + 0.5) * w;
    double best = ref[1];
    for (const auto& p : pts)
      if (p[0] <= x) best = std::min(best, p[1]);
    for (int j = 0; j < g; ++j)
      if (lo1 + (j + 0.5) * h >= best) ++hits;
  }
  return static_cast<double>(hits) * w * h;
}

Outcome metricOracles() {
  using suite::FunctionCode;
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();

  // ERT
  {
    std::vector<perf::RunRecord> r = {run("a", FunctionCode::sphere, 0, 100, true),
                                      run("a", FunctionCode::sphere, 1, 200, false),
                                      run("a", FunctionCode::sphere, 2, 300, true)};
    const auto e = perf::ert(r);
    c.check(e && *e == 300.0, "ert [100,200,300]/[1,0,1] = 300");
    std::vector<perf::RunRecord> all = {run("a", FunctionCode::sphere, 0, 100, true),
                                        run("a", FunctionCode::sphere, 1, 100, true)};
    c.check(perf::ert(all) == 100.0, "ert all succeed = 100");
    std::vector<perf::RunRecord> none = {run("a", FunctionCode::sphere, 0, 100, false)};
    c.check(!perf::ert(none).has_value(), "ert all fail undefined");
  }

  // relERT, penalty, SBS
  {
    std::vector<perf::RunRecord> r = {
        run("a", FunctionCode::sphere, 0, 100, true),    run("b", FunctionCode::sphere, 0, 250, true),
        run("c", FunctionCode::sphere, 0, 999, false),   run("a", FunctionCode::rastrigin, 0, 100, true),
        run("b", FunctionCode::rastrigin, 0, 366903, true), run("c", FunctionCode::rastrigin, 0, 50, true)};
    const auto t = perf::relert_matrix(perf::build_ert_table(r));
    const auto s = *t.config_index({FunctionCode::sphere, 2});
    const auto g = *t.config_index({FunctionCode::rastrigin, 2});
    c.check(t.relert_at(s, 0) == 1.0 && t.relert_at(s, 1) == 2.5, "relert {100,250} -> {1,2.5}");
    // rastrigin: c best at 50, b at 7338.06 -> max finite relERT; a at 2
    const double max_finite = 366903.0 / 50.0;
    c.check(near(t.penalty, 10.0 * max_finite, 1e-9 * max_finite), "penalty = 10 x max finite");
    c.check(t.relert_at(s, 2) == t.penalty, "unsolved entry <- penalty");
    c.check(t.relert_at(g, 2) == 1.0 && t.relert_at(g, 0) == 2.0, "best algorithm per config -> 1");

    std::vector<perf::RunRecord> wide = {run("a", FunctionCode::sphere, 0, 100, true),
                                          run("b", FunctionCode::sphere, 0, 366903, true),
                                          run("c", FunctionCode::sphere, 0, 7, false)};
    const auto p = perf::relert_matrix(perf::build_ert_table(wide));
    c.check(near(p.penalty, perf::kReferencePenalty, 1e-6), "max finite 3669.03 -> penalty 36690.3");

    perf::PerfTable m;
    m.algorithms = {"a", "b"};
    m.configs = {{FunctionCode::sphere, 2}, {FunctionCode::sphere, 3}};
    m.relert = {4.0, 2.0, 6.0, 4.0};
    c.check(perf::sbs(m) == "b", "sbs means {a:5, b:3} -> b");
    m.relert = {3.0, 3.0, 3.0, 3.0};
    c.check(perf::sbs(m) == "a", "sbs tie -> smallest id");
  }

  // hypervolume
  {
    const std::vector<perf::Point2> f = {{1, 3}, {2, 2}, {3, 1}};
    c.check(perf::hypervolume_2d(f, {4, 4}) == 6.0, "hv {(1,3),(2,2),(3,1)} ref (4,4) = 6");
    c.check(std::abs(gridHv(f, {4, 4}, 1000) - 6.0) <= kHvOracleTol * 6.0, "grid oracle agrees on 6");
    c.check(perf::hypervolume_2d(std::vector<perf::Point2>{{1, 1}}, {2, 2}) == 1.0, "hv single point = 1");
    c.check(perf::hypervolume_2d(std::vector<perf::Point2>{{3, 1}}, {2, 2}) == 0.0, "hv outside ref = 0");

    Rng rng(2024);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const int n = 1 + static_cast<int>(rng.below(20));
      std::vector<perf::Point2> pts(static_cast<std::size_t>(n));
      for (auto& p : pts) p = {rng.uniform(0, 1), rng.uniform(0, 1)};
      const perf::Point2 ref{1.1, 1.1};
      const double exact = perf::hypervolume_2d(pts, ref);
      const double grid = gridHv(pts, ref, 1000);
      worst = std::max(worst, std::abs(exact - grid) / grid);
    }
    c.check(worst <= kHvOracleTol, "hv vs grid oracle on 50 fronts");
    c.note("hv grid max rel diff " + fmt("%.2e", worst));
  }

  // relHV
  {
    c.check(near(perf::rel_hv(0.9, 0.8, 0.9), 1.0, kExactTol), "rel_hv hv = vbs -> 1");
    const double at_sbs = perf::rel_hv(0.8, 0.8, 0.9);
    c.check(at_sbs > 0.0 && at_sbs < 1e-6, "rel_hv hv = sbs -> ~0");
    c.check(perf::rel_hv(0.7, 0.8, 0.9) < 0.0, "rel_hv below sbs -> negative");
    c.check(perf::rel_hv(0.8, 0.8, 0.8) == 1.0, "rel_hv collapsed gap -> 1");
  }
  const double s = seconds(t0);
  c.check(s < kMetricSeconds, "runtime < 10 s");
  c.note(fmt("%.2f s", s));
  return c.done();
}

// ---- criterion 2 -----------------------------------------------------------

// Reference per-cell relERT, rows d = 2, 3, 5, 10; columns groups 1..5.
constexpr double kSbsCells[4][5] = {{3.71, 5.80, 6.29, 25.34, 44.95},
                                    {356.10, 4.46, 4.98, 2.63, 66.81},
                                    {11.99, 3.90, 4.21, 4.29, 7.67},
                                    {2.74, 2.16, 2.76, 2.02, 23.64}};
constexpr double kCombined300Cells[4][5] = {{4.12, 11.52, 1.0, 6.20, 4.09},
                                            {6.22, 3.50, 2.92, 3.95, 2.83},
                                            {11.99, 3.90, 4.21, 4.29, 7.67},
                                            {2.74, 2.16, 2.76, 2.02, 23.64}};
// Functions per BBOB group.
constexpr std::size_t kGroupSizes[5] = {5, 4, 5, 5, 5};
constexpr int kTableDims[4] = {2, 3, 5, 10};

std::vector<harness::Cell> tableCells(const double (&v)[4][5], const std::string& method) {
  std::vector<harness::Cell> cells;
  for (int d = 0; d < 4; ++d)
    for (int g = 0; g < 5; ++g) cells.push_back({kTableDims[d], g + 1, method, kGroupSizes[g], v[d][g]});
  return cells;
}

// Two-sided exact p by enumerating every sign assignment of the ranks.
double enumeratedP(const std::vector<double>& diffs) {
  std::vector<double> d;
  for (double x : diffs)
    if (x != 0.0) d.push_back(x);
  std::vector<double> ranks;
  for (double x : d) {
    double below = 0, same = 0;
    for (double y : d) {
      below += std::abs(y) < std::abs(x);
      same += std::abs(y) == std::abs(x);
    }
    ranks.push_back(below + (same + 1) / 2);
  }
  double plus = 0, total = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    total += ranks[i];
    if (d[i] > 0) plus += ranks[i];
  }
  const double w = std::min(plus, total - plus);
  std::size_t hits = 0;
  const std::size_t n = d.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += ranks[i];
    if (std::min(s, total - s) <= w + 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

Outcome tableParity() {
  Checker c;
  const auto sbs = tableCells(kSbsCells, "sbs");
  const auto cnn = tableCells(kCombined300Cells, "combined_300");
  const double sbs_mean = harness::combine_cells(sbs);
  const double cnn_mean = harness::combine_cells(cnn);
  c.check(near(sbs_mean, 30.37, kParityTol), "SBS overall 30.37 +- 0.01");
  c.check(near(cnn_mean, 5.60, kParityTol), "Combined-300 overall 5.60 +- 0.01");
  c.note("SBS " + fmt("%.4f", sbs_mean) + ", Combined-300 " + fmt("%.4f", cnn_mean));

  // hand-enumerated exact p-values (differences a - b)
  struct Hand {
    std::vector<double> d;
    double p;
  };
  const std::vector<Hand> hand = {{{1, 2, 3, 4, 5}, 2.0 / 32},   {{1, -2, 3, 4, 5}, 6.0 / 32},
                                  {{-1, 2, 3, -4, 5}, 20.0 / 32}, {{1, 2, -3, 4}, 10.0 / 16},
                                  {{-1, -2, -3}, 2.0 / 8},        {{1, -1}, 1.0}};
  int exact_ok = 0;
  for (const auto& h : hand) {
    const std::vector<double> zero(h.d.size(), 0.0);
    const auto r = harness::wilcoxon_signed_rank(h.d, zero);
    const bool ok = r.exact && near(r.p, h.p, kExactTol);
    exact_ok += ok;
    c.check(ok, "wilcoxon hand case n=" + std::to_string(h.d.size()));
  }
  // every n <= 5 sign/tie pattern from a small value grid against enumeration
  Rng rng(77);
  int enumerated = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + rng.below(5);
    std::vector<double> a(n), b(n, 0.0), d(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = d[i] = static_cast<double>(rng.below(7)) - 3.0;
    const auto r = harness::wilcoxon_signed_rank(a, b);
    if (r.degenerate) continue;
    ++enumerated;
    if (!near(r.p, enumeratedP(d), kExactTol)) {
      c.check(false, "wilcoxon vs enumeration, trial " + std::to_string(trial));
      break;
    }
  }
  c.note(std::to_string(exact_ok) + "/" + std::to_string(hand.size()) + " hand p-values, " +
         std::to_string(enumerated) + " enumerated cases");
  return c.done();
}

// ---- criterion 3 -----------------------------------------------------------

Outcome gradients() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int checks = 0;
  for (auto v : {nn::Variant::combined, nn::Variant::separate})
    for (int blocks : {0, 1})
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto r = nn::grad_check_random(nn::gradcheck_spec(v, blocks), seed);
        worst = std::max(worst, r.max_relative_error);
        ++checks;
        c.check(r.max_relative_error < kGradTol,
                nn::to_string(v) + " blocks=" + std::to_string(blocks) + " seed=" + std::to_string(seed) +
                    " worst " + r.worst_parameter);
      }
  const double s = seconds(t0);
  c.check(s < kGradSeconds, "runtime < 60 s");
  c.note(std::to_string(checks) + " checks, max rel error " + fmt("%.2e", worst) + ", " + fmt("%.1f s", s));
  return c.done();
}

// ---- criterion 4 -----------------------------------------------------------

std::string fileBytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome probing(const std::filesystem::path& work) {
  Checker c;
  constexpr std::int64_t kExpected = 450000;
  std::size_t configs = 0;
  std::size_t identical = 0;
  for (auto f : suite::kSooFunctions) {
    for (int d : suite::kSooDimensions) {
      ++configs;
      const std::string label = perf::to_string({f, d});
      std::vector<std::int64_t> counts;
      for (int r_out : {300, 128, 64}) {
        const auto s = harness::probe_soo_config({f, d}, 1, {300, r_out, 16});
        counts.push_back(s.evaluations_spent);
      }
      c.check(counts[0] == kExpected, label + " evaluations at r_probe 300");
      c.check(counts[1] == counts[0] && counts[2] == counts[0], label + " counts unchanged by resizing");

      // two independent runs, same seed, written to disk
      const auto a = work / (label + "_a.stack");
      const auto b = work / (label + "_b.stack");
      probe::write_stack(harness::probe_soo_config({f, d}, 7, {}), a);
      probe::write_stack(harness::probe_soo_config({f, d}, 7, {}), b);
      const auto ba = fileBytes(a);
      const bool same = !ba.empty() && ba == fileBytes(b);
      identical += same;
      c.check(same, label + " byte-identical across runs");
    }
  }
  c.note(std::to_string(configs) + " configs x 450000 evaluations; " + std::to_string(identical) + "/" +
         std::to_string(configs) + " byte-identical");
  return c.done();
}

// ---- criterion 5 -----------------------------------------------------------

nn::TrainConfig selectorTraining(int epochs) {
  nn::TrainConfig tc;
  tc.epochs = epochs;
  tc.learning_rate = kSelectorLearningRate;
  tc.augment = true;  // views are i.i.d. slices; their order carries nothing
  return tc;
}

Outcome learnability() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  nn::ModelSpec spec;
  spec.encoder_channels = kSelectorChannels;
  for (auto seed : kMasterSeeds) {
    harness::SooDatasetOptions o;
    o.master_seed = seed;
    o.unsolved = perf::UnsolvedPolicy::keep_penalized;
    o.probe.r_out = 64;
    const auto data = harness::build_soo_dataset(o, harness::generate_runs(o));
    harness::LoocvOptions lo;
    lo.master_seed = seed;
    lo.threads = threadCount();
    const auto rep = harness::run_loocv_soo(data, harness::cnn_fitter(spec, selectorTraining(kSooEpochs)), lo);
    const double cnn = rep.mean_achieved(), sbs = rep.mean_sbs();
    c.check(rep.entries.size() == 32, "seed " + std::to_string(seed) + " has 32 folds");
    c.check(cnn < sbs, "seed " + std::to_string(seed) + " CNN < SBS");
    c.note("seed " + std::to_string(seed) + ": CNN " + fmt("%.2f", cnn) + " SBS " + fmt("%.2f", sbs) + " (" +
           rep.sbs + ") VBS " + fmt("%.2f", rep.mean_vbs()));
  }
  const double s = seconds(t0);
  c.check(s < kLearnSeconds, "runtime < 30 min");
  c.note(fmt("%.0f s", s));
  return c.done();
}

// ---- criterion 6 -----------------------------------------------------------

Outcome overfit() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  harness::SooDatasetOptions o;
  o.functions = {suite::FunctionCode::rosenbrock};
  o.dimensions = {5};
  o.probe.r_out = 64;
  const auto data = harness::build_soo_dataset(o, harness::generate_runs(o));
  nn::ModelSpec spec;  // default r = 64 spec
  nn::TrainConfig tc;
  tc.epochs = 500;
  tc.batch_size = 1;
  tc.augment = false;  // one fixed input to memorise
  tc.seed = 3;
  const auto r = nn::train(nn::Model(spec, 3), std::span<const nn::TrainingSample>(data.samples), tc);
  const double final_loss = r.loss_curve.back();
  const auto pred = r.model.predict(data.samples[0].input);
  double mse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - data.samples[0].target[i];
    mse += e * e / static_cast<double>(pred.size());
  }
  c.check(mse < kOverfitMse, "MSE < 1e-4 within 500 epochs");
  c.note("final MSE " + fmt("%.2e", mse) + " (last epoch loss " + fmt("%.2e", final_loss) + "), " +
         fmt("%.1f s", seconds(t0)));
  return c.done();
}

// ---- criterion 7 -----------------------------------------------------------

Outcome mooPipeline() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  nn::ModelSpec spec;
  spec.variant = nn::Variant::separate;
  spec.objective_count = 2;
  spec.residual_blocks = 1;
  spec.encoder_channels = kSelectorChannels;
  spec.target_transform = nn::TargetTransform::relhv_clip;
  for (auto seed : kMasterSeeds) {
    harness::MooDatasetOptions o;
    o.master_seed = seed;
    o.probe.r_out = 64;
    const auto data = harness::build_moo_dataset(o);
    const std::string tag = "seed " + std::to_string(seed);

    // oracle: knows each instance's relHV row
    harness::FoldFitter oracle = [&](std::span<const nn::TrainingSample* const>, std::uint64_t) -> harness::Predictor {
      const auto perf = harness::moo_perf(data);
      return [&data, perf](const nn::ModelInput& in) {
        for (std::size_t i = 0; i < data.instances.size(); ++i)
          for (const auto& known : data.inputs[i])
            if (known.views == in.views) {
              const auto row = perf.relhv_row(*perf.instance_index(data.instances[i]));
              return std::vector<double>(row.begin(), row.end());
            }
        fail(ErrorCode::internal, "oracle got an unknown input");
      };
    };
    const auto best = harness::run_moo_experiment(data, oracle, seed, "oracle");
    bool oracle_ok = best.instance_achieved.size() == 4;
    for (double v : best.instance_achieved) oracle_ok = oracle_ok && near(v, 1.0, kExactTol);
    c.check(oracle_ok, tag + " oracle relHV 1.0 on every instance");
    c.check(best.report.entries.size() == 20, tag + " 4 instances x 5 held-out repetitions");

    nn::TrainConfig tc = selectorTraining(kMooEpochs);
    const auto res = harness::run_moo_experiment(data, harness::cnn_fitter(spec, tc), seed);
    const double cnn = res.report.mean_achieved(), sbs = res.report.mean_sbs();
    c.check(cnn > 0.0, tag + " selector mean relHV > 0");
    c.check(cnn > sbs, tag + " selector mean relHV > SBS");
    c.note(tag + ": selector " + fmt("%.3f", cnn) + " SBS " + fmt("%.3f", sbs) + " (" + res.perf.sbs + ")");
  }
  const double s = seconds(t0);
  c.check(s < kMooSeconds, "runtime < 20 min");
  c.note(fmt("%.0f s", s));
  return c.done();
}

// ---- criterion 8 -----------------------------------------------------------

Outcome probeTiming() {
  Checker c;
  double worst = 0.0;
  std::string worst_label;
  for (auto f : suite::kSooFunctions) {
    const auto inst = suite::make_instance({suite::ProblemKind::soo, f, 10, 0}, 11);
    Rng rng(5);
    const auto plan = probe::plan_slice(10, rng);
    const auto t0 = std::chrono::steady_clock::now();
    std::int64_t evals = 0;
    auto field = probe::probe_grid(inst, plan, 300, probe::Window::full_domain(), evals);
    field = probe::resize_bilinear(probe::quantize_levels(probe::normalize(std::move(field)), 16), 64);
    const double s = seconds(t0);
    c.check(evals == 90000, perf::to_string({f, 10}) + " 90000 evaluations");
    if (s > worst) {
      worst = s;
      worst_label = perf::to_string({f, 10});
    }
  }
  c.check(worst < kProbeSeconds, "slowest 300x300 probe < 1 s");
  c.note("slowest " + worst_label + " " + fmt("%.3f s", worst));
  return c.done();
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  const auto work = std::filesystem::temp_directory_path() / "contoursel_acceptance";
  std::filesystem::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric oracles", [] { return metricOracles(); }},
      {"table parity and exact wilcoxon", [] { return tableParity(); }},
      {"gradient check", [] { return gradients(); }},
      {"probing fidelity", [&] { return probing(work); }},
      {"end-to-end learnability", [] { return learnability(); }},
      {"overfit sanity", [] { return overfit(); }},
      {"moo pipeline", [] { return mooPipeline(); }},
      {"contour timing", [] { return probeTiming(); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                seconds(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  std::filesystem::remove_all(work);
  return failed == 0 ? 0 : 1;
}

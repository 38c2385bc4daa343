#include "solvers/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace contoursel::solve {

namespace {

constexpr double kLo = suite::kDomainLo;
constexpr double kHi = suite::kDomainHi;
constexpr std::size_t kSubproblems = 40;
constexpr std::int64_t kInitialSamples = 50;
constexpr double kAugmentation = 0.01;

// Counts evaluations and tracks the success condition for one SOO run.
class Budgeted {
 public:
  Budgeted(const suite::ProblemInstance& inst, const SolverConfig& config)
      : inst_(inst), budget_(config.budget), target_(inst.f_opt() + config.target_precision) {}

  double operator()(std::span<const double> x) {
    ++used_;
    const double f = inst_.evaluate_soo(x);
    if (f <= target_) solved_ = true;
    return f;
  }

  bool done() const { return solved_ || used_ >= budget_; }
  bool solved() const { return solved_; }
  std::int64_t used() const { return used_; }

 private:
  const suite::ProblemInstance& inst_;
  std::int64_t budget_;
  double target_;
  std::int64_t used_ = 0;
  bool solved_ = false;
};

void uniformPoint(Rng& rng, std::vector<double>& x) {
  for (double& v : x) v = rng.uniform(kLo, kHi);
}

void randomSearch(Budgeted& f, Rng& rng, int d) {
  std::vector<double> x(static_cast<std::size_t>(d));
  while (!f.done()) {
    uniformPoint(rng, x);
    f(x);
  }
}

void onePlusOneEs(Budgeted& f, Rng& rng, int d) {
  constexpr int kWindow = 10;
  std::vector<double> x(static_cast<std::size_t>(d)), y(x.size());
  uniformPoint(rng, x);
  double fx = f(x);
  double sigma = 2.5;
  int trials = 0, successes = 0;
  while (!f.done()) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::clamp(x[i] + sigma * rng.normal(), kLo, kHi);
    const double fy = f(y);
    ++trials;
    if (fy <= fx) {
      x.swap(y);
      fx = fy;
      ++successes;
    }
    if (trials == kWindow) {
      sigma *= (successes * 5 > kWindow) ? 1.5 : 0.85;
      trials = successes = 0;
    }
  }
}

void compassSearch(Budgeted& f, Rng& rng, int d) {
  std::vector<double> x(static_cast<std::size_t>(d)), y(x.size());
  uniformPoint(rng, x);
  double fx = f(x);
  double step = 2.5;
  while (!f.done()) {
    bool improved = false;
    for (int i = 0; i < d && !f.done(); ++i) {
      for (double sign : {1.0, -1.0}) {
        if (f.done()) break;
        y = x;
        y[i] = std::clamp(x[i] + sign * step, kLo, kHi);
        const double fy = f(y);
        if (fy < fx) {
          x.swap(y);
          fx = fy;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
}

double drawWeight(WeightPreset preset, Rng& rng) {
  switch (preset) {
    case WeightPreset::uniform:
      return rng.uniform();
    case WeightPreset::extremes: {
      const double u = rng.uniform();
      return rng.uniform() < 0.5 ? u * u : 1.0 - u * u;
    }
    case WeightPreset::center:
      return (rng.uniform() + rng.uniform() + rng.uniform()) / 3.0;
  }
  return 0.5;
}

std::string presetName(WeightPreset p) {
  switch (p) {
    case WeightPreset::uniform: return "uniform";
    case WeightPreset::extremes: return "extremes";
    case WeightPreset::center: return "center";
  }
  return "?";
}

// Nondominated archive of (objectives, decision) pairs.
struct Archive {
  std::vector<perf::Point2> f;
  std::vector<std::array<double, 2>> x;

  void insert(const perf::Point2& fy, const std::array<double, 2>& xy) {
    for (const auto& p : f)
      if (perf::dominates(p, fy) || p == fy) return;
    std::size_t keep = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (perf::dominates(fy, f[i])) continue;
      f[keep] = f[i];
      x[keep] = x[i];
      ++keep;
    }
    f.resize(keep);
    x.resize(keep);
    f.push_back(fy);
    x.push_back(xy);
  }
};

}  // namespace

std::string SolverConfig::name() const {
  switch (kind) {
    case SolverKind::random_search: return "random_search";
    case SolverKind::one_plus_one_es: return "one_plus_one_es";
    case SolverKind::compass_search: return "compass_search";
    case SolverKind::moo_random_scalarization: return "scalarization_" + presetName(preset);
  }
  return "?";
}

perf::RunRecord run_soo(const SolverConfig& config, const suite::ProblemInstance& inst) {
  if (!inst.is_soo()) fail(ErrorCode::contract, "run_soo needs a single-objective instance");
  if (config.budget < 1) fail(ErrorCode::invalid_argument, "budget must be >= 1");
  Budgeted f(inst, config);
  Rng rng(config.seed);
  const int d = inst.dimension();
  switch (config.kind) {
    case SolverKind::random_search: randomSearch(f, rng, d); break;
    case SolverKind::one_plus_one_es: onePlusOneEs(f, rng, d); break;
    case SolverKind::compass_search: compassSearch(f, rng, d); break;
    default: fail(ErrorCode::invalid_argument, "not a single-objective solver: " + config.name());
  }
  perf::RunRecord r;
  r.algorithm = config.name();
  r.function = inst.id().function;
  r.dimension = d;
  r.instance = inst.id().instance_index;
  r.evaluations = f.used();
  r.success = f.solved();
  return r;
}

MooRun run_moo(const SolverConfig& config, const suite::ProblemInstance& inst,
               const std::optional<perf::Point2>& reference,
               const std::function<void(std::span<const perf::Point2>)>& observer) {
  if (inst.is_soo()) fail(ErrorCode::contract, "run_moo needs a bi-objective instance");
  if (config.kind != SolverKind::moo_random_scalarization)
    fail(ErrorCode::invalid_argument, "not a bi-objective solver: " + config.name());
  if (config.budget < 1) fail(ErrorCode::invalid_argument, "budget must be >= 1");
  Rng rng(config.seed);
  // One subproblem per weight, drawn once from the preset; each keeps the
  // incumbent with the best normalised Tchebycheff value.
  std::vector<double> weights(kSubproblems);
  for (auto& w : weights) w = drawWeight(config.preset, rng);
  std::sort(weights.begin(), weights.end());
  std::vector<perf::Point2> inc_f;
  std::vector<std::array<double, 2>> inc_x;
  perf::Point2 ideal{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  MooRun run;
  Archive archive;

  // Augmented Tchebycheff: the small sum term breaks ties between weakly
  // dominated points at extreme weights.
  auto tcheby = [&](const perf::Point2& f, double w, const perf::Point2& scale) {
    const double a = (f[0] - ideal[0]) / scale[0], b = (f[1] - ideal[1]) / scale[1];
    return std::max(w * a, (1.0 - w) * b) + kAugmentation * (a + b);
  };
  // Nadir estimate from the two extreme points seen so far.
  perf::Point2 best_f1{std::numeric_limits<double>::infinity(), 0.0};
  perf::Point2 best_f2{0.0, std::numeric_limits<double>::infinity()};
  auto track = [&](const perf::Point2& f) {
    if (f[0] < best_f1[0] || (f[0] == best_f1[0] && f[1] < best_f1[1])) best_f1 = f;
    if (f[1] < best_f2[1] || (f[1] == best_f2[1] && f[0] < best_f2[0])) best_f2 = f;
    ideal = {best_f1[0], best_f2[1]};
  };
  auto scales = [&] {
    return perf::Point2{std::max(best_f2[0] - ideal[0], 1e-12), std::max(best_f1[1] - ideal[1], 1e-12)};
  };
  auto publish = [&] {
    archive = {};
    for (std::size_t k = 0; k < inc_f.size(); ++k) archive.insert(inc_f[k], inc_x[k]);
  };
  auto offer = [&](const perf::Point2& f, const std::array<double, 2>& x) {
    const auto scale = scales();
    for (std::size_t k = 0; k < weights.size(); ++k)
      if (tcheby(f, weights[k], scale) < tcheby(inc_f[k], weights[k], scale)) {
        inc_f[k] = f;
        inc_x[k] = x;
      }
  };
  auto evaluate = [&](const std::array<double, 2>& x) {
    const auto [f1, f2] = inst.evaluate_moo(x);
    ++run.evaluations;
    return perf::Point2{f1, f2};
  };

  // Initial design; incumbents are assigned once every sample is in.
  const std::int64_t initial = std::min<std::int64_t>(config.budget, kInitialSamples);
  Archive start;
  for (std::int64_t i = 0; i < initial; ++i) {
    const std::array<double, 2> x{rng.uniform(kLo, kHi), rng.uniform(kLo, kHi)};
    const auto f = evaluate(x);
    track(f);
    start.insert(f, x);
    if (observer) observer(start.f);
  }
  inc_f.assign(weights.size(), start.f.front());
  inc_x.assign(weights.size(), start.x.front());
  for (std::size_t i = 0; i < start.f.size(); ++i) offer(start.f[i], start.x[i]);

  for (std::size_t k = 0; run.evaluations < config.budget; k = (k + 1) % weights.size()) {
    // Step size shrinks geometrically from 1.0 to 0.01 over the budget.
    const double progress = static_cast<double>(run.evaluations) / static_cast<double>(config.budget);
    const double sigma = std::pow(0.01, progress);
    const auto px = inc_x[k];
    const std::array<double, 2> x{std::clamp(px[0] + sigma * rng.normal(), kLo, kHi),
                                  std::clamp(px[1] + sigma * rng.normal(), kLo, kHi)};
    const auto f = evaluate(x);
    track(f);
    offer(f, x);
    if (observer) {
      publish();
      observer(archive.f);
    }
  }
  publish();
  run.front = archive.f;
  run.decisions = archive.x;
  if (reference) run.hv = perf::hypervolume_2d(run.front, *reference);
  return run;
}

std::vector<SolverConfig> soo_portfolio() {
  return {{SolverKind::compass_search}, {SolverKind::one_plus_one_es}, {SolverKind::random_search}};
}

std::vector<SolverConfig> moo_portfolio(std::int64_t budget) {
  std::vector<SolverConfig> out;
  for (auto preset : {WeightPreset::center, WeightPreset::extremes, WeightPreset::uniform}) {
    SolverConfig c;
    c.kind = SolverKind::moo_random_scalarization;
    c.preset = preset;
    c.budget = budget;
    out.push_back(c);
  }
  return out;
}

std::vector<perf::RunRecord> generate_perf_dataset(const SooRunPlan& plan,
                                                   std::span<const SolverConfig> portfolio,
                                                   std::int64_t budget_per_dimension) {
  std::vector<perf::RunRecord> records;
  records.reserve(plan.configs.size() * static_cast<std::size_t>(plan.instances) * portfolio.size());
  for (const auto& key : plan.configs) {
    for (int i = 0; i < plan.instances; ++i) {
      const auto inst = suite::make_instance({suite::ProblemKind::soo, key.function, key.dimension, i},
                                             suite::instance_seed(plan.master_seed, key.function,
                                                                  key.dimension, i));
      for (const auto& base : portfolio) {
        SolverConfig c = base;
        c.budget = budget_per_dimension * key.dimension;
        c.seed = derive_seed(plan.master_seed, {0x50e, static_cast<std::uint64_t>(c.kind),
                                                static_cast<std::uint64_t>(key.function),
                                                static_cast<std::uint64_t>(key.dimension),
                                                static_cast<std::uint64_t>(i)});
        records.push_back(run_soo(c, inst));
      }
    }
  }
  return records;
}

}  // namespace contoursel::solve

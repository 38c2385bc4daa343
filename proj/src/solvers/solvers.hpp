#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perfdata/perfdata.hpp"
#include "suite/suite.hpp"

namespace contoursel::solve {

enum class SolverKind { random_search, one_plus_one_es, compass_search, moo_random_scalarization };

// Weight distribution of the scalarising solver; each preset is reported as
// its own portfolio member.
enum class WeightPreset { uniform, extremes, center };

struct SolverConfig {
  SolverKind kind = SolverKind::random_search;
  WeightPreset preset = WeightPreset::uniform;  // moo_random_scalarization only
  std::int64_t budget = 10000;
  double target_precision = perf::kTargetPrecision;
  std::uint64_t seed = 0;

  std::string name() const;
};

// Stops at the first point within target precision of f_opt, or at the budget.
perf::RunRecord run_soo(const SolverConfig& config, const suite::ProblemInstance& inst);

struct MooRun {
  std::vector<perf::Point2> front;  // mutually nondominated objective vectors
  std::vector<std::array<double, 2>> decisions;
  std::int64_t evaluations = 0;
  double hv = 0.0;  // 0 when no reference point was given
};

inline constexpr std::int64_t kMooBudget = 20000;

// Keeps one incumbent per weight drawn from the preset; the final set is the
// nondominated subset of the incumbents. `observer` (optional) sees that set
// after every evaluation.
MooRun run_moo(const SolverConfig& config, const suite::ProblemInstance& inst,
               const std::optional<perf::Point2>& reference,
               const std::function<void(std::span<const perf::Point2>)>& observer = {});

// Default portfolios.
std::vector<SolverConfig> soo_portfolio();
std::vector<SolverConfig> moo_portfolio(std::int64_t budget = kMooBudget);

struct SooRunPlan {
  std::vector<perf::ConfigKey> configs;
  int instances = 5;
  std::uint64_t master_seed = 0;
};

// Full cross product configs x instances x portfolio, seeded per
// (solver, config, instance). Each run gets budget_per_dimension * d evaluations.
std::vector<perf::RunRecord> generate_perf_dataset(const SooRunPlan& plan,
                                                   std::span<const SolverConfig> portfolio,
                                                   std::int64_t budget_per_dimension);

}  // namespace contoursel::solve

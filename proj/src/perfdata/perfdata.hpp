#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "suite/suite.hpp"

namespace contoursel::perf {

inline constexpr double kTargetPrecision = 1e-2;
inline constexpr double kRelHvEpsilon = 1e-8;
inline constexpr double kPenaltyFactor = 10.0;
// PAR10 constant of the 12-solver BBOB reference table.
inline constexpr double kReferencePenalty = 36690.3;
inline constexpr double kReferenceInflation = 1.1;

struct RunRecord {
  std::string algorithm;
  suite::FunctionCode function = suite::FunctionCode::sphere;
  int dimension = 2;
  int instance = 0;
  std::int64_t evaluations = 1;
  bool success = false;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct HvRecord {
  std::string algorithm;
  std::string instance;
  int repetition = 0;
  double hv = 0.0;

  friend bool operator==(const HvRecord&, const HvRecord&) = default;
};

struct ConfigKey {
  suite::FunctionCode function = suite::FunctionCode::sphere;
  int dimension = 2;

  friend auto operator<=>(const ConfigKey&, const ConfigKey&) = default;
};

std::string to_string(const ConfigKey& key);

// Sum of evaluations over successes; nullopt when nothing succeeded.
std::optional<double> ert(std::span<const RunRecord> records);

enum class UnsolvedPolicy {
  drop,            // configs without any finite ERT are removed (with a warning)
  keep_penalized,  // such configs stay, every algorithm at the penalty
};

struct PerfTable {
  std::vector<std::string> algorithms;           // sorted
  std::vector<ConfigKey> configs;                // sorted by (function, dimension)
  std::vector<std::optional<double>> ert_values;  // configs x algorithms
  std::vector<double> relert;                    // configs x algorithms
  double penalty = 0.0;
  std::vector<ConfigKey> unsolved;  // configs with no finite ERT
  std::vector<std::string> warnings;

  std::size_t algorithm_count() const { return algorithms.size(); }
  std::size_t config_count() const { return configs.size(); }
  std::optional<std::size_t> config_index(const ConfigKey& key) const;
  std::optional<std::size_t> algorithm_index(const std::string& name) const;

  const std::optional<double>& ert_at(std::size_t c, std::size_t a) const {
    return ert_values[c * algorithms.size() + a];
  }
  double relert_at(std::size_t c, std::size_t a) const { return relert[c * algorithms.size() + a]; }
  std::span<const double> relert_row(std::size_t c) const {
    return {relert.data() + c * algorithms.size(), algorithms.size()};
  }
  bool is_unsolved(const ConfigKey& key) const;
};

// ERT per (function, dimension, algorithm), aggregated over instances.
PerfTable build_ert_table(std::span<const RunRecord> records);

// Fills relert and penalty. Throws data error when no finite ERT exists.
PerfTable relert_matrix(PerfTable table, std::optional<double> penalty_override = std::nullopt,
                        UnsolvedPolicy policy = UnsolvedPolicy::drop);

// Lowest mean relERT; ties go to the lexicographically smallest id.
std::string sbs(const PerfTable& table);
double mean_relert(const PerfTable& table, std::size_t algorithm);

struct VbsSummary {
  double mean = 0.0;
  std::size_t excluded = 0;  // all-penalty configs left out of the mean
};
VbsSummary vbs_mean(const PerfTable& table);

using Point2 = std::array<double, 2>;

bool dominates(const Point2& a, const Point2& b);
std::vector<Point2> nondominated(std::span<const Point2> points);

// Exact 2-D hypervolume for minimisation.
double hypervolume_2d(std::span<const Point2> points, const Point2& ref);

double rel_hv(double hv, double hv_sbs, double hv_vbs, double eps = kRelHvEpsilon);

// Componentwise worst value over every algorithm's final set, inflated by 1.1.
// A pre-specified point is returned unchanged.
Point2 reference_point(std::span<const std::vector<Point2>> fronts,
                       std::optional<Point2> prespecified = std::nullopt);

// Per-instance relative hypervolume. HV values are normalised by hv_best and
// averaged over repetitions before the SBS/VBS gap is formed.
struct MooPerf {
  std::vector<std::string> algorithms;  // sorted
  std::vector<std::string> instances;   // sorted
  std::vector<double> mean_hv;          // instances x algorithms, normalised
  std::vector<double> relhv;            // instances x algorithms
  std::vector<double> hv_sbs;           // per instance
  std::vector<double> hv_vbs;           // per instance
  std::string sbs;

  double relhv_at(std::size_t i, std::size_t a) const { return relhv[i * algorithms.size() + a]; }
  std::span<const double> relhv_row(std::size_t i) const {
    return {relhv.data() + i * algorithms.size(), algorithms.size()};
  }
  std::optional<std::size_t> instance_index(const std::string& name) const;
};

MooPerf build_moo_perf(std::span<const HvRecord> records,
                       const std::map<std::string, double>& hv_best);

// CSV I/O. Headers:
//   runs:   algorithm,function,dimension,instance,evaluations,success
//   hv:     algorithm,instance,repetition,hv
std::vector<RunRecord> read_runs(const std::filesystem::path& path);
void write_runs(const std::filesystem::path& path, std::span<const RunRecord> records);
std::vector<HvRecord> read_hv(const std::filesystem::path& path);
void write_hv(const std::filesystem::path& path, std::span<const HvRecord> records);

// relERT matrix: dimension,group,function,<algorithm...>
void write_relert_matrix(const std::filesystem::path& path, const PerfTable& table);

}  // namespace contoursel::perf

#include "perfdata/perfdata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "common/csv.hpp"
#include "common/error.hpp"

namespace contoursel::perf {

std::string to_string(const ConfigKey& key) {
  return std::string(suite::to_string(key.function)) + "_d" + std::to_string(key.dimension);
}

std::optional<double> ert(std::span<const RunRecord> records) {
  if (records.empty()) fail(ErrorCode::contract, "ERT of an empty record set");
  double evaluations = 0.0;
  int successes = 0;
  for (const auto& r : records) {
    evaluations += static_cast<double>(r.evaluations);
    successes += r.success ? 1 : 0;
  }
  if (successes == 0) return std::nullopt;
  return evaluations / successes;
}

std::optional<std::size_t> PerfTable::config_index(const ConfigKey& key) const {
  auto it = std::lower_bound(configs.begin(), configs.end(), key);
  if (it == configs.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - configs.begin());
}

std::optional<std::size_t> PerfTable::algorithm_index(const std::string& name) const {
  auto it = std::lower_bound(algorithms.begin(), algorithms.end(), name);
  if (it == algorithms.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - algorithms.begin());
}

bool PerfTable::is_unsolved(const ConfigKey& key) const {
  return std::find(unsolved.begin(), unsolved.end(), key) != unsolved.end();
}

PerfTable build_ert_table(std::span<const RunRecord> records) {
  PerfTable table;
  std::set<std::string> algorithms;
  std::set<ConfigKey> configs;
  for (const auto& r : records) {
    algorithms.insert(r.algorithm);
    configs.insert({r.function, r.dimension});
  }
  table.algorithms.assign(algorithms.begin(), algorithms.end());
  table.configs.assign(configs.begin(), configs.end());
  const std::size_t m = table.algorithms.size();
  std::vector<std::vector<RunRecord>> groups(table.configs.size() * m);
  for (const auto& r : records) {
    const auto c = *table.config_index({r.function, r.dimension});
    const auto a = *table.algorithm_index(r.algorithm);
    groups[c * m + a].push_back(r);
  }
  table.ert_values.resize(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].empty()) continue;  // missing runs count as undefined
    table.ert_values[i] = ert(groups[i]);
  }
  return table;
}

PerfTable relert_matrix(PerfTable table, std::optional<double> penalty_override,
                        UnsolvedPolicy policy) {
  const std::size_t m = table.algorithms.size();
  const std::size_t n = table.configs.size();
  table.relert.assign(n * m, std::numeric_limits<double>::quiet_NaN());
  table.unsolved.clear();
  double max_finite = 0.0;
  bool any_finite = false;
  for (std::size_t c = 0; c < n; ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m; ++a)
      if (const auto& e = table.ert_at(c, a)) best = std::min(best, *e);
    if (!std::isfinite(best)) {
      table.unsolved.push_back(table.configs[c]);
      table.warnings.push_back("no algorithm solved " + to_string(table.configs[c]));
      continue;
    }
    any_finite = true;
    for (std::size_t a = 0; a < m; ++a) {
      if (const auto& e = table.ert_at(c, a)) {
        const double rel = *e / best;
        table.relert[c * m + a] = rel;
        max_finite = std::max(max_finite, rel);
      }
    }
  }
  if (!any_finite) fail(ErrorCode::data, "no finite ERT in the whole performance table");
  table.penalty = penalty_override ? *penalty_override : kPenaltyFactor * max_finite;
  for (double& v : table.relert)
    if (std::isnan(v)) v = table.penalty;

  if (policy == UnsolvedPolicy::drop && !table.unsolved.empty()) {
    PerfTable kept = table;
    kept.configs.clear();
    kept.ert_values.clear();
    kept.relert.clear();
    for (std::size_t c = 0; c < n; ++c) {
      if (table.is_unsolved(table.configs[c])) continue;
      kept.configs.push_back(table.configs[c]);
      for (std::size_t a = 0; a < m; ++a) {
        kept.ert_values.push_back(table.ert_at(c, a));
        kept.relert.push_back(table.relert_at(c, a));
      }
    }
    return kept;
  }
  return table;
}

double mean_relert(const PerfTable& table, std::size_t algorithm) {
  double s = 0.0;
  for (std::size_t c = 0; c < table.config_count(); ++c) s += table.relert_at(c, algorithm);
  return s / static_cast<double>(table.config_count());
}

std::string sbs(const PerfTable& table) {
  if (table.algorithms.empty() || table.configs.empty())
    fail(ErrorCode::data, "SBS of an empty performance table");
  std::size_t best = 0;
  double best_mean = mean_relert(table, 0);
  // Algorithms are sorted, so strict improvement keeps the smallest id on ties.
  for (std::size_t a = 1; a < table.algorithm_count(); ++a) {
    const double mean = mean_relert(table, a);
    if (mean < best_mean) {
      best_mean = mean;
      best = a;
    }
  }
  return table.algorithms[best];
}

VbsSummary vbs_mean(const PerfTable& table) {
  VbsSummary out;
  double s = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < table.config_count(); ++c) {
    if (table.is_unsolved(table.configs[c])) {
      ++out.excluded;
      continue;
    }
    const auto row = table.relert_row(c);
    s += *std::min_element(row.begin(), row.end());
    ++counted;
  }
  out.mean = counted ? s / static_cast<double>(counted) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

bool dominates(const Point2& a, const Point2& b) {
  return a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1]);
}

std::vector<Point2> nondominated(std::span<const Point2> points) {
  std::vector<Point2> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Point2> front;
  double best_f2 = std::numeric_limits<double>::infinity();
  for (const auto& p : sorted) {
    if (p[1] < best_f2) {
      front.push_back(p);
      best_f2 = p[1];
    }
  }
  return front;
}

double hypervolume_2d(std::span<const Point2> points, const Point2& ref) {
  std::vector<Point2> inside;
  for (const auto& p : points)
    if (p[0] < ref[0] && p[1] < ref[1]) inside.push_back(p);
  if (inside.empty()) return 0.0;
  const auto front = nondominated(inside);  // ascending f1, descending f2
  double hv = 0.0;
  for (std::size_t i = 0; i < front.size(); ++i) {
    const double next_f1 = i + 1 < front.size() ? front[i + 1][0] : ref[0];
    hv += (next_f1 - front[i][0]) * (ref[1] - front[i][1]);
  }
  return hv;
}

double rel_hv(double hv, double hv_sbs, double hv_vbs, double eps) {
  return (hv - hv_sbs + eps) / (hv_vbs - hv_sbs + eps);
}

Point2 reference_point(std::span<const std::vector<Point2>> fronts,
                       std::optional<Point2> prespecified) {
  if (prespecified) return *prespecified;
  Point2 worst{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (const auto& front : fronts) {
    for (const auto& p : front) {
      worst[0] = std::max(worst[0], p[0]);
      worst[1] = std::max(worst[1], p[1]);
      any = true;
    }
  }
  if (!any) fail(ErrorCode::data, "reference point from an empty set of fronts");
  Point2 ref;
  for (int k = 0; k < 2; ++k) {
    // 1.1x for positive maxima; the margin stays outward for zero or negative ones.
    const double margin = (kReferenceInflation - 1.0) * std::abs(worst[k]);
    ref[k] = worst[k] + (margin > 0.0 ? margin : kReferenceInflation - 1.0);
  }
  return ref;
}

std::optional<std::size_t> MooPerf::instance_index(const std::string& name) const {
  auto it = std::lower_bound(instances.begin(), instances.end(), name);
  if (it == instances.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - instances.begin());
}

MooPerf build_moo_perf(std::span<const HvRecord> records,
                       const std::map<std::string, double>& hv_best) {
  MooPerf perf;
  std::set<std::string> algorithms, instances;
  for (const auto& r : records) {
    algorithms.insert(r.algorithm);
    instances.insert(r.instance);
  }
  if (algorithms.empty()) fail(ErrorCode::data, "no hypervolume records");
  perf.algorithms.assign(algorithms.begin(), algorithms.end());
  perf.instances.assign(instances.begin(), instances.end());
  const std::size_t m = perf.algorithms.size();
  const std::size_t n = perf.instances.size();
  std::vector<double> sums(n * m, 0.0);
  std::vector<int> counts(n * m, 0);
  for (const auto& r : records) {
    const auto i = *perf.instance_index(r.instance);
    const auto a = static_cast<std::size_t>(
        std::lower_bound(perf.algorithms.begin(), perf.algorithms.end(), r.algorithm) -
        perf.algorithms.begin());
    auto best = hv_best.find(r.instance);
    if (best == hv_best.end() || !(best->second > 0.0))
      fail(ErrorCode::data, "missing or non-positive best HV for instance " + r.instance);
    sums[i * m + a] += r.hv / best->second;
    counts[i * m + a] += 1;
  }
  perf.mean_hv.resize(n * m);
  for (std::size_t k = 0; k < n * m; ++k) {
    if (counts[k] == 0)
      fail(ErrorCode::data, "missing HV records for " + perf.instances[k / m] + "/" +
                                perf.algorithms[k % m]);
    perf.mean_hv[k] = sums[k] / counts[k];
  }
  // SBS: highest mean normalised HV over instances; smallest id on ties.
  std::size_t sbs_index = 0;
  double sbs_score = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m; ++a) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += perf.mean_hv[i * m + a];
    if (s > sbs_score) {
      sbs_score = s;
      sbs_index = a;
    }
  }
  perf.sbs = perf.algorithms[sbs_index];
  perf.hv_sbs.resize(n);
  perf.hv_vbs.resize(n);
  perf.relhv.resize(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = perf.mean_hv.data() + i * m;
    perf.hv_sbs[i] = row[sbs_index];
    perf.hv_vbs[i] = *std::max_element(row, row + m);
    for (std::size_t a = 0; a < m; ++a)
      perf.relhv[i * m + a] = rel_hv(row[a], perf.hv_sbs[i], perf.hv_vbs[i]);
  }
  return perf;
}

std::vector<RunRecord> read_runs(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto c_alg = t.column("algorithm"), c_fn = t.column("function"),
             c_dim = t.column("dimension"), c_inst = t.column("instance"),
             c_ev = t.column("evaluations"), c_ok = t.column("success");
  std::vector<RunRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = path.string() + ":" + std::to_string(t.line_numbers[i]);
    RunRecord r;
    r.algorithm = row[c_alg];
    if (r.algorithm.empty()) fail(ErrorCode::parse, where + ": empty algorithm id");
    try {
      r.function = suite::parse_function_code(row[c_fn]);
    } catch (const Error& e) {
      fail(ErrorCode::parse, where + ": " + e.what());
    }
    r.dimension = static_cast<int>(csv::parse_int(row[c_dim], where));
    r.instance = static_cast<int>(csv::parse_int(row[c_inst], where));
    r.evaluations = csv::parse_int(row[c_ev], where);
    if (r.evaluations < 1) fail(ErrorCode::parse, where + ": evaluations must be >= 1");
    const auto ok = row[c_ok];
    if (ok != "0" && ok != "1") fail(ErrorCode::parse, where + ": success must be 0 or 1");
    r.success = ok == "1";
    out.push_back(std::move(r));
  }
  return out;
}

void write_runs(const std::filesystem::path& path, std::span<const RunRecord> records) {
  std::ostringstream out;
  out << "algorithm,function,dimension,instance,evaluations,success\n";
  for (const auto& r : records)
    out << r.algorithm << ',' << suite::to_string(r.function) << ',' << r.dimension << ','
        << r.instance << ',' << r.evaluations << ',' << (r.success ? 1 : 0) << '\n';
  csv::write_text(path, out.str());
}

std::vector<HvRecord> read_hv(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto c_alg = t.column("algorithm"), c_inst = t.column("instance"),
             c_rep = t.column("repetition"), c_hv = t.column("hv");
  std::vector<HvRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = path.string() + ":" + std::to_string(t.line_numbers[i]);
    HvRecord r;
    r.algorithm = row[c_alg];
    r.instance = row[c_inst];
    if (r.algorithm.empty() || r.instance.empty())
      fail(ErrorCode::parse, where + ": empty identifier");
    r.repetition = static_cast<int>(csv::parse_int(row[c_rep], where));
    r.hv = csv::parse_double(row[c_hv], where);
    out.push_back(std::move(r));
  }
  return out;
}

void write_hv(const std::filesystem::path& path, std::span<const HvRecord> records) {
  std::ostringstream out;
  out << "algorithm,instance,repetition,hv\n";
  for (const auto& r : records)
    out << r.algorithm << ',' << r.instance << ',' << r.repetition << ','
        << csv::format_double(r.hv) << '\n';
  csv::write_text(path, out.str());
}

void write_relert_matrix(const std::filesystem::path& path, const PerfTable& table) {
  std::vector<std::size_t> order(table.config_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = table.configs[x];
    const auto& b = table.configs[y];
    const auto ka = std::make_tuple(a.dimension, suite::true_group(a.function), a.function);
    const auto kb = std::make_tuple(b.dimension, suite::true_group(b.function), b.function);
    return ka < kb;
  });
  std::ostringstream out;
  out << "dimension,group,function";
  for (const auto& a : table.algorithms) out << ',' << a;
  out << '\n';
  for (auto c : order) {
    const auto& key = table.configs[c];
    out << key.dimension << ',' << suite::true_group(key.function) << ','
        << suite::to_string(key.function);
    for (std::size_t a = 0; a < table.algorithm_count(); ++a)
      out << ',' << csv::format_double(table.relert_at(c, a));
    out << '\n';
  }
  csv::write_text(path, out.str());
}

}  // namespace contoursel::perf

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "harness/harness.hpp"

using namespace contoursel;
using namespace contoursel::harness;
using suite::FunctionCode;

namespace {

// Enumerates all 2^n sign patterns over the nonzero ranks.
double bruteForceP(std::vector<double> ranks, double w) {
  const std::size_t n = ranks.size();
  double total = 0.0;
  for (double r : ranks) total += r;
  std::size_t hits = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) plus += ranks[i];
    if (std::min(plus, total - plus) <= w + 1e-9) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

// Small real dataset: cheap probes and budgets.
SooDataset smallDataset() {
  SooDatasetOptions o;
  o.functions = {FunctionCode::sphere, FunctionCode::rosenbrock, FunctionCode::griewank};
  o.dimensions = {2, 3};
  o.instances = 2;
  o.budget_per_dimension = 500;
  o.probe = {40, 16, 8};
  o.unsolved = perf::UnsolvedPolicy::keep_penalized;
  const auto runs = generate_runs(o);
  return build_soo_dataset(o, runs);
}

// Looks the held-out sample up by its views: a perfect predictor.
FoldFitter oracleFitter(const SooDataset& data) {
  return [&data](std::span<const nn::TrainingSample* const>, std::uint64_t) -> Predictor {
    return [&data](const nn::ModelInput& in) {
      for (const auto& s : data.samples)
        if (s.input.views == in.views) return s.target;
      fail(ErrorCode::internal, "unknown input");
    };
  };
}

FoldFitter constantFitter(std::vector<double> value) {
  return [value](std::span<const nn::TrainingSample* const>, std::uint64_t) -> Predictor {
    return [value](const nn::ModelInput&) { return value; };
  };
}

}  // namespace

TEST_CASE("selection") {
  CHECK(select(std::vector<double>{3.0, 1.0, 2.0}, SelectMode::minimize) == 1);
  CHECK(select(std::vector<double>{3.0, 1.0, 3.0}, SelectMode::maximize) == 0);
  CHECK(select(std::vector<double>{1.0, 1.0}, SelectMode::minimize) == 0);
  CHECK_THROWS_AS(select(std::vector<double>{1.0, NAN}, SelectMode::minimize), Error);
  CHECK_THROWS_AS(select(std::vector<double>{}, SelectMode::minimize), Error);
}

TEST_CASE("loocv with oracle and constant predictors") {
  const auto data = smallDataset();
  REQUIRE(data.samples.size() == 6);
  LoocvOptions opt;
  opt.method = "oracle";
  const auto oracle = run_loocv_soo(data, oracleFitter(data), opt);
  CHECK(oracle.entries.size() == 6);
  CHECK(oracle.mean_achieved() == doctest::Approx(oracle.mean_vbs()));
  for (const auto& e : oracle.entries) CHECK(e.achieved == e.vbs);

  const auto sbsIndex = *data.table.algorithm_index(perf::sbs(data.table));
  std::vector<double> pref(3, 1.0);
  pref[sbsIndex] = 0.0;
  opt.method = "constant";
  const auto constant = run_loocv_soo(data, constantFitter(pref), opt);
  CHECK(constant.mean_achieved() == doctest::Approx(constant.mean_sbs()));

  opt.threads = 3;
  const auto parallel = run_loocv_soo(data, oracleFitter(data), opt);
  for (std::size_t i = 0; i < parallel.entries.size(); ++i)
    CHECK(parallel.entries[i].chosen == oracle.entries[i].chosen);
}

TEST_CASE("loocv never trains on the held-out config") {
  const auto data = smallDataset();
  std::set<std::string> seen;
  LoocvOptions opt;
  opt.observer = [&](const std::string& held, std::span<const nn::TrainingSample* const> train) {
    seen.insert(held);
    CHECK(train.size() == data.samples.size() - 1);
    for (const auto* s : train) CHECK(s->tag != held);
  };
  run_loocv_soo(data, constantFitter({0, 0, 0}), opt);
  CHECK(seen.size() == data.samples.size());
}

TEST_CASE("fold errors name the fold") {
  const auto data = smallDataset();
  try {
    run_loocv_soo(data, constantFitter({0, 0}), {});
    FAIL("expected contract error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::contract);
    CHECK(std::string(e.what()).find("fold ") != std::string::npos);
  }
}

TEST_CASE("cell aggregation is count weighted and order free") {
  std::vector<Cell> cells{{2, 1, "m", 5, 10.0}, {2, 2, "m", 4, 1.0}};
  CHECK(combine_cells(cells) == doctest::Approx(54.0 / 9));
  std::reverse(cells.begin(), cells.end());
  CHECK(combine_cells(cells) == doctest::Approx(54.0 / 9));

  SelectionReport r;
  r.method = "m";
  r.algorithms = {"a", "b"};
  Rng rng(2);
  for (int i = 0; i < 12; ++i) {
    SelectionEntry e;
    e.label = "c" + std::to_string(i);
    e.dimension = i % 2 ? 2 : 3;
    e.group = 1 + i % 3;
    e.achieved = rng.uniform(1, 10);
    e.sbs = rng.uniform(1, 10);
    e.vbs = 1.0;
    e.predicted = {rng.uniform(), rng.uniform()};
    e.chosen = e.predicted[0] < e.predicted[1] ? 0 : 1;
    r.entries.push_back(e);
  }
  const auto rows = aggregate_report(r);
  auto shuffled = r;
  rng.shuffle(shuffled.entries.begin(), shuffled.entries.end());
  const auto rows2 = aggregate_report(shuffled);
  REQUIRE(rows.size() == rows2.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].mean == doctest::Approx(rows2[i].mean));
  const auto overall = std::find_if(rows.begin(), rows.end(), [](const Cell& c) {
    return c.method == "m" && c.dimension == 0 && c.group == 0;
  });
  REQUIRE(overall != rows.end());
  CHECK(overall->mean == doctest::Approx(r.mean_achieved()));
  CHECK(overall->count == 12);
  CHECK(method_cells(rows, "m").size() == 6);

  const auto dir = std::filesystem::temp_directory_path() / "contoursel_test_harness";
  std::filesystem::create_directories(dir);
  write_soo_report(dir / "report.csv", rows);
  const auto back = read_soo_report(dir / "report.csv");
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].method == rows[i].method);
    CHECK(back[i].count == rows[i].count);
    CHECK(back[i].mean == doctest::Approx(rows[i].mean));
  }
  write_selection(dir / "sel.csv", r);
  const auto sel = read_selection(dir / "sel.csv");
  CHECK(sel.entries.size() == r.entries.size());
  CHECK(sel.mean_achieved() == doctest::Approx(r.mean_achieved()));
}

TEST_CASE("wilcoxon hand examples") {
  const std::vector<double> zero(5, 0.0);
  auto w = wilcoxon_signed_rank(std::vector<double>{1, 2, 3, 4, 5}, zero);
  CHECK(w.w == 0.0);
  CHECK(w.p == doctest::Approx(2.0 / 32));
  w = wilcoxon_signed_rank(std::vector<double>{1, -2, 3, 4, 5}, zero);
  CHECK(w.w == 2.0);
  CHECK(w.p == doctest::Approx(6.0 / 32));
  w = wilcoxon_signed_rank(std::vector<double>{1, -1}, std::vector<double>{0, 0});
  CHECK(w.w == 1.5);
  CHECK(w.p == 1.0);
  w = wilcoxon_signed_rank(std::vector<double>{2, 2, 2}, std::vector<double>{2, 2, 2});
  CHECK(w.degenerate);
  CHECK(w.p == 1.0);
  CHECK(w.n_effective == 0);
  CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST_CASE("wilcoxon tie policies") {
  const std::vector<double> a{0, 1, -2, 3}, b(4, 0.0);
  const auto drop = wilcoxon_signed_rank(a, b, TiePolicy::drop);
  const auto pratt = wilcoxon_signed_rank(a, b, TiePolicy::pratt);
  CHECK(drop.n_effective == 3);
  CHECK(pratt.n_effective == 3);
  CHECK(drop.w == 2.0);   // ranks 1,2,3 -> minus 2
  CHECK(pratt.w == 3.0);  // ranks 2,3,4 -> minus 3
  CHECK(pratt.p == doctest::Approx(bruteForceP({2, 3, 4}, 3.0)));
  CHECK(parse_tie_policy(to_string(TiePolicy::pratt)) == TiePolicy::pratt);
  CHECK_THROWS_AS(parse_tie_policy("zsplit"), Error);
}

TEST_CASE("wilcoxon exact p matches enumeration") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng.below(7));
      b[i] = static_cast<double>(rng.below(7));
    }
    const auto r = wilcoxon_signed_rank(a, b);
    if (r.degenerate) continue;
    // rebuild ranks independently
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i)
      if (a[i] != b[i]) d.push_back(std::abs(a[i] - b[i]));
    std::vector<double> ranks;
    for (double x : d) {
      double below = 0, same = 0;
      for (double y : d) {
        below += y < x;
        same += y == x;
      }
      ranks.push_back(below + (same + 1) / 2);
    }
    CHECK(r.exact);
    CHECK(r.p == doctest::Approx(bruteForceP(ranks, r.w)));
  }
}

TEST_CASE("wilcoxon normal approximation for large samples") {
  std::vector<double> a, b(30, 0.0);
  for (int i = 1; i <= 30; ++i) a.push_back(i % 4 == 0 ? -i : i);
  const auto r = wilcoxon_signed_rank(a, b);
  CHECK_FALSE(r.exact);
  // W- = 4+8+...+28 = 112, mean 232.5, var 30*31*61/24
  const double z = (112 - 232.5 + 0.5) / std::sqrt(30.0 * 31 * 61 / 24);
  CHECK(r.p == doctest::Approx(std::erfc(-z / std::sqrt(2.0))));
}

TEST_CASE("method comparison") {
  std::vector<Cell> a{{2, 1, "x", 1, 1.0}, {2, 2, "x", 1, 2.0}, {3, 1, "x", 1, 3.0}};
  std::vector<Cell> b{{2, 1, "y", 1, 2.0}, {2, 2, "y", 1, 4.0}, {3, 1, "y", 1, 5.0}};
  const auto m = compare_methods(a, b);
  CHECK(m.direction == "a_lower");
  CHECK(m.test.w == 0.0);
  CHECK(compare_methods(a, a).direction == "none");
  b.pop_back();
  CHECK_THROWS_AS(compare_methods(a, b), Error);
}

TEST_CASE("moo protocol needs twenty repetitions") {
  MooDatasetOptions o;
  o.functions = {FunctionCode::zdt1};
  o.repetitions = 3;
  o.budget = 200;
  o.probe = {20, 8, 4};
  const auto data = build_moo_dataset(o);
  CHECK(data.repetitions == 3);
  CHECK_THROWS_AS(moo_perf(data), Error);
}

TEST_CASE("moo experiment with an oracle selector") {
  MooDatasetOptions o;
  o.functions = {FunctionCode::bi_sphere, FunctionCode::zdt1};
  o.repetitions = kMooRepetitions;
  o.budget = 300;
  o.probe = {20, 8, 4};
  const auto data = build_moo_dataset(o);
  const auto perf = moo_perf(data);
  // Knows each instance's relHV row and recognises its inputs.
  FoldFitter oracle = [&](std::span<const nn::TrainingSample* const>, std::uint64_t) -> Predictor {
    return [&](const nn::ModelInput& in) {
      for (std::size_t i = 0; i < data.instances.size(); ++i)
        for (const auto& x : data.inputs[i])
          if (x.views == in.views) {
            const auto row = perf.relhv_row(*perf.instance_index(data.instances[i]));
            return std::vector<double>(row.begin(), row.end());
          }
      fail(ErrorCode::internal, "unknown input");
    };
  };
  const auto r = run_moo_experiment(data, oracle, 1, "oracle");
  CHECK(r.report.entries.size() == 2 * 5);
  for (double v : r.instance_achieved) CHECK(v == doctest::Approx(1.0));
  for (const auto& row : aggregate_moo(r.report))
    if (row.method == "oracle") CHECK(row.mean == doctest::Approx(1.0));
  CHECK(moo_family("zdt2") == "zdt");
  CHECK(moo_family("bi_sphere") == "bi_sphere");
}

#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "prober/prober.hpp"

using namespace contoursel;
using namespace contoursel::probe;

namespace {

ScalarField fieldOf(int r, std::initializer_list<double> v) {
  ScalarField f(r);
  f.values.assign(v);
  return f;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path tempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("contoursel_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("slice plans") {
  Rng rng(1);
  CHECK(plan_slice(2, rng) == SlicePlan{0, 1, 0.0});
  std::map<std::pair<int, int>, int> counts;
  for (int k = 0; k < 10000; ++k) {
    const auto p = plan_slice(3, rng);
    CHECK(p.axis_i < p.axis_j);
    counts[{p.axis_i, p.axis_j}]++;
  }
  REQUIRE(counts.size() == 3);
  for (const auto& [pair, n] : counts) CHECK(std::abs(n / 10000.0 - 1.0 / 3.0) < 0.02);
  CHECK_THROWS_AS(plan_slice(1, rng), Error);
}

TEST_CASE("grid coordinates and budget") {
  // x_opt = 0 is not guaranteed, so read the coordinates back through a sphere
  // of known shift.
  const auto inst = suite::make_instance({suite::ProblemKind::soo, suite::FunctionCode::sphere, 2, 0}, 3);
  std::int64_t evals = 0;
  const auto f = probe_grid(inst, {0, 1, 0.0}, 3, Window::full_domain(), evals);
  CHECK(evals == 9);
  const double coords[3] = {-5.0, 0.0, 5.0};
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) {
      const std::array<double, 2> x{coords[col], coords[row]};
      CHECK(f.at(row, col) == doctest::Approx(inst.evaluate_soo(x)));
    }
  evals = 0;
  probe_grid(inst, {0, 1, 0.0}, 300, Window::full_domain(), evals);
  CHECK(evals == 90000);
}

TEST_CASE("normalize") {
  const auto n = normalize(fieldOf(3, {0, 2, 4, 0, 2, 4, 0, 2, 4}));
  CHECK(n.values[0] == 0.0);
  CHECK(n.values[1] == 0.5);
  CHECK(n.values[2] == 1.0);
  const auto c = normalize(fieldOf(2, {3, 3, 3, 3}));
  for (double v : c.values) CHECK(v == 0.5);
  const auto twice = normalize(n);
  CHECK(twice.values == n.values);
  CHECK_THROWS_AS(normalize(fieldOf(2, {0, NAN, 1, 2})), Error);
  CHECK_THROWS_AS(normalize(fieldOf(2, {0, INFINITY, 1, 2})), Error);
}

TEST_CASE("quantize levels") {
  const auto q = quantize_levels(fieldOf(2, {0.3, 0.9, 0.0, 1.0}), 2);
  CHECK(q.values[0] == 0.25);
  CHECK(q.values[1] == 0.75);
  CHECK(q.values[2] == 0.25);
  CHECK(q.values[3] == 0.75);
  CHECK(quantize_levels(fieldOf(2, {1.0, 0, 0, 0}), 4).values[0] == 0.875);
  const auto id = quantize_levels(fieldOf(2, {0.3, 0.9, 0.1, 0.7}), 0);
  CHECK(id.values == std::vector<double>{0.3, 0.9, 0.1, 0.7});
}

TEST_CASE("bilinear resize") {
  const auto r = resize_bilinear(fieldOf(2, {0, 1, 2, 3}), 3);
  const std::vector<double> expect{0, 0.5, 1, 1, 1.5, 2, 2, 2.5, 3};
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(r.values[i] == doctest::Approx(expect[i]));
  const auto src = fieldOf(3, {1, 7, 2, 9, 4, 4, 0, 3, 8});
  CHECK(resize_bilinear(src, 3).values == src.values);
  const auto big = resize_bilinear(src, 17);
  CHECK(big.at(0, 0) == 1);
  CHECK(big.at(0, 16) == 2);
  CHECK(big.at(16, 0) == 0);
  CHECK(big.at(16, 16) == 8);
  const auto flat = resize_bilinear(fieldOf(2, {0.4, 0.4, 0.4, 0.4}), 9);
  for (double v : flat.values) CHECK(v == doctest::Approx(0.4));
}

TEST_CASE("window sampling") {
  Rng rng(5);
  const Domain d;
  for (int k = 0; k < 10000; ++k) {
    const auto w = sample_window(d, 0.1, rng);
    CHECK(w.side[0] == doctest::Approx(1.0));
    CHECK(w.side[1] == doctest::Approx(1.0));
    CHECK(w.lo[0] >= -5.0);
    CHECK(w.lo[1] >= -5.0);
    CHECK(w.lo[0] + w.side[0] <= 5.0 + 1e-12);
    CHECK(w.lo[1] + w.side[1] <= 5.0 + 1e-12);
  }
  CHECK(sample_window(d, 1.0, rng) == Window::full_domain());
  CHECK_THROWS_AS(sample_window(d, 0.0, rng), Error);
  CHECK_THROWS_AS(sample_window(d, 1.5, rng), Error);
}

TEST_CASE("soo stack budget, range and determinism") {
  const std::array<std::uint64_t, 5> seeds{11, 12, 13, 14, 15};
  ProbeParams p;
  p.r_out = 64;
  const auto a = build_soo_stack(suite::FunctionCode::rastrigin, 5, seeds, p);
  CHECK(a.evaluations_spent == 450000);
  CHECK(a.view_count() == 5);
  CHECK(a.resolution() == 64);
  for (const auto& v : a.views)
    for (double x : v.values) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
  const auto b = build_soo_stack(suite::FunctionCode::rastrigin, 5, seeds, p);
  for (int i = 0; i < 5; ++i) CHECK(a.views[i].values == b.views[i].values);
  p.r_out = 128;
  CHECK(build_soo_stack(suite::FunctionCode::rastrigin, 5, seeds, p).evaluations_spent == 450000);
  CHECK_THROWS_AS(build_soo_stack(suite::FunctionCode::sphere, 2, std::span(seeds).first(4), p), Error);
}

TEST_CASE("moo stacks share windows") {
  const auto inst = suite::make_instance({suite::ProblemKind::moo, suite::FunctionCode::zdt1, 2, 0}, 4);
  Rng rng(8);
  ProbeParams p;
  p.r_probe = 40;
  p.r_out = 16;
  const auto pair = build_moo_stacks(inst, 0.1, rng, p);
  REQUIRE(pair.obj1.view_count() == 5);
  REQUIRE(pair.obj2.view_count() == 5);
  for (int i = 0; i < 5; ++i) CHECK(pair.obj1.sources[i].window == pair.obj2.sources[i].window);
  CHECK(pair.obj1.sources[0].window != pair.obj1.sources[1].window);
  const auto next = build_moo_stacks(inst, 0.1, rng, p);
  CHECK(next.obj1.sources[0].window != pair.obj1.sources[0].window);
}

TEST_CASE("pgm bytes") {
  const auto dir = tempDir("pgm");
  auto f = fieldOf(2, {0.0, 1.0, 0.5, 0.25});
  write_pgm(f, dir / "a.pgm");
  write_pgm(f, dir / "b.pgm");
  const auto bytes = slurp(dir / "a.pgm");
  CHECK(bytes == slurp(dir / "b.pgm"));
  const std::string header = "P5\n2 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 4);
  CHECK(bytes.substr(0, header.size()) == header);
  // Row 0 of the image is the top, i.e. the largest second coordinate (field row 1).
  const auto px = [&](int i) { return static_cast<unsigned char>(bytes[header.size() + i]); };
  CHECK(px(0) == 128);
  CHECK(px(1) == 64);
  CHECK(px(2) == 0);
  CHECK(px(3) == 255);
}

TEST_CASE("stack container round trip") {
  const auto dir = tempDir("stack");
  const std::array<std::uint64_t, 5> seeds{1, 2, 3, 4, 5};
  ProbeParams p;
  p.r_probe = 30;
  p.r_out = 8;
  const auto s = build_soo_stack(suite::FunctionCode::ackley, 10, seeds, p);
  write_stack(s, dir / "s.cstk");
  const auto back = read_stack(dir / "s.cstk");
  CHECK(back.evaluations_spent == s.evaluations_spent);
  REQUIRE(back.view_count() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(back.views[i].values == s.views[i].values);
    CHECK(back.sources[i].slice == s.sources[i].slice);
    CHECK(back.sources[i].seed == s.sources[i].seed);
  }
  const auto meta = sidecar(s, suite::FunctionCode::ackley, 10, p);
  CHECK(meta.at("evaluations_spent") == 5 * 30 * 30);
  CHECK(meta.at("seeds").size() == 5);
  CHECK(meta.at("L") == 16);
  std::ofstream(dir / "bad.cstk") << "nope";
  CHECK_THROWS_AS(read_stack(dir / "bad.cstk"), Error);
}

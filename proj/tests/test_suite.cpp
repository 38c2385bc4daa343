#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "suite/suite.hpp"

using namespace contoursel;
using namespace contoursel::suite;

namespace {

ProblemInstance soo(FunctionCode f, int d, std::uint64_t seed = 7, int index = 0) {
  return make_instance({ProblemKind::soo, f, d, index}, seed);
}

std::vector<double> shifted(const ProblemInstance& inst, std::initializer_list<double> z) {
  std::vector<double> x(z);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += inst.x_opt()[i];
  return x;
}

}  // namespace

TEST_CASE("instances are deterministic per seed") {
  const auto a = soo(FunctionCode::sphere, 5, 11);
  const auto b = soo(FunctionCode::sphere, 5, 11);
  const auto c = soo(FunctionCode::sphere, 5, 12);
  CHECK(std::equal(a.x_opt().begin(), a.x_opt().end(), b.x_opt().begin()));
  CHECK(a.f_opt() == b.f_opt());
  CHECK(a.f_opt() != c.f_opt());
}

TEST_CASE("shift ranges over many seeds") {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto inst = soo(FunctionCode::ellipsoid, 3, s);
    for (double v : inst.x_opt()) {
      CHECK(v >= -4.0);
      CHECK(v <= 4.0);
    }
    CHECK(std::abs(inst.f_opt()) <= 100.0);
  }
}

TEST_CASE("every function attains f_opt at x_opt and nothing lower") {
  Rng rng(3);
  for (auto f : kSooFunctions)
    for (int d : kSooDimensions) {
      const auto inst = soo(f, d, 100 + d);
      std::vector<double> x(inst.x_opt().begin(), inst.x_opt().end());
      CHECK(inst.evaluate_soo(x) == doctest::Approx(inst.f_opt()).epsilon(1e-12));
      for (int k = 0; k < 50; ++k) {
        for (double& v : x) v = rng.uniform(kDomainLo, kDomainHi);
        CHECK(inst.evaluate_soo(x) >= inst.f_opt() - 1e-9);
      }
    }
}

TEST_CASE("closed-form values") {
  constexpr double pi = std::numbers::pi;
  const auto sph = soo(FunctionCode::sphere, 2);
  CHECK(sph.evaluate_soo(shifted(sph, {3.0, 4.0})) == doctest::Approx(25.0 + sph.f_opt()));

  const auto ell = soo(FunctionCode::ellipsoid, 3);
  CHECK(ell.evaluate_soo(shifted(ell, {1.0, 1.0, 1.0})) ==
        doctest::Approx(1.0 + 1e3 + 1e6 + ell.f_opt()));

  const auto ras = soo(FunctionCode::rastrigin, 2);
  const double z0 = 0.25, z1 = -1.5;
  const double ras_expect = 10.0 * (2 - std::cos(2 * pi * z0) - std::cos(2 * pi * z1)) + z0 * z0 + z1 * z1;
  CHECK(ras.evaluate_soo(shifted(ras, {z0, z1})) == doctest::Approx(ras_expect + ras.f_opt()));

  // x = x_opt - 1 gives z = 0 for Rosenbrock: 100*(0-0)^2 + (0-1)^2 = 1.
  const auto ros = soo(FunctionCode::rosenbrock, 2);
  CHECK(ros.evaluate_soo(shifted(ros, {-1.0, -1.0})) == doctest::Approx(1.0 + ros.f_opt()));

  const auto dis = soo(FunctionCode::discus, 3);
  CHECK(dis.evaluate_soo(shifted(dis, {1.0, 2.0, 3.0})) == doctest::Approx(1e6 + 4 + 9 + dis.f_opt()));

  const auto bc = soo(FunctionCode::bent_cigar, 3);
  CHECK(bc.evaluate_soo(shifted(bc, {1.0, 2.0, 3.0})) == doctest::Approx(1 + 1e6 * 13 + bc.f_opt()));

  const auto gri = soo(FunctionCode::griewank, 2);
  const double g_expect = (4.0 + 9.0) / 4000.0 - std::cos(2.0) * std::cos(3.0 / std::sqrt(2.0)) + 1.0;
  CHECK(gri.evaluate_soo(shifted(gri, {2.0, 3.0})) == doctest::Approx(g_expect + gri.f_opt()));

  const auto ack = soo(FunctionCode::ackley, 2);
  const double a_expect = -20.0 * std::exp(-0.2 * std::sqrt((1.0 + 0.25) / 2.0)) -
                          std::exp((std::cos(2 * pi * 1.0) + std::cos(2 * pi * 0.5)) / 2.0) + 20.0 +
                          std::numbers::e;
  CHECK(ack.evaluate_soo(shifted(ack, {1.0, 0.5})) == doctest::Approx(a_expect + ack.f_opt()));
}

TEST_CASE("dimension mismatch is a contract error") {
  const auto inst = soo(FunctionCode::sphere, 3);
  std::vector<double> x(2, 0.0);
  try {
    inst.evaluate_soo(x);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::contract);
  }
}

TEST_CASE("unsupported combinations are invalid problems") {
  auto code_of = [](const ProblemId& id) {
    try {
      make_instance(id, 1);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::internal;
  };
  CHECK(code_of({ProblemKind::soo, FunctionCode::sphere, 4, 0}) == ErrorCode::invalid_problem);
  CHECK(code_of({ProblemKind::moo, FunctionCode::zdt1, 3, 0}) == ErrorCode::invalid_problem);
  CHECK(code_of({ProblemKind::soo, FunctionCode::zdt1, 2, 0}) == ErrorCode::invalid_problem);
  CHECK_THROWS_AS(parse_function_code("schwefel"), Error);
}

TEST_CASE("group mapping") {
  CHECK(true_group(FunctionCode::sphere) == 1);
  CHECK(true_group(FunctionCode::ellipsoid) == 1);
  CHECK(true_group(FunctionCode::rastrigin) == 1);
  CHECK(true_group(FunctionCode::rosenbrock) == 2);
  CHECK(true_group(FunctionCode::discus) == 3);
  CHECK(true_group(FunctionCode::bent_cigar) == 3);
  CHECK(true_group(FunctionCode::griewank) == 4);
  CHECK(true_group(FunctionCode::ackley) == 5);
  CHECK_THROWS_AS(true_group(FunctionCode::zdt2), Error);
}

TEST_CASE("zdt and bi-sphere objectives") {
  const auto z1 = make_instance({ProblemKind::moo, FunctionCode::zdt1, 2, 0}, 5);
  auto at = [&](const ProblemInstance& inst, double u1, double u2) {
    const std::array<double, 2> x{from_unit(u1), from_unit(u2)};
    return inst.evaluate_moo(x);
  };
  auto [a1, a2] = at(z1, 0.0, 0.0);
  CHECK(a1 == doctest::Approx(0.0));
  CHECK(a2 == doctest::Approx(1.0));
  auto [b1, b2] = at(z1, 1.0, 0.0);
  CHECK(b1 == doctest::Approx(1.0));
  CHECK(b2 == doctest::Approx(0.0));
  // g = 1 + 9 * 0.5 = 5.5; f2 = g (1 - sqrt(0.25 / g))
  auto [c1, c2] = at(z1, 0.25, 0.5);
  CHECK(c1 == doctest::Approx(0.25));
  CHECK(c2 == doctest::Approx(5.5 * (1.0 - std::sqrt(0.25 / 5.5))));

  const auto z2 = make_instance({ProblemKind::moo, FunctionCode::zdt2, 2, 0}, 5);
  CHECK(at(z2, 0.5, 0.0).second == doctest::Approx(0.75));
  const auto z3 = make_instance({ProblemKind::moo, FunctionCode::zdt3, 2, 0}, 5);
  CHECK(at(z3, 0.1, 0.0).second ==
        doctest::Approx(1.0 - std::sqrt(0.1) - 0.1 * std::sin(10 * std::numbers::pi * 0.1)));

  const auto bs = make_instance({ProblemKind::moo, FunctionCode::bi_sphere, 2, 0}, 9);
  const auto a = bs.center_a(), b = bs.center_b();
  for (double v : {a[0], a[1], b[0], b[1]}) CHECK(std::abs(v) <= 4.0);
  auto [f1, f2] = bs.evaluate_moo(a);
  CHECK(f1 == doctest::Approx(0.0));
  CHECK(f2 == doctest::Approx((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])));
}

TEST_CASE("zdt1 front samples are mutually nondominated") {
  const auto z1 = make_instance({ProblemKind::moo, FunctionCode::zdt1, 2, 0}, 5);
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k <= 50; ++k) {
    const std::array<double, 2> x{from_unit(k / 50.0), from_unit(0.0)};
    pts.push_back(z1.evaluate_moo(x));
  }
  for (const auto& p : pts)
    for (const auto& q : pts) {
      const bool dom = q.first <= p.first && q.second <= p.second &&
                       (q.first < p.first || q.second < p.second);
      CHECK_FALSE(dom);
    }
}

TEST_CASE("descriptor round trip") {
  const auto inst = soo(FunctionCode::ackley, 10, 77, 3);
  const auto back = from_descriptor(descriptor(inst));
  CHECK(back.id() == inst.id());
  CHECK(back.seed() == inst.seed());
  CHECK(back.f_opt() == inst.f_opt());
  const auto j = descriptor(inst);
  CHECK(j.at("kind") == "SOO");
  CHECK(j.at("function_code") == "ackley");
}

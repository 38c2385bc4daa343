#include "suite/suite.hpp"

#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace contoursel::suite {

namespace {

constexpr std::array<std::string_view, 12> kNames = {
    "sphere", "ellipsoid", "rastrigin", "rosenbrock", "discus", "bent_cigar",
    "griewank", "ackley", "zdt1", "zdt2", "zdt3", "bi_sphere"};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sooValue(FunctionCode code, std::span<const double> z) {
  const std::size_t d = z.size();
  double s = 0.0;
  switch (code) {
    case FunctionCode::sphere:
      for (double v : z) s += v * v;
      return s;
    case FunctionCode::ellipsoid:
      for (std::size_t i = 0; i < d; ++i) {
        const double w = std::pow(10.0, 6.0 * static_cast<double>(i) / static_cast<double>(d - 1));
        s += w * z[i] * z[i];
      }
      return s;
    case FunctionCode::rastrigin: {
      double cos_sum = 0.0;
      for (double v : z) {
        cos_sum += std::cos(kTwoPi * v);
        s += v * v;
      }
      return 10.0 * (static_cast<double>(d) - cos_sum) + s;
    }
    case FunctionCode::rosenbrock:
      // z is already offset by +1, optimum at z = 1.
      for (std::size_t i = 0; i + 1 < d; ++i) {
        const double a = z[i] * z[i] - z[i + 1];
        const double b = z[i] - 1.0;
        s += 100.0 * a * a + b * b;
      }
      return s;
    case FunctionCode::discus:
      s = 1e6 * z[0] * z[0];
      for (std::size_t i = 1; i < d; ++i) s += z[i] * z[i];
      return s;
    case FunctionCode::bent_cigar: {
      double tail = 0.0;
      for (std::size_t i = 1; i < d; ++i) tail += z[i] * z[i];
      return z[0] * z[0] + 1e6 * tail;
    }
    case FunctionCode::griewank: {
      double prod = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        s += z[i] * z[i];
        prod *= std::cos(z[i] / std::sqrt(static_cast<double>(i + 1)));
      }
      return s / 4000.0 - prod + 1.0;
    }
    case FunctionCode::ackley: {
      double cos_sum = 0.0;
      for (double v : z) {
        s += v * v;
        cos_sum += std::cos(kTwoPi * v);
      }
      const double n = static_cast<double>(d);
      return -20.0 * std::exp(-0.2 * std::sqrt(s / n)) - std::exp(cos_sum / n) + 20.0 +
             std::numbers::e;
    }
    default:
      fail(ErrorCode::invalid_problem, "not a single-objective function");
  }
}

}  // namespace

std::string_view to_string(FunctionCode code) { return kNames[static_cast<std::size_t>(code)]; }

FunctionCode parse_function_code(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<FunctionCode>(i);
  fail(ErrorCode::invalid_problem, "unknown function code '" + std::string(name) + "'");
}

ProblemKind kind_of(FunctionCode code) {
  return static_cast<int>(code) >= static_cast<int>(FunctionCode::zdt1) ? ProblemKind::moo
                                                                        : ProblemKind::soo;
}

void validate(const ProblemId& id) {
  if (kind_of(id.function) != id.kind)
    fail(ErrorCode::invalid_problem,
         "function '" + std::string(to_string(id.function)) + "' does not match problem kind");
  if (id.instance_index < 0) fail(ErrorCode::invalid_problem, "negative instance index");
  if (id.kind == ProblemKind::soo) {
    bool ok = false;
    for (int d : kSooDimensions) ok = ok || d == id.dimension;
    if (!ok)
      fail(ErrorCode::invalid_problem, "unsupported dimension " + std::to_string(id.dimension) +
                                           " for " + std::string(to_string(id.function)));
  } else if (id.dimension != 2) {
    fail(ErrorCode::invalid_problem, "bi-objective problems are fixed to d=2");
  }
}

ProblemInstance make_instance(const ProblemId& id, std::uint64_t seed) {
  validate(id);
  ProblemInstance inst;
  inst.id_ = id;
  inst.seed_ = seed;
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(id.function),
                             static_cast<std::uint64_t>(id.dimension),
                             static_cast<std::uint64_t>(id.instance_index)}));
  if (id.kind == ProblemKind::soo) {
    inst.x_opt_.resize(static_cast<std::size_t>(id.dimension));
    for (auto& v : inst.x_opt_) v = rng.uniform(-4.0, 4.0);
    inst.f_opt_ = rng.uniform(-100.0, 100.0);
  } else if (id.function == FunctionCode::bi_sphere) {
    for (auto& v : inst.center_a_) v = rng.uniform(-4.0, 4.0);
    for (auto& v : inst.center_b_) v = rng.uniform(-4.0, 4.0);
  }
  return inst;
}

double ProblemInstance::evaluate_soo(std::span<const double> x) const {
  if (id_.kind != ProblemKind::soo) fail(ErrorCode::contract, "evaluate_soo on a bi-objective instance");
  if (x.size() != x_opt_.size())
    fail(ErrorCode::contract, "dimension mismatch: expected " + std::to_string(x_opt_.size()) +
                                  ", got " + std::to_string(x.size()));
  // d <= 10, so a fixed stack buffer avoids allocation in the probing loop.
  std::array<double, 16> z{};
  const double offset = id_.function == FunctionCode::rosenbrock ? 1.0 : 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - x_opt_[i] + offset;
  return sooValue(id_.function, std::span<const double>(z.data(), x.size())) + f_opt_;
}

std::pair<double, double> ProblemInstance::evaluate_moo(std::span<const double> x) const {
  if (id_.kind != ProblemKind::moo) fail(ErrorCode::contract, "evaluate_moo on a single-objective instance");
  if (x.size() != 2)
    fail(ErrorCode::contract, "dimension mismatch: expected 2, got " + std::to_string(x.size()));
  if (id_.function == FunctionCode::bi_sphere) {
    const double a0 = x[0] - center_a_[0], a1 = x[1] - center_a_[1];
    const double b0 = x[0] - center_b_[0], b1 = x[1] - center_b_[1];
    return {a0 * a0 + a1 * a1, b0 * b0 + b1 * b1};
  }
  const double u1 = to_unit(x[0]);
  const double u2 = to_unit(x[1]);
  const double g = 1.0 + 9.0 * u2;
  const double f1 = u1;
  const double ratio = f1 / g;
  switch (id_.function) {
    case FunctionCode::zdt1:
      return {f1, g * (1.0 - std::sqrt(ratio))};
    case FunctionCode::zdt2:
      return {f1, g * (1.0 - ratio * ratio)};
    case FunctionCode::zdt3:
      return {f1, g * (1.0 - std::sqrt(ratio) - ratio * std::sin(10.0 * std::numbers::pi * f1))};
    default:
      fail(ErrorCode::internal, "unhandled bi-objective function");
  }
}

int true_group(FunctionCode code) {
  switch (code) {
    case FunctionCode::sphere:
    case FunctionCode::ellipsoid:
    case FunctionCode::rastrigin:
      return 1;
    case FunctionCode::rosenbrock:
      return 2;
    case FunctionCode::discus:
    case FunctionCode::bent_cigar:
      return 3;
    case FunctionCode::griewank:
      return 4;
    case FunctionCode::ackley:
      return 5;
    default:
      fail(ErrorCode::invalid_problem,
           "no function group for bi-objective '" + std::string(to_string(code)) + "'");
  }
}

std::uint64_t instance_seed(std::uint64_t master, FunctionCode function, int dimension, int index) {
  return derive_seed(master, {0x1257, static_cast<std::uint64_t>(function),
                              static_cast<std::uint64_t>(dimension),
                              static_cast<std::uint64_t>(index)});
}

nlohmann::json descriptor(const ProblemInstance& inst) {
  const auto& id = inst.id();
  return {{"kind", id.kind == ProblemKind::soo ? "SOO" : "MOO"},
          {"function_code", to_string(id.function)},
          {"dimension", id.dimension},
          {"instance_index", id.instance_index},
          {"seed", inst.seed()}};
}

ProblemInstance from_descriptor(const nlohmann::json& j) {
  try {
    ProblemId id;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "SOO")
      id.kind = ProblemKind::soo;
    else if (kind == "MOO")
      id.kind = ProblemKind::moo;
    else
      fail(ErrorCode::invalid_problem, "unknown problem kind '" + kind + "'");
    id.function = parse_function_code(j.at("function_code").get<std::string>());
    id.dimension = j.at("dimension").get<int>();
    id.instance_index = j.at("instance_index").get<int>();
    return make_instance(id, j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, std::string("bad instance descriptor: ") + e.what());
  }
}

}  // namespace contoursel::suite

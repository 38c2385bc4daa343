#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace contoursel::suite {

enum class ProblemKind { soo, moo };

enum class FunctionCode {
  sphere,
  ellipsoid,
  rastrigin,
  rosenbrock,
  discus,
  bent_cigar,
  griewank,
  ackley,
  zdt1,
  zdt2,
  zdt3,
  bi_sphere,
};

inline constexpr std::array<FunctionCode, 8> kSooFunctions = {
    FunctionCode::sphere,     FunctionCode::ellipsoid, FunctionCode::rastrigin,
    FunctionCode::rosenbrock, FunctionCode::discus,    FunctionCode::bent_cigar,
    FunctionCode::griewank,   FunctionCode::ackley};

inline constexpr std::array<FunctionCode, 4> kMooFunctions = {
    FunctionCode::zdt1, FunctionCode::zdt2, FunctionCode::zdt3, FunctionCode::bi_sphere};

inline constexpr std::array<int, 4> kSooDimensions = {2, 3, 5, 10};

inline constexpr double kDomainLo = -5.0;
inline constexpr double kDomainHi = 5.0;

std::string_view to_string(FunctionCode code);
FunctionCode parse_function_code(std::string_view name);  // throws invalid_problem
ProblemKind kind_of(FunctionCode code);

struct ProblemId {
  ProblemKind kind = ProblemKind::soo;
  FunctionCode function = FunctionCode::sphere;
  int dimension = 2;
  int instance_index = 0;

  friend bool operator==(const ProblemId&, const ProblemId&) = default;
};

// Immutable shifted problem instance. Evaluation is pure.
class ProblemInstance {
 public:
  const ProblemId& id() const { return id_; }
  std::uint64_t seed() const { return seed_; }
  int dimension() const { return id_.dimension; }
  bool is_soo() const { return id_.kind == ProblemKind::soo; }

  // Decision-space shift (SOO); empty for MOO instances.
  std::span<const double> x_opt() const { return x_opt_; }
  // Objective-space shift (SOO only; 0 for MOO).
  double f_opt() const { return f_opt_; }

  // bi_sphere centres; zero for other functions.
  const std::array<double, 2>& center_a() const { return center_a_; }
  const std::array<double, 2>& center_b() const { return center_b_; }

  double evaluate_soo(std::span<const double> x) const;
  std::pair<double, double> evaluate_moo(std::span<const double> x) const;

  friend ProblemInstance make_instance(const ProblemId& id, std::uint64_t seed);

 private:
  ProblemId id_;
  std::uint64_t seed_ = 0;
  std::vector<double> x_opt_;
  double f_opt_ = 0.0;
  std::array<double, 2> center_a_{};
  std::array<double, 2> center_b_{};
};

// Deterministic per (id, seed). Throws invalid_problem on unsupported
// (function, dimension) combinations.
ProblemInstance make_instance(const ProblemId& id, std::uint64_t seed);

void validate(const ProblemId& id);

// Function group (1..5) of an SOO function. Throws invalid_problem for MOO codes.
int true_group(FunctionCode code);
inline constexpr int kGroupCount = 5;

// Maps a toolkit-domain coordinate in [-5,5] onto the ZDT unit interval.
inline double to_unit(double x) { return (x - kDomainLo) / (kDomainHi - kDomainLo); }
inline double from_unit(double u) { return kDomainLo + u * (kDomainHi - kDomainLo); }

// Seed of instance i of (function, dimension) under an experiment master
// seed; probing and solver runs use the same instances.
std::uint64_t instance_seed(std::uint64_t master, FunctionCode function, int dimension, int index);

// Instance descriptor {kind, function_code, dimension, instance_index, seed}.
nlohmann::json descriptor(const ProblemInstance& inst);
ProblemInstance from_descriptor(const nlohmann::json& j);

}  // namespace contoursel::suite

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "common/rng.hpp"
#include "suite/suite.hpp"

namespace contoursel::probe {

// r x r field, row-major; row index runs along the second sliced coordinate
// (ascending), column index along the first.
struct ScalarField {
  int resolution = 0;
  std::vector<double> values;
  double raw_min = 0.0;
  double raw_max = 0.0;

  ScalarField() = default;
  explicit ScalarField(int r) : resolution(r), values(static_cast<std::size_t>(r) * r, 0.0) {}

  double& at(int row, int col) { return values[static_cast<std::size_t>(row) * resolution + col]; }
  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * resolution + col];
  }
};

struct SlicePlan {
  int axis_i = 0;
  int axis_j = 1;
  double fixed_value = 0.0;

  friend bool operator==(const SlicePlan&, const SlicePlan&) = default;
};

struct Window {
  std::array<double, 2> lo{suite::kDomainLo, suite::kDomainLo};
  std::array<double, 2> side{suite::kDomainHi - suite::kDomainLo, suite::kDomainHi - suite::kDomainLo};

  static Window full_domain() { return {}; }
  friend bool operator==(const Window&, const Window&) = default;
};

struct Domain {
  std::array<double, 2> lo{suite::kDomainLo, suite::kDomainLo};
  std::array<double, 2> hi{suite::kDomainHi, suite::kDomainHi};
};

// Where one view of a stack came from.
struct ViewSource {
  int instance_index = 0;
  std::uint64_t seed = 0;
  SlicePlan slice;
  Window window;
};

inline constexpr int kViewCount = 5;
inline constexpr double kMooWindowScale = 0.1;

struct ContourStack {
  std::vector<ScalarField> views;
  std::vector<ViewSource> sources;
  std::int64_t evaluations_spent = 0;

  int resolution() const { return views.empty() ? 0 : views.front().resolution; }
  int view_count() const { return static_cast<int>(views.size()); }
};

struct ProbeParams {
  int r_probe = 300;
  int r_out = 64;
  int levels = 16;  // 0 keeps the continuous field
};

SlicePlan plan_slice(int dimension, Rng& rng);

// Raw objective values on the grid; adds r*r to `evaluations`.
ScalarField probe_grid(const suite::ProblemInstance& inst, const SlicePlan& plan, int r,
                       const Window& window, std::int64_t& evaluations);

// One field per objective over the same grid; adds r*r to `evaluations`.
std::pair<ScalarField, ScalarField> probe_grid_moo(const suite::ProblemInstance& inst, int r,
                                                   const Window& window,
                                                   std::int64_t& evaluations);

ScalarField normalize(ScalarField field);
ScalarField quantize_levels(ScalarField field, int levels);
ScalarField resize_bilinear(const ScalarField& field, int r_out);

Window sample_window(const Domain& domain, double scale, Rng& rng);

// Probe -> normalize -> quantize -> resize, one view per instance seed.
// Instance i is make_instance({soo, f, d, i}, seeds[i]); its slice is drawn
// from a stream derived from seeds[i].
ContourStack build_soo_stack(suite::FunctionCode function, int dimension,
                             std::span<const std::uint64_t> seeds, const ProbeParams& params);

struct MooStackPair {
  ContourStack obj1;
  ContourStack obj2;
};

MooStackPair build_moo_stacks(const suite::ProblemInstance& inst, double scale, Rng& rng,
                              const ProbeParams& params);

void write_pgm(const ScalarField& field, const std::filesystem::path& path);

// Stack container: binary payload plus JSON sidecar metadata.
void write_stack(const ContourStack& stack, const std::filesystem::path& path);
ContourStack read_stack(const std::filesystem::path& path);

nlohmann::json sidecar(const ContourStack& stack, suite::FunctionCode function, int dimension,
                       const ProbeParams& params);

}  // namespace contoursel::probe

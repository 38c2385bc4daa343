#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "harness/harness.hpp"
#include "neural/model.hpp"
#include "neural/train.hpp"
#include "perfdata/perfdata.hpp"
#include "prober/prober.hpp"
#include "suite/suite.hpp"

namespace contoursel::cli {

enum class Protocol { loocv, moo_split };

std::string to_string(Protocol p);

// Environment variable that replaces output_dir when set.
inline constexpr const char* kOutputRootEnv = "CONTOURSEL_OUTPUT_ROOT";

// Optional input overrides; empty means the default file under output_dir.
struct Paths {
  std::string runs;
  std::string hv;
  std::string model;
  std::string selection;
  std::string report_a;
  std::string report_b;
};

struct ExperimentConfig {
  Protocol protocol = Protocol::loocv;
  std::uint64_t seed = 1;
  std::string output_dir = "contoursel_out";
  int threads = 1;

  std::vector<suite::FunctionCode> functions{suite::kSooFunctions.begin(), suite::kSooFunctions.end()};
  std::vector<int> dimensions{suite::kSooDimensions.begin(), suite::kSooDimensions.end()};
  int instances = 5;
  std::vector<suite::FunctionCode> moo_functions{suite::kMooFunctions.begin(),
                                                 suite::kMooFunctions.end()};

  probe::ProbeParams probe;
  double window_scale = probe::kMooWindowScale;

  std::int64_t budget_per_dimension = 5000;
  std::int64_t moo_budget = 20000;
  int repetitions = harness::kMooRepetitions;

  perf::UnsolvedPolicy unsolved = perf::UnsolvedPolicy::keep_penalized;
  std::optional<double> penalty_override;

  nn::ModelSpec model;
  nn::TrainConfig train;
  harness::TiePolicy tie_policy = harness::TiePolicy::drop;
  Paths paths;

  std::filesystem::path output_root() const;  // honours the env override
  harness::SooDatasetOptions soo_options() const;
  harness::MooDatasetOptions moo_options() const;
};

// Defaults per protocol: the bi-objective split uses a two-objective separate
// model with a residual block and clipped relHV targets.
ExperimentConfig default_config(Protocol protocol = Protocol::loocv);

nlohmann::json to_json(const ExperimentConfig& c);

// Missing keys take defaults of the document's protocol; unknown keys are
// rejected with a config error.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// JSON merge patch applied on top of the config's full JSON form.
ExperimentConfig apply_patch(const ExperimentConfig& c, const nlohmann::json& patch);

}  // namespace contoursel::cli

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "neural/model.hpp"

namespace contoursel::nn {

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 200;
  int batch_size = 8;
  std::uint64_t seed = 0;
  // Random view order per sample and epoch.
  bool augment = true;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct TrainingSample {
  ModelInput input;
  std::vector<double> target;  // already in target-transform space
  std::string tag;             // provenance label, e.g. the held-in config
};

struct TrainResult {
  Model model;
  std::vector<double> loss_curve;  // mean per-sample loss of each epoch
};

// Deterministic given config.seed. Throws a training error on non-finite loss.
TrainResult train(Model model, std::span<const TrainingSample* const> data,
                  const TrainConfig& config);
TrainResult train(Model model, std::span<const TrainingSample> data, const TrainConfig& config);

// log10(relERT), clipped to [0, log10(penalty)].
std::vector<double> relert_targets(std::span<const double> relert, double penalty);
// relHV clipped to [-2, 2].
std::vector<double> relhv_targets(std::span<const double> relhv);

}  // namespace contoursel::nn

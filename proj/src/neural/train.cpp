#include "neural/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace contoursel::nn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) fail(ErrorCode::invalid_argument, "learning_rate must be > 0");
  if (epochs < 1) fail(ErrorCode::invalid_argument, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorCode::invalid_argument, "batch_size must be >= 1");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"optimizer", c.optimizer == OptimizerKind::adam ? "adam" : "sgd"},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"augment", c.augment}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {"learning_rate", "optimizer", "beta1",
                                              "beta2",         "epsilon",   "epochs",
                                              "batch_size",    "seed",      "augment"};
  if (!j.is_object()) fail(ErrorCode::parse, "train config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kKeys.count(key)) fail(ErrorCode::config, "unknown train config key '" + key + "'");
  TrainConfig c;
  try {
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("optimizer")) {
      const auto o = j.at("optimizer").get<std::string>();
      if (o == "adam")
        c.optimizer = OptimizerKind::adam;
      else if (o == "sgd")
        c.optimizer = OptimizerKind::sgd;
      else
        fail(ErrorCode::config, "unknown optimizer '" + o + "'");
    }
    if (j.contains("beta1")) c.beta1 = j.at("beta1").get<double>();
    if (j.contains("beta2")) c.beta2 = j.at("beta2").get<double>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("augment")) c.augment = j.at("augment").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, std::string("bad train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainResult train(Model model, std::span<const TrainingSample* const> data,
                  const TrainConfig& config) {
  config.validate();
  if (data.empty()) fail(ErrorCode::training, "empty training set");
  const auto& spec = model.spec();
  Rng rng(derive_seed(config.seed, {0x7a1}));

  std::vector<std::vector<double>> m1, m2;
  for (const auto& p : model.params()) {
    m1.emplace_back(p.value.size(), 0.0);
    m2.emplace_back(p.value.size(), 0.0);
  }
  long step = 0;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> views(static_cast<std::size_t>(spec.view_count));

  TrainResult result{std::move(model), {}};
  Model& net = result.model;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      net.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const auto& sample = *data[order[i]];
        double loss;
        if (config.augment) {
          std::iota(views.begin(), views.end(), 0);
          rng.shuffle(views.begin(), views.end());
          loss = net.accumulate_gradient(
              Model::permute_views(sample.input, views, spec.objective_count), sample.target);
        } else {
          loss = net.accumulate_gradient(sample.input, sample.target);
        }
        if (!std::isfinite(loss))
          fail(ErrorCode::training, "non-finite loss at epoch " + std::to_string(epoch));
        epoch_loss += loss;
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      auto& params = net.params();
      for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = params[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
          const double g = p.grad.values[i] * scale;
          if (config.optimizer == OptimizerKind::sgd) {
            p.value.values[i] -= config.learning_rate * g;
            continue;
          }
          m1[k][i] = config.beta1 * m1[k][i] + (1.0 - config.beta1) * g;
          m2[k][i] = config.beta2 * m2[k][i] + (1.0 - config.beta2) * g * g;
          const double mhat = m1[k][i] / bc1;
          const double vhat = m2[k][i] / bc2;
          p.value.values[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
      }
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(data.size()));
  }
  net.zero_grad();
  return result;
}

TrainResult train(Model model, std::span<const TrainingSample> data, const TrainConfig& config) {
  std::vector<const TrainingSample*> ptrs;
  ptrs.reserve(data.size());
  for (const auto& s : data) ptrs.push_back(&s);
  return train(std::move(model), ptrs, config);
}

std::vector<double> relert_targets(std::span<const double> relert, double penalty) {
  const double top = std::log10(std::max(penalty, 1.0));
  std::vector<double> out;
  out.reserve(relert.size());
  for (double v : relert) out.push_back(std::clamp(std::log10(std::max(v, 1.0)), 0.0, top));
  return out;
}

std::vector<double> relhv_targets(std::span<const double> relhv) {
  std::vector<double> out;
  out.reserve(relhv.size());
  for (double v : relhv) out.push_back(std::clamp(v, -2.0, 2.0));
  return out;
}

}  // namespace contoursel::nn

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "neural/tensor.hpp"

namespace contoursel::nn {

enum class Variant { combined, separate };
enum class TargetTransform { log10_relert, relhv_clip };

struct ModelSpec {
  Variant variant = Variant::combined;
  int input_resolution = 64;
  int view_count = 5;
  // Stacks per sample: 1 for single-objective, 2 for bi-objective inputs.
  int objective_count = 1;
  std::vector<int> encoder_channels{16, 32, 64};
  int residual_blocks = 0;
  std::vector<int> head_widths{128};
  int output_count = 3;
  TargetTransform target_transform = TargetTransform::log10_relert;

  int encoder_input_channels() const { return variant == Variant::combined ? view_count : 1; }
  int encodings_per_sample() const {
    return variant == Variant::combined ? objective_count : objective_count * view_count;
  }
  int embedding_size() const { return encoder_channels.back() * encodings_per_sample(); }
  // Embedding plus the scaled dimension feature.
  int head_input_size() const { return embedding_size() + 1; }

  void validate() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

// One sample: views ordered objective-major (objective_count x view_count),
// each resolution x resolution, row-major.
struct ModelInput {
  int resolution = 0;
  std::vector<std::vector<double>> views;
  double dimension = 2.0;
};

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

struct InitOptions {
  // Biases start at zero unless a scale is given (uniform in [-s, s]).
  double bias_scale = 0.0;
};

inline constexpr double kDimensionScale = 0.1;

class Model {
 public:
  Model(ModelSpec spec, std::uint64_t seed, InitOptions init = {});

  const ModelSpec& spec() const { return spec_; }
  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  std::size_t parameter_count() const;
  std::size_t encoder_parameter_count() const;

  std::vector<double> predict(const ModelInput& input) const;
  // Head input (embedding followed by the scaled dimension).
  std::vector<double> embed(const ModelInput& input) const;

  // MSE loss for one sample; adds d(loss)/d(param) into every Param::grad.
  double accumulate_gradient(const ModelInput& input, std::span<const double> target);
  void zero_grad();

  // Views permuted within each objective: new view v = old view order[v].
  static ModelInput permute_views(const ModelInput& input, std::span<const int> order,
                                  int objective_count);

 private:
  struct Trace;
  std::vector<double> forward(const ModelInput& input, Trace* trace) const;
  void backward(const Trace& trace, std::span<const double> grad_out);
  void checkInput(const ModelInput& input) const;

  ModelSpec spec_;
  std::vector<Param> params_;
  std::size_t encoder_param_end_ = 0;  // params_[0, end) belong to the encoder
};

void save_model(const Model& model, const std::filesystem::path& path);
// Throws on I/O, parse, shape or (when given) spec mismatch.
Model load_model(const std::filesystem::path& path,
                 const std::optional<ModelSpec>& expected = std::nullopt);

// Central-difference check of every parameter against the analytic gradient.
struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_tensor = 0;  // index into params()
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  int draws = 1;  // grad_check_random only
};
GradCheckResult grad_check(Model& model, const ModelInput& input, std::span<const double> target,
                           double h = 1e-5);

// grad_check on a freshly seeded model with random biases, random input views
// and targets offset from the prediction by up to 0.1. A draw whose worst
// coordinate sits on a ReLU/max-pool switch (central differences at h and h/4
// disagree) is replaced by a fresh one, at most 8 draws.
GradCheckResult grad_check_random(const ModelSpec& spec, std::uint64_t seed);

// Reduced spec used for gradient checking: r = 8, channels [2, 3].
ModelSpec gradcheck_spec(Variant variant, int residual_blocks = 0);

}  // namespace contoursel::nn

#include "neural/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "neural/layers.hpp"

namespace contoursel::nn {

namespace {

constexpr const char* kModelFormat = "contoursel-model";
constexpr int kModelVersion = 1;

struct BlockTrace {
  Tensor input;
  Tensor pre;
  std::vector<int> act_shape;
  std::vector<int> argmax;
};

struct ResidualTrace {
  Tensor input;
  Tensor pre1;
  Tensor act1;
  Tensor sum;
};

struct EncoderTrace {
  std::vector<BlockTrace> blocks;
  std::vector<ResidualTrace> residuals;
  std::vector<int> gap_shape;
};

void addInto(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.values[i] += src.values[i];
}

std::string transformName(TargetTransform t) {
  return t == TargetTransform::log10_relert ? "log10_relert" : "relhv_clip";
}

}  // namespace

std::string to_string(Variant v) { return v == Variant::combined ? "combined" : "separate"; }

Variant parse_variant(const std::string& s) {
  if (s == "combined") return Variant::combined;
  if (s == "separate") return Variant::separate;
  fail(ErrorCode::invalid_argument, "unknown model variant '" + s + "'");
}

void ModelSpec::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::invalid_argument, "model spec: " + what);
  };
  check(input_resolution >= 2, "input_resolution must be >= 2");
  check(view_count >= 1, "view_count must be >= 1");
  check(objective_count == 1 || objective_count == 2, "objective_count must be 1 or 2");
  check(!encoder_channels.empty(), "encoder needs at least one conv block");
  for (int c : encoder_channels) check(c >= 1, "encoder channel counts must be positive");
  check(residual_blocks >= 0, "residual_blocks must be >= 0");
  for (int w : head_widths) check(w >= 1, "head widths must be positive");
  check(output_count >= 1, "output_count must be >= 1");
  int r = input_resolution;
  for (std::size_t b = 0; b < encoder_channels.size(); ++b) {
    check(r >= 2, "input_resolution too small for " + std::to_string(encoder_channels.size()) +
                      " pooling stages");
    r /= 2;
  }
}

nlohmann::json to_json(const ModelSpec& spec) {
  return {{"variant", to_string(spec.variant)},
          {"input_resolution", spec.input_resolution},
          {"view_count", spec.view_count},
          {"objective_count", spec.objective_count},
          {"encoder_channels", spec.encoder_channels},
          {"residual_blocks", spec.residual_blocks},
          {"head_widths", spec.head_widths},
          {"output_count", spec.output_count},
          {"target_transform", transformName(spec.target_transform)}};
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "variant",         "input_resolution", "view_count",   "objective_count", "encoder_channels",
      "residual_blocks", "head_widths",      "output_count", "target_transform"};
  if (!j.is_object()) fail(ErrorCode::parse, "model spec must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kKeys.count(key)) fail(ErrorCode::config, "unknown model spec key '" + key + "'");
  ModelSpec s;
  try {
    if (j.contains("variant")) s.variant = parse_variant(j.at("variant").get<std::string>());
    if (j.contains("input_resolution")) s.input_resolution = j.at("input_resolution").get<int>();
    if (j.contains("view_count")) s.view_count = j.at("view_count").get<int>();
    if (j.contains("objective_count")) s.objective_count = j.at("objective_count").get<int>();
    if (j.contains("encoder_channels"))
      s.encoder_channels = j.at("encoder_channels").get<std::vector<int>>();
    if (j.contains("residual_blocks")) s.residual_blocks = j.at("residual_blocks").get<int>();
    if (j.contains("head_widths")) s.head_widths = j.at("head_widths").get<std::vector<int>>();
    if (j.contains("output_count")) s.output_count = j.at("output_count").get<int>();
    if (j.contains("target_transform")) {
      const auto t = j.at("target_transform").get<std::string>();
      if (t == "log10_relert")
        s.target_transform = TargetTransform::log10_relert;
      else if (t == "relhv_clip")
        s.target_transform = TargetTransform::relhv_clip;
      else
        fail(ErrorCode::config, "unknown target_transform '" + t + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, std::string("bad model spec: ") + e.what());
  }
  s.validate();
  return s;
}

struct Model::Trace {
  std::vector<EncoderTrace> encodings;
  std::vector<Tensor> head_inputs;  // input of each dense layer
  std::vector<Tensor> head_pre;     // pre-activations of hidden layers
};

Model::Model(ModelSpec spec, std::uint64_t seed, InitOptions init) : spec_(std::move(spec)) {
  spec_.validate();
  Rng rng(derive_seed(seed, {0x1417}));
  auto add = [&](std::string name, std::vector<int> shape, int fan_in, double gain) {
    Param p{std::move(name), Tensor(shape), Tensor(shape)};
    const double stddev = std::sqrt(gain / static_cast<double>(fan_in));
    for (double& v : p.value.values) v = stddev * rng.normal();
    params_.push_back(std::move(p));
  };
  auto addBias = [&](std::string name, int n) {
    Param p{std::move(name), Tensor({n}), Tensor({n})};
    if (init.bias_scale > 0.0)
      for (double& v : p.value.values) v = rng.uniform(-init.bias_scale, init.bias_scale);
    params_.push_back(std::move(p));
  };
  int c_in = spec_.encoder_input_channels();
  for (std::size_t b = 0; b < spec_.encoder_channels.size(); ++b) {
    const int c_out = spec_.encoder_channels[b];
    const std::string prefix = "encoder.conv" + std::to_string(b);
    add(prefix + ".weight", {c_out, c_in, 3, 3}, c_in * 9, 2.0);
    addBias(prefix + ".bias", c_out);
    c_in = c_out;
  }
  for (int r = 0; r < spec_.residual_blocks; ++r) {
    const std::string prefix = "encoder.res" + std::to_string(r);
    add(prefix + ".conv1.weight", {c_in, c_in, 3, 3}, c_in * 9, 2.0);
    addBias(prefix + ".conv1.bias", c_in);
    // Second conv starts small so each block begins close to identity.
    add(prefix + ".conv2.weight", {c_in, c_in, 3, 3}, c_in * 9, 0.1);
    addBias(prefix + ".conv2.bias", c_in);
  }
  encoder_param_end_ = params_.size();
  int n_in = spec_.head_input_size();
  for (std::size_t l = 0; l < spec_.head_widths.size(); ++l) {
    const int n_out = spec_.head_widths[l];
    const std::string prefix = "head.dense" + std::to_string(l);
    add(prefix + ".weight", {n_out, n_in}, n_in, 2.0);
    addBias(prefix + ".bias", n_out);
    n_in = n_out;
  }
  add("head.out.weight", {spec_.output_count, n_in}, n_in, 1.0);
  addBias("head.out.bias", spec_.output_count);
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::size_t Model::encoder_parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < encoder_param_end_; ++i) n += params_[i].value.size();
  return n;
}

void Model::checkInput(const ModelInput& input) const {
  const auto expected = static_cast<std::size_t>(spec_.objective_count * spec_.view_count);
  if (input.views.size() != expected)
    fail(ErrorCode::contract, "model expects " + std::to_string(expected) + " views, got " +
                                  std::to_string(input.views.size()));
  if (input.resolution != spec_.input_resolution)
    fail(ErrorCode::contract, "model expects resolution " + std::to_string(spec_.input_resolution) +
                                  ", got " + std::to_string(input.resolution));
  const auto pixels = static_cast<std::size_t>(input.resolution) * input.resolution;
  for (const auto& v : input.views)
    if (v.size() != pixels) fail(ErrorCode::contract, "view size does not match resolution");
}

std::vector<double> Model::forward(const ModelInput& input, Trace* trace) const {
  checkInput(input);
  const int r = spec_.input_resolution;
  const int k = spec_.view_count;
  const std::size_t pixels = static_cast<std::size_t>(r) * r;

  auto encode = [&](Tensor x, EncoderTrace* et) {
    std::size_t p = 0;
    for (std::size_t b = 0; b < spec_.encoder_channels.size(); ++b, p += 2) {
      Tensor pre = conv2d_forward(x, params_[p].value, params_[p + 1].value);
      Tensor act = relu_forward(pre);
      auto pooled = maxpool2x2_forward(act);
      if (et) et->blocks.push_back({std::move(x), std::move(pre), act.shape, std::move(pooled.argmax)});
      x = std::move(pooled.output);
    }
    for (int rb = 0; rb < spec_.residual_blocks; ++rb, p += 4) {
      Tensor pre1 = conv2d_forward(x, params_[p].value, params_[p + 1].value);
      Tensor act1 = relu_forward(pre1);
      Tensor sum = conv2d_forward(act1, params_[p + 2].value, params_[p + 3].value);
      addInto(sum, x);
      Tensor out = relu_forward(sum);
      if (et) et->residuals.push_back({std::move(x), std::move(pre1), std::move(act1), std::move(sum)});
      x = std::move(out);
    }
    if (et) et->gap_shape = x.shape;
    return global_avg_pool_forward(x);
  };

  std::vector<Tensor> parts;
  const int encodings = spec_.encodings_per_sample();
  if (trace) trace->encodings.resize(static_cast<std::size_t>(encodings));
  for (int e = 0; e < encodings; ++e) {
    Tensor x;
    if (spec_.variant == Variant::combined) {
      x = Tensor({k, r, r});
      for (int v = 0; v < k; ++v)
        std::copy(input.views[static_cast<std::size_t>(e * k + v)].begin(),
                  input.views[static_cast<std::size_t>(e * k + v)].end(),
                  x.values.begin() + static_cast<std::ptrdiff_t>(v * pixels));
    } else {
      x = Tensor({1, r, r}, input.views[static_cast<std::size_t>(e)]);
    }
    parts.push_back(encode(std::move(x), trace ? &trace->encodings[e] : nullptr));
  }
  parts.push_back(Tensor({1}, std::vector<double>{input.dimension * kDimensionScale}));
  Tensor h = concat(parts);

  std::size_t p = encoder_param_end_;
  for (std::size_t l = 0; l < spec_.head_widths.size(); ++l, p += 2) {
    Tensor pre = dense_forward(h, params_[p].value, params_[p + 1].value);
    if (trace) {
      trace->head_inputs.push_back(std::move(h));
      trace->head_pre.push_back(pre);
    }
    h = relu_forward(std::move(pre));
  }
  Tensor out = dense_forward(h, params_[p].value, params_[p + 1].value);
  if (trace) trace->head_inputs.push_back(std::move(h));
  return out.values;
}

void Model::backward(const Trace& trace, std::span<const double> grad_out) {
  // Head, output layer first.
  std::size_t p = params_.size() - 2;
  Tensor g({static_cast<int>(grad_out.size())}, std::vector<double>(grad_out.begin(), grad_out.end()));
  {
    auto dg = dense_backward(trace.head_inputs.back(), params_[p].value, g);
    addInto(params_[p].grad, dg.weights);
    addInto(params_[p + 1].grad, dg.bias);
    g = std::move(dg.input);
  }
  for (std::size_t l = spec_.head_widths.size(); l-- > 0;) {
    p -= 2;
    g = relu_backward(trace.head_pre[l], std::move(g));
    auto dg = dense_backward(trace.head_inputs[l], params_[p].value, g);
    addInto(params_[p].grad, dg.weights);
    addInto(params_[p + 1].grad, dg.bias);
    g = std::move(dg.input);
  }

  // g is now d(loss)/d(head input); the last entry is the dimension feature.
  const auto per = static_cast<std::size_t>(spec_.encoder_channels.back());
  const std::size_t n_res = static_cast<std::size_t>(spec_.residual_blocks);
  const std::size_t res_base = 2 * spec_.encoder_channels.size();
  for (std::size_t e = 0; e < trace.encodings.size(); ++e) {
    const auto& et = trace.encodings[e];
    Tensor gz({static_cast<int>(per)},
              std::vector<double>(g.values.begin() + static_cast<std::ptrdiff_t>(e * per),
                                  g.values.begin() + static_cast<std::ptrdiff_t>((e + 1) * per)));
    Tensor gx = global_avg_pool_backward(et.gap_shape, gz);
    for (std::size_t rb = n_res; rb-- > 0;) {
      const auto& rt = et.residuals[rb];
      const std::size_t q = res_base + 4 * rb;
      Tensor gsum = relu_backward(rt.sum, std::move(gx));
      auto c2 = conv2d_backward(rt.act1, params_[q + 2].value, gsum);
      addInto(params_[q + 2].grad, c2.weights);
      addInto(params_[q + 3].grad, c2.bias);
      Tensor gpre1 = relu_backward(rt.pre1, std::move(c2.input));
      auto c1 = conv2d_backward(rt.input, params_[q].value, gpre1);
      addInto(params_[q].grad, c1.weights);
      addInto(params_[q + 1].grad, c1.bias);
      addInto(c1.input, gsum);  // skip connection
      gx = std::move(c1.input);
    }
    for (std::size_t b = spec_.encoder_channels.size(); b-- > 0;) {
      const auto& bt = et.blocks[b];
      Tensor gact = maxpool2x2_backward(bt.act_shape, bt.argmax, gx);
      Tensor gpre = relu_backward(bt.pre, std::move(gact));
      auto c = conv2d_backward(bt.input, params_[2 * b].value, gpre, b > 0);
      addInto(params_[2 * b].grad, c.weights);
      addInto(params_[2 * b + 1].grad, c.bias);
      gx = std::move(c.input);
    }
  }
}

std::vector<double> Model::predict(const ModelInput& input) const { return forward(input, nullptr); }

std::vector<double> Model::embed(const ModelInput& input) const {
  Trace t;
  forward(input, &t);
  return t.head_inputs.front().values;
}

double Model::accumulate_gradient(const ModelInput& input, std::span<const double> target) {
  if (target.size() != static_cast<std::size_t>(spec_.output_count))
    fail(ErrorCode::contract, "target length " + std::to_string(target.size()) + " vs " +
                                  std::to_string(spec_.output_count) + " outputs");
  Trace trace;
  const auto pred = forward(input, &trace);
  const auto mse = mse_loss(pred, target);
  backward(trace, mse.grad);
  return mse.loss;
}

void Model::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.values.begin(), p.grad.values.end(), 0.0);
}

ModelInput Model::permute_views(const ModelInput& input, std::span<const int> order,
                                int objective_count) {
  const std::size_t k = order.size();
  if (input.views.size() != k * static_cast<std::size_t>(objective_count))
    fail(ErrorCode::contract, "permutation length does not match view count");
  ModelInput out;
  out.resolution = input.resolution;
  out.dimension = input.dimension;
  out.views.reserve(input.views.size());
  for (int o = 0; o < objective_count; ++o)
    for (std::size_t v = 0; v < k; ++v)
      out.views.push_back(input.views[o * k + static_cast<std::size_t>(order[v])]);
  return out;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : model.params())
    params.push_back({{"name", p.name}, {"shape", p.value.shape}, {"values", p.value.values}});
  const nlohmann::json doc = {{"format", kModelFormat},
                              {"version", kModelVersion},
                              {"spec", to_json(model.spec())},
                              {"parameters", params}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

Model load_model(const std::filesystem::path& path, const std::optional<ModelSpec>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, path.string() + ": " + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kModelFormat)
      fail(ErrorCode::parse, path.string() + ": not a model file");
    if (doc.at("version").get<int>() != kModelVersion)
      fail(ErrorCode::parse, path.string() + ": unsupported model version");
    const ModelSpec spec = spec_from_json(doc.at("spec"));
    if (expected && !(*expected == spec))
      fail(ErrorCode::contract, path.string() + ": model spec does not match the expected spec");
    Model model(spec, 0);
    const auto& params = doc.at("parameters");
    if (params.size() != model.params().size())
      fail(ErrorCode::parse, path.string() + ": parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = model.params()[i];
      const auto& jp = params[i];
      if (jp.at("name").get<std::string>() != p.name ||
          jp.at("shape").get<std::vector<int>>() != p.value.shape)
        fail(ErrorCode::parse, path.string() + ": parameter '" + p.name + "' does not match spec");
      auto values = jp.at("values").get<std::vector<double>>();
      if (values.size() != p.value.size())
        fail(ErrorCode::parse, path.string() + ": parameter '" + p.name + "' has wrong length");
      p.value.values = std::move(values);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, path.string() + ": " + e.what());
  }
}

GradCheckResult grad_check(Model& model, const ModelInput& input, std::span<const double> target,
                           double h) {
  model.zero_grad();
  model.accumulate_gradient(input, target);
  auto lossAt = [&] { return mse_loss(model.predict(input), target).loss; };
  GradCheckResult result;
  for (auto& p : model.params()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.values[i];
      p.value.values[i] = saved + h;
      const double up = lossAt();
      p.value.values[i] = saved - h;
      const double down = lossAt();
      p.value.values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p.grad.values[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = p.name + "[" + std::to_string(i) + "]";
        result.worst_tensor = static_cast<std::size_t>(&p - model.params().data());
        result.worst_index = i;
      }
    }
  }
  return result;
}

GradCheckResult grad_check_random(const ModelSpec& spec, std::uint64_t seed) {
  constexpr int kMaxDraws = 8;
  constexpr double kStep = 1e-5;
  GradCheckResult result;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    const auto draw_seed = draw == 0 ? seed : derive_seed(seed, {0xd4a, static_cast<std::uint64_t>(draw)});
    Model model(spec, derive_seed(draw_seed, {1}), InitOptions{0.1});
    Rng rng(derive_seed(draw_seed, {2}));
    ModelInput input;
    input.resolution = spec.input_resolution;
    input.dimension = static_cast<double>(std::array{2, 3, 5, 10}[rng.below(4)]);
    const auto pixels = static_cast<std::size_t>(spec.input_resolution) * spec.input_resolution;
    for (int v = 0; v < spec.objective_count * spec.view_count; ++v) {
      auto& view = input.views.emplace_back(pixels);
      for (double& x : view) x = rng.uniform();
    }
    auto target = model.predict(input);
    for (double& t : target) t += rng.uniform(-0.1, 0.1);
    result = grad_check(model, input, target, kStep);
    result.draws = draw + 1;
    if (result.checked == 0) break;

    // smooth coordinates give the same central difference at h and h/4
    auto& x = model.params()[result.worst_tensor].value.values[result.worst_index];
    auto slope = [&](double h) {
      const double saved = x;
      x = saved + h;
      const double up = mse_loss(model.predict(input), target).loss;
      x = saved - h;
      const double down = mse_loss(model.predict(input), target).loss;
      x = saved;
      return (up - down) / (2.0 * h);
    };
    const double a = slope(kStep), b = slope(kStep / 4);
    const bool kink = std::abs(a - b) > 1e-3 * std::max({std::abs(a), std::abs(b), 1e-8});
    if (!kink) break;
  }
  return result;
}

ModelSpec gradcheck_spec(Variant variant, int residual_blocks) {
  ModelSpec s;
  s.variant = variant;
  s.input_resolution = 8;
  s.encoder_channels = {2, 3};
  s.residual_blocks = residual_blocks;
  s.head_widths = {6};
  s.output_count = 3;
  return s;
}

}  // namespace contoursel::nn

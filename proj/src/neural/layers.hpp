#pragma once

#include <span>
#include <vector>

#include "neural/tensor.hpp"

namespace contoursel::nn {

// 3x3 convolution, stride 1, zero padding 1. weights: (C_out, C_in, 3, 3).
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct ConvGrads {
  Tensor input;  // empty when not requested
  Tensor weights;
  Tensor bias;
};

ConvGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                          bool need_input_grad = true);

Tensor relu_forward(Tensor x);
// `pre` is the relu input.
Tensor relu_backward(const Tensor& pre, Tensor grad_out);

struct PoolResult {
  Tensor output;
  std::vector<int> argmax;  // flat input index per output cell
};

// 2x2, stride 2; an odd trailing row/column is dropped.
PoolResult maxpool2x2_forward(const Tensor& x);
Tensor maxpool2x2_backward(const std::vector<int>& input_shape, const std::vector<int>& argmax,
                           const Tensor& grad_out);

Tensor global_avg_pool_forward(const Tensor& x);
Tensor global_avg_pool_backward(const std::vector<int>& input_shape, const Tensor& grad_out);

// y = W x + b, W: (out, in).
Tensor dense_forward(const Tensor& x, const Tensor& weights, const Tensor& bias);

struct DenseGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};
DenseGrads dense_backward(const Tensor& x, const Tensor& weights, const Tensor& grad_out);

Tensor concat(std::span<const Tensor> parts);
// Splits a gradient of concat() back into pieces of the given sizes.
std::vector<Tensor> split(const Tensor& grad, std::span<const std::size_t> sizes);

struct MseResult {
  double loss = 0.0;
  std::vector<double> grad;
};
MseResult mse_loss(std::span<const double> pred, std::span<const double> target);

}  // namespace contoursel::nn

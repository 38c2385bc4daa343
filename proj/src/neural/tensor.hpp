#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace contoursel::nn {

// Dense row-major tensor of 64-bit reals; shape is (C, H, W) or flat (n).
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0)
      : shape(std::move(s)), values(count(shape), fill) {}
  Tensor(std::vector<int> s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {}

  static std::size_t count(const std::vector<int>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }

  std::size_t size() const { return values.size(); }
  int channels() const { return shape.at(0); }
  int height() const { return shape.at(1); }
  int width() const { return shape.at(2); }

  double* data() { return values.data(); }
  const double* data() const { return values.data(); }

  double& at(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
  }
  double at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
  }
};

}  // namespace contoursel::nn

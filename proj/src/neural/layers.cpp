#include "neural/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"

namespace contoursel::nn {

namespace {

void checkShape(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::contract, "shape mismatch: " + what);
}

// Copies (C, H, W) into a zero-bordered (C, H+2, W+2) buffer.
std::vector<double> padded(const Tensor& x) {
  const int c = x.channels(), h = x.height(), w = x.width();
  const int pw = w + 2;
  std::vector<double> out(static_cast<std::size_t>(c) * (h + 2) * pw, 0.0);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      std::copy_n(x.data() + (static_cast<std::size_t>(ch) * h + y) * w, w,
                  out.data() + (static_cast<std::size_t>(ch) * (h + 2) + y + 1) * pw + 1);
  return out;
}

inline void axpy(double a, const double* __restrict x, double* __restrict y, int n) {
#pragma omp simd
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

// out[x] += sum over the 3x3 taps of k[ky][kx] * src[ky*stride + x + kx].
inline void taps9(const double* __restrict k, const double* __restrict src, int stride,
                  double* __restrict out, int n) {
  const double k0 = k[0], k1 = k[1], k2 = k[2], k3 = k[3], k4 = k[4], k5 = k[5], k6 = k[6],
               k7 = k[7], k8 = k[8];
  const double* r0 = src;
  const double* r1 = src + stride;
  const double* r2 = src + 2 * stride;
#pragma omp simd
  for (int x = 0; x < n; ++x) {
    out[x] += k0 * r0[x] + k1 * r0[x + 1] + k2 * r0[x + 2] + k3 * r1[x] + k4 * r1[x + 1] +
              k5 * r1[x + 2] + k6 * r2[x] + k7 * r2[x + 1] + k8 * r2[x + 2];
  }
}

// acc[ky*3+kx] += sum_x g[x] * src[ky*stride + x + kx].
inline void tapGrad9(const double* __restrict g, const double* __restrict src, int stride,
                     double* __restrict acc, int n) {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, a7 = 0, a8 = 0;
  const double* r0 = src;
  const double* r1 = src + stride;
  const double* r2 = src + 2 * stride;
#pragma omp simd reduction(+ : a0, a1, a2, a3, a4, a5, a6, a7, a8)
  for (int x = 0; x < n; ++x) {
    const double gx = g[x];
    a0 += gx * r0[x];
    a1 += gx * r0[x + 1];
    a2 += gx * r0[x + 2];
    a3 += gx * r1[x];
    a4 += gx * r1[x + 1];
    a5 += gx * r1[x + 2];
    a6 += gx * r2[x];
    a7 += gx * r2[x + 1];
    a8 += gx * r2[x + 2];
  }
  acc[0] += a0; acc[1] += a1; acc[2] += a2;
  acc[3] += a3; acc[4] += a4; acc[5] += a5;
  acc[6] += a6; acc[7] += a7; acc[8] += a8;
}

// Four output rows at once sharing the same source rows; k points at four
// consecutive 9-tap kernels separated by kstride.
inline void taps9x4(const double* k, std::size_t kstride, const double* __restrict src, int stride,
                    double* __restrict o0, double* __restrict o1, double* __restrict o2,
                    double* __restrict o3, int n) {
  double a[4][9];
  for (int j = 0; j < 4; ++j)
    for (int t = 0; t < 9; ++t) a[j][t] = k[j * kstride + t];
  const double* r0 = src;
  const double* r1 = src + stride;
  const double* r2 = src + 2 * stride;
#pragma omp simd
  for (int x = 0; x < n; ++x) {
    const double p0 = r0[x], p1 = r0[x + 1], p2 = r0[x + 2];
    const double p3 = r1[x], p4 = r1[x + 1], p5 = r1[x + 2];
    const double p6 = r2[x], p7 = r2[x + 1], p8 = r2[x + 2];
    o0[x] += a[0][0] * p0 + a[0][1] * p1 + a[0][2] * p2 + a[0][3] * p3 + a[0][4] * p4 +
             a[0][5] * p5 + a[0][6] * p6 + a[0][7] * p7 + a[0][8] * p8;
    o1[x] += a[1][0] * p0 + a[1][1] * p1 + a[1][2] * p2 + a[1][3] * p3 + a[1][4] * p4 +
             a[1][5] * p5 + a[1][6] * p6 + a[1][7] * p7 + a[1][8] * p8;
    o2[x] += a[2][0] * p0 + a[2][1] * p1 + a[2][2] * p2 + a[2][3] * p3 + a[2][4] * p4 +
             a[2][5] * p5 + a[2][6] * p6 + a[2][7] * p7 + a[2][8] * p8;
    o3[x] += a[3][0] * p0 + a[3][1] * p1 + a[3][2] * p2 + a[3][3] * p3 + a[3][4] * p4 +
             a[3][5] * p5 + a[3][6] * p6 + a[3][7] * p7 + a[3][8] * p8;
  }
}

// tapGrad9 for two gradient rows sharing the same source rows.
inline void tapGrad9x2(const double* __restrict g0, const double* __restrict g1,
                       const double* __restrict src, int stride, double* __restrict acc0,
                       double* __restrict acc1, int n) {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, a7 = 0, a8 = 0;
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0, b7 = 0, b8 = 0;
  const double* r0 = src;
  const double* r1 = src + stride;
  const double* r2 = src + 2 * stride;
#pragma omp simd reduction(+ : a0, a1, a2, a3, a4, a5, a6, a7, a8, b0, b1, b2, b3, b4, b5, b6, b7, b8)
  for (int x = 0; x < n; ++x) {
    const double u = g0[x], v = g1[x];
    const double p0 = r0[x], p1 = r0[x + 1], p2 = r0[x + 2];
    const double p3 = r1[x], p4 = r1[x + 1], p5 = r1[x + 2];
    const double p6 = r2[x], p7 = r2[x + 1], p8 = r2[x + 2];
    a0 += u * p0; a1 += u * p1; a2 += u * p2; a3 += u * p3; a4 += u * p4;
    a5 += u * p5; a6 += u * p6; a7 += u * p7; a8 += u * p8;
    b0 += v * p0; b1 += v * p1; b2 += v * p2; b3 += v * p3; b4 += v * p4;
    b5 += v * p5; b6 += v * p6; b7 += v * p7; b8 += v * p8;
  }
  acc0[0] += a0; acc0[1] += a1; acc0[2] += a2; acc0[3] += a3; acc0[4] += a4;
  acc0[5] += a5; acc0[6] += a6; acc0[7] += a7; acc0[8] += a8;
  acc1[0] += b0; acc1[1] += b1; acc1[2] += b2; acc1[3] += b3; acc1[4] += b4;
  acc1[5] += b5; acc1[6] += b6; acc1[7] += b7; acc1[8] += b8;
}

inline double dot(const double* __restrict x, const double* __restrict y, int n) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (int i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  checkShape(input.shape.size() == 3, "conv input must be (C,H,W)");
  checkShape(weights.shape.size() == 4 && weights.shape[2] == 3 && weights.shape[3] == 3,
             "conv weights must be (C_out,C_in,3,3)");
  const int c_in = input.channels(), h = input.height(), w = input.width();
  const int c_out = weights.shape[0];
  checkShape(weights.shape[1] == c_in, "conv channel count " + std::to_string(c_in) +
                                           " vs weights " + std::to_string(weights.shape[1]));
  checkShape(bias.size() == static_cast<std::size_t>(c_out), "conv bias length");
  const auto pad = padded(input);
  const int pw = w + 2;
  const std::size_t plane = static_cast<std::size_t>(h + 2) * pw;
  Tensor out({c_out, h, w});
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (int oc = 0; oc < c_out; ++oc)
    std::fill(out.data() + oc * hw, out.data() + (oc + 1) * hw, bias.values[oc]);
  int oc = 0;
  for (; oc + 4 <= c_out; oc += 4) {
    double* o = out.data() + oc * hw;
    for (int ic = 0; ic < c_in; ++ic) {
      const double* k = weights.data() + (static_cast<std::size_t>(oc) * c_in + ic) * 9;
      const double* p = pad.data() + ic * plane;
      for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        taps9x4(k, static_cast<std::size_t>(c_in) * 9, p + static_cast<std::size_t>(y) * pw, pw,
                o + row, o + hw + row, o + 2 * hw + row, o + 3 * hw + row, w);
      }
    }
  }
  for (; oc < c_out; ++oc) {
    double* o = out.data() + oc * hw;
    for (int ic = 0; ic < c_in; ++ic) {
      const double* k = weights.data() + (static_cast<std::size_t>(oc) * c_in + ic) * 9;
      const double* p = pad.data() + ic * plane;
      for (int y = 0; y < h; ++y)
        taps9(k, p + static_cast<std::size_t>(y) * pw, pw, o + static_cast<std::size_t>(y) * w, w);
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                          bool need_input_grad) {
  const int c_in = input.channels(), h = input.height(), w = input.width();
  const int c_out = weights.shape[0];
  checkShape(grad_out.shape == std::vector<int>{c_out, h, w}, "conv grad_out");
  const auto pad = padded(input);
  const int pw = w + 2;
  const std::size_t plane = static_cast<std::size_t>(h + 2) * pw;
  ConvGrads g;
  g.weights = Tensor(weights.shape);
  g.bias = Tensor({c_out});
  const std::size_t ohw = static_cast<std::size_t>(h) * w;
  for (int oc = 0; oc < c_out; ++oc) {
    const double* go = grad_out.data() + oc * ohw;
    double bsum = 0.0;
    for (std::size_t i = 0; i < ohw; ++i) bsum += go[i];
    g.bias.values[oc] = bsum;
  }
  int oc0 = 0;
  for (; oc0 + 2 <= c_out; oc0 += 2) {
    const double* go0 = grad_out.data() + oc0 * ohw;
    const double* go1 = go0 + ohw;
    for (int ic = 0; ic < c_in; ++ic) {
      double* gk0 = g.weights.data() + (static_cast<std::size_t>(oc0) * c_in + ic) * 9;
      double* gk1 = gk0 + static_cast<std::size_t>(c_in) * 9;
      const double* p = pad.data() + ic * plane;
      for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        tapGrad9x2(go0 + row, go1 + row, p + static_cast<std::size_t>(y) * pw, pw, gk0, gk1, w);
      }
    }
  }
  for (int oc = oc0; oc < c_out; ++oc) {
    const double* go = grad_out.data() + oc * ohw;
    for (int ic = 0; ic < c_in; ++ic) {
      double* gk = g.weights.data() + (static_cast<std::size_t>(oc) * c_in + ic) * 9;
      const double* p = pad.data() + ic * plane;
      for (int y = 0; y < h; ++y)
        tapGrad9(go + static_cast<std::size_t>(y) * w, p + static_cast<std::size_t>(y) * pw, pw,
                 gk, w);
    }
  }
  if (need_input_grad) {
    // Input gradient is a full correlation of grad_out with the flipped kernel.
    const auto gpad = padded(grad_out);
    g.input = Tensor(input.shape);
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    // Flipped kernels laid out (C_in, C_out, 9) so four input channels share a pass.
    std::vector<double> flipped(static_cast<std::size_t>(c_in) * c_out * 9);
    for (int ic = 0; ic < c_in; ++ic)
      for (int oc = 0; oc < c_out; ++oc)
        for (int t = 0; t < 9; ++t)
          flipped[(static_cast<std::size_t>(ic) * c_out + oc) * 9 + t] =
              weights.values[(static_cast<std::size_t>(oc) * c_in + ic) * 9 + 8 - t];
    int ic = 0;
    for (; ic + 4 <= c_in; ic += 4) {
      double* gi = g.input.data() + ic * hw;
      for (int oc = 0; oc < c_out; ++oc) {
        const double* k = flipped.data() + (static_cast<std::size_t>(ic) * c_out + oc) * 9;
        const double* p = gpad.data() + oc * plane;
        for (int y = 0; y < h; ++y) {
          const std::size_t row = static_cast<std::size_t>(y) * w;
          taps9x4(k, static_cast<std::size_t>(c_out) * 9, p + static_cast<std::size_t>(y) * pw, pw,
                  gi + row, gi + hw + row, gi + 2 * hw + row, gi + 3 * hw + row, w);
        }
      }
    }
    for (; ic < c_in; ++ic) {
      double* gi = g.input.data() + static_cast<std::size_t>(ic) * h * w;
      for (int oc = 0; oc < c_out; ++oc) {
        const double* k = flipped.data() + (static_cast<std::size_t>(ic) * c_out + oc) * 9;
        const double* p = gpad.data() + oc * plane;
        for (int y = 0; y < h; ++y)
          taps9(k, p + static_cast<std::size_t>(y) * pw, pw, gi + static_cast<std::size_t>(y) * w, w);
      }
    }
  }
  return g;
}

Tensor relu_forward(Tensor x) {
  for (double& v : x.values) v = v > 0.0 ? v : 0.0;
  return x;
}

Tensor relu_backward(const Tensor& pre, Tensor grad_out) {
  checkShape(pre.size() == grad_out.size(), "relu grad_out");
  for (std::size_t i = 0; i < pre.size(); ++i)
    if (!(pre.values[i] > 0.0)) grad_out.values[i] = 0.0;
  return grad_out;
}

PoolResult maxpool2x2_forward(const Tensor& x) {
  checkShape(x.shape.size() == 3, "maxpool input must be (C,H,W)");
  const int c = x.channels(), h = x.height(), w = x.width();
  const int oh = h / 2, ow = w / 2;
  checkShape(oh >= 1 && ow >= 1, "maxpool input smaller than 2x2");
  PoolResult r{Tensor({c, oh, ow}), std::vector<int>(static_cast<std::size_t>(c) * oh * ow)};
  std::size_t o = 0;
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < oh; ++y) {
      for (int xo = 0; xo < ow; ++xo, ++o) {
        int best = (ch * h + 2 * y) * w + 2 * xo;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const int idx = (ch * h + 2 * y + dy) * w + 2 * xo + dx;
            if (x.values[idx] > x.values[best]) best = idx;
          }
        r.output.values[o] = x.values[best];
        r.argmax[o] = best;
      }
    }
  }
  return r;
}

Tensor maxpool2x2_backward(const std::vector<int>& input_shape, const std::vector<int>& argmax,
                           const Tensor& grad_out) {
  checkShape(argmax.size() == grad_out.size(), "maxpool grad_out");
  Tensor g(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) g.values[argmax[i]] += grad_out.values[i];
  return g;
}

Tensor global_avg_pool_forward(const Tensor& x) {
  checkShape(x.shape.size() == 3, "global_avg_pool input must be (C,H,W)");
  const int c = x.channels();
  const std::size_t hw = static_cast<std::size_t>(x.height()) * x.width();
  Tensor out({c});
  for (int ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (std::size_t i = 0; i < hw; ++i) s += x.values[ch * hw + i];
    out.values[ch] = s / static_cast<double>(hw);
  }
  return out;
}

Tensor global_avg_pool_backward(const std::vector<int>& input_shape, const Tensor& grad_out) {
  Tensor g(input_shape);
  const std::size_t hw = static_cast<std::size_t>(input_shape[1]) * input_shape[2];
  checkShape(grad_out.size() == static_cast<std::size_t>(input_shape[0]), "global_avg_pool grad_out");
  for (int ch = 0; ch < input_shape[0]; ++ch) {
    const double v = grad_out.values[ch] / static_cast<double>(hw);
    std::fill_n(g.values.begin() + static_cast<std::ptrdiff_t>(ch * hw), hw, v);
  }
  return g;
}

Tensor dense_forward(const Tensor& x, const Tensor& weights, const Tensor& bias) {
  checkShape(weights.shape.size() == 2, "dense weights must be (out,in)");
  const int n_out = weights.shape[0], n_in = weights.shape[1];
  checkShape(x.size() == static_cast<std::size_t>(n_in),
             "dense input " + std::to_string(x.size()) + " vs " + std::to_string(n_in));
  checkShape(bias.size() == static_cast<std::size_t>(n_out), "dense bias length");
  Tensor y({n_out});
  for (int o = 0; o < n_out; ++o)
    y.values[o] = bias.values[o] + dot(weights.data() + static_cast<std::size_t>(o) * n_in, x.data(), n_in);
  return y;
}

DenseGrads dense_backward(const Tensor& x, const Tensor& weights, const Tensor& grad_out) {
  const int n_out = weights.shape[0], n_in = weights.shape[1];
  checkShape(grad_out.size() == static_cast<std::size_t>(n_out), "dense grad_out");
  DenseGrads g{Tensor({n_in}), Tensor(weights.shape), Tensor({n_out})};
  for (int o = 0; o < n_out; ++o) {
    const double go = grad_out.values[o];
    g.bias.values[o] = go;
    axpy(go, x.data(), g.weights.data() + static_cast<std::size_t>(o) * n_in, n_in);
    axpy(go, weights.data() + static_cast<std::size_t>(o) * n_in, g.input.data(), n_in);
  }
  return g;
}

Tensor concat(std::span<const Tensor> parts) {
  std::size_t n = 0;
  for (const auto& p : parts) n += p.size();
  Tensor out({static_cast<int>(n)});
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p.values.begin(), p.values.end(), out.values.begin() + static_cast<std::ptrdiff_t>(off));
    off += p.size();
  }
  return out;
}

std::vector<Tensor> split(const Tensor& grad, std::span<const std::size_t> sizes) {
  std::vector<Tensor> out;
  std::size_t off = 0;
  for (auto s : sizes) {
    checkShape(off + s <= grad.size(), "split sizes exceed gradient length");
    out.emplace_back(std::vector<int>{static_cast<int>(s)},
                     std::vector<double>(grad.values.begin() + static_cast<std::ptrdiff_t>(off),
                                         grad.values.begin() + static_cast<std::ptrdiff_t>(off + s)));
    off += s;
  }
  return out;
}

MseResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  checkShape(pred.size() == target.size() && !pred.empty(), "mse prediction/target length");
  MseResult r;
  r.grad.resize(pred.size());
  const double m = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    r.loss += diff * diff;
    r.grad[i] = 2.0 * diff / m;
  }
  r.loss /= m;
  return r;
}

}  // namespace contoursel::nn

// Copyright 2026 The cyclegan-vc3 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cvc3/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <new>
#include <span>

#include "cvc3/errors.hpp"

namespace cvc3 {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMat>;
using ConstMapRow = Eigen::Map<const RowMat>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

double stable_sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
  auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
  return Tensor::make_result(a.shape(), std::move(out), {a}, [a, deriv](const detail::Node& self) {
    auto ga = Tensor::grad_sink(a);
    auto x = a.data();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * deriv(x[i], self.value[i]);
  });
}

// Geometry shared by conv1d (H = KH = 1) and conv2d.
struct ConvGeom {
  std::size_t cin, h, w, cout, kh, kw, sh, sw, ph, pw, oh, ow;
  std::size_t rows() const { return cin * kh * kw; }
  std::size_t cols() const { return oh * ow; }
};

std::size_t out_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad,
                       const char* op) {
  if (stride == 0) throw ShapeError(std::string(op) + ": stride must be positive");
  if (in + 2 * pad < k) {
    throw ShapeError(std::string(op) + ": kernel " + std::to_string(k) +
                     " larger than padded input " + std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - k) / stride + 1;
}

// Output columns [lo, hi) whose input column ox*stride + k - pad is in range.
std::pair<std::size_t, std::size_t> valid_range(std::size_t out, std::size_t in, std::size_t stride,
                                                std::size_t k, std::size_t pad) {
  std::size_t lo = 0;
  if (k < pad) lo = (pad - k + stride - 1) / stride;
  // Largest ox with ox*stride + k - pad <= in - 1.
  if (in + pad < k + 1) return {0, 0};
  const std::size_t hi = std::min(out, (in + pad - k - 1) / stride + 1);
  return {std::min(lo, hi), hi};
}

void im2col(const double* x, const ConvGeom& g, double* cols) {
  const std::size_t ncols = g.cols();
  for (std::size_t c = 0; c < g.cin; ++c) {
    const double* xc = x + c * g.h * g.w;
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        double* row = cols + ((c * g.kh + ki) * g.kw + kj) * ncols;
        const auto [xlo, xhi] = valid_range(g.ow, g.w, g.sw, kj, g.pw);
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.sh + ki) - static_cast<std::ptrdiff_t>(g.ph);
          double* dst = row + oy * g.ow;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) {
            std::fill(dst, dst + g.ow, 0.0);
            continue;
          }
          std::fill(dst, dst + xlo, 0.0);
          std::fill(dst + xhi, dst + g.ow, 0.0);
          if (xlo == xhi) continue;
          const double* src = xc + static_cast<std::size_t>(iy) * g.w + (xlo * g.sw + kj - g.pw);
          if (g.sw == 1) {
            std::copy(src, src + (xhi - xlo), dst + xlo);
          } else {
            for (std::size_t ox = xlo; ox < xhi; ++ox) dst[ox] = src[(ox - xlo) * g.sw];
          }
        }
      }
    }
  }
}

void col2im_add(const double* cols, const ConvGeom& g, double* dx) {
  const std::size_t ncols = g.cols();
  for (std::size_t c = 0; c < g.cin; ++c) {
    double* xc = dx + c * g.h * g.w;
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const double* row = cols + ((c * g.kh + ki) * g.kw + kj) * ncols;
        const auto [xlo, xhi] = valid_range(g.ow, g.w, g.sw, kj, g.pw);
        if (xlo == xhi) continue;
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.sh + ki) - static_cast<std::ptrdiff_t>(g.ph);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          double* dst = xc + static_cast<std::size_t>(iy) * g.w + (xlo * g.sw + kj - g.pw);
          const double* src = row + oy * g.ow;
          for (std::size_t ox = xlo; ox < xhi; ++ox) dst[(ox - xlo) * g.sw] += src[ox];
        }
      }
    }
  }
}

// 64-byte aligned scratch. Eigen picks its vectorization peeling from the
// operand addresses; aligned copies make conv results depend only on shapes,
// not on heap layout, which keeps runs and resumed runs bitwise identical.
struct AlignedDelete {
  void operator()(double* p) const { ::operator delete[](p, std::align_val_t{64}); }
};
using Scratch = std::unique_ptr<double[], AlignedDelete>;

Scratch scratch(std::size_t n) { return Scratch(new (std::align_val_t{64}) double[std::max<std::size_t>(n, 1)]); }

Scratch aligned_copy(std::span<const double> src) {
  Scratch out = scratch(src.size());
  std::copy(src.begin(), src.end(), out.get());
  return out;
}

Tensor conv_impl(const Tensor& input, const Tensor& weight, const Tensor& bias, const ConvGeom& g,
                 Shape out_shape) {
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != g.cout)) {
    throw ShapeError("conv: bias shape " + shape_string(bias.shape()) + " expected [" +
                     std::to_string(g.cout) + "]");
  }
  // Scratch buffers are fully overwritten, so skip value-initialization.
  Scratch cols = scratch(g.rows() * g.cols());
  im2col(input.data().data(), g, cols.get());
  const Scratch w = aligned_copy(weight.data());
  Scratch prod = scratch(g.cout * g.cols());
  MapRow(prod.get(), g.cout, g.cols()).noalias() =
      ConstMapRow(w.get(), g.cout, g.rows()) * ConstMapRow(cols.get(), g.rows(), g.cols());
  std::vector<double> out(prod.get(), prod.get() + g.cout * g.cols());
  // Keep the columns for the weight gradient unless they are large (paper
  // scale output layers); those are rebuilt during backward instead.
  constexpr std::size_t kKeepColsLimit = std::size_t{8} << 20;
  std::shared_ptr<double[]> kept;
  if (NoGradGuard::grad_enabled() && weight.requires_grad() && g.rows() * g.cols() <= kKeepColsLimit) {
    kept = std::shared_ptr<double[]>(cols.release(), AlignedDelete{});
  }
  if (bias.defined()) {
    auto b = bias.data();
    for (std::size_t c = 0; c < g.cout; ++c) {
      double* row = out.data() + c * g.cols();
      for (std::size_t j = 0; j < g.cols(); ++j) row[j] += b[c];
    }
  }
  return Tensor::make_result(
      std::move(out_shape), std::move(out), {input, weight, bias},
      [input, weight, bias, g, kept](const detail::Node& self) {
        const Scratch gout_buf = aligned_copy(self.grad);
        ConstMapRow gout(gout_buf.get(), g.cout, g.cols());
        auto gw = Tensor::grad_sink(weight);
        if (!gw.empty()) {
          Scratch rebuilt;
          const double* cols = kept.get();
          if (!cols) {
            rebuilt = scratch(g.rows() * g.cols());
            im2col(input.data().data(), g, rebuilt.get());
            cols = rebuilt.get();
          }
          Scratch dw = scratch(g.cout * g.rows());
          MapRow(dw.get(), g.cout, g.rows()).noalias() =
              gout * ConstMapRow(cols, g.rows(), g.cols()).transpose();
          for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += dw[i];
        }
        if (bias.defined()) {
          auto gb = Tensor::grad_sink(bias);
          for (std::size_t c = 0; c < gb.size(); ++c) {
            const double* row = gout_buf.get() + c * g.cols();
            double acc = 0.0;
            for (std::size_t j = 0; j < g.cols(); ++j) acc += row[j];
            gb[c] += acc;
          }
        }
        auto gx = Tensor::grad_sink(input);
        if (!gx.empty()) {
          const Scratch w = aligned_copy(weight.data());
          Scratch gcols = scratch(g.rows() * g.cols());
          MapRow(gcols.get(), g.rows(), g.cols()).noalias() =
              ConstMapRow(w.get(), g.cout, g.rows()).transpose() * gout;
          col2im_add(gcols.get(), g, gx.data());
        }
      });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto x = a.data();
  auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [a, b](const detail::Node& self) {
    for (const Tensor* t : {&a, &b}) {
      auto g = Tensor::grad_sink(*t);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto x = a.data();
  auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [a, b](const detail::Node& self) {
    auto ga = Tensor::grad_sink(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
    auto gb = Tensor::grad_sink(b);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= self.grad[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto x = a.data();
  auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [a, b](const detail::Node& self) {
    auto ga = Tensor::grad_sink(a);
    auto y = b.data();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * y[i];
    auto gb = Tensor::grad_sink(b);
    auto x = a.data();
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += self.grad[i] * x[i];
  });
}

Tensor scale(const Tensor& a, double s) {
  return unary(a, [s](double v) { return v * s; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(a, [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Tensor abs(const Tensor& a) {
  return unary(
      a, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& a) {
  return unary(a, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, stable_sigmoid, [](double, double s) { return s * (1.0 - s); });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return Tensor::make_result(Shape{1}, {total}, {a}, [a](const detail::Node& self) {
    auto g = Tensor::grad_sink(a);
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  const auto n = static_cast<double>(a.numel());
  if (n == 0) throw ShapeError("mean of empty tensor");
  double total = 0.0;
  for (double v : a.data()) total += v;
  return Tensor::make_result(Shape{1}, {total / n}, {a}, [a, n](const detail::Node& self) {
    auto g = Tensor::grad_sink(a);
    const double d = self.grad[0] / n;
    for (auto& v : g) v += d;
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape " + shape_string(a.shape()) + " -> " + shape_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return Tensor::make_result(std::move(shape), std::move(out), {a}, [a](const detail::Node& self) {
    auto g = Tensor::grad_sink(a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias, Conv1dOptions opt) {
  if (input.rank() != 2 || weight.rank() != 3 || weight.dim(1) != input.dim(0)) {
    throw ShapeError("conv1d: input " + shape_string(input.shape()) + " incompatible with weight " +
                     shape_string(weight.shape()));
  }
  ConvGeom g{};
  g.cin = input.dim(0);
  g.h = 1;
  g.w = input.dim(1);
  g.cout = weight.dim(0);
  g.kh = 1;
  g.kw = weight.dim(2);
  g.sh = 1;
  g.sw = opt.stride;
  g.ph = 0;
  g.pw = opt.padding;
  g.oh = 1;
  g.ow = out_extent(g.w, g.kw, g.sw, g.pw, "conv1d");
  return conv_impl(input, weight, bias, g, Shape{g.cout, g.ow});
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, Conv2dOptions opt) {
  if (input.rank() != 3 || weight.rank() != 4 || weight.dim(1) != input.dim(0)) {
    throw ShapeError("conv2d: input " + shape_string(input.shape()) + " incompatible with weight " +
                     shape_string(weight.shape()));
  }
  ConvGeom g{};
  g.cin = input.dim(0);
  g.h = input.dim(1);
  g.w = input.dim(2);
  g.cout = weight.dim(0);
  g.kh = weight.dim(2);
  g.kw = weight.dim(3);
  g.sh = opt.stride_h;
  g.sw = opt.stride_w;
  g.ph = opt.pad_h;
  g.pw = opt.pad_w;
  g.oh = out_extent(g.h, g.kh, g.sh, g.ph, "conv2d");
  g.ow = out_extent(g.w, g.kw, g.sw, g.pw, "conv2d");
  return conv_impl(input, weight, bias, g, Shape{g.cout, g.oh, g.ow});
}

Tensor glu(const Tensor& input) {
  if (input.rank() < 1 || input.dim(0) % 2 != 0) {
    throw ShapeError("glu: channel count must be even, got shape " + shape_string(input.shape()));
  }
  const std::size_t half = input.numel() / 2;
  auto x = input.data();
  std::vector<double> gate(half);
  std::vector<double> out(half);
  for (std::size_t i = 0; i < half; ++i) {
    gate[i] = stable_sigmoid(x[half + i]);
    out[i] = x[i] * gate[i];
  }
  Shape shape = input.shape();
  shape[0] /= 2;
  return Tensor::make_result(std::move(shape), std::move(out), {input},
                             [input, half, gate = std::move(gate)](const detail::Node& self) {
                               auto g = Tensor::grad_sink(input);
                               auto x = input.data();
                               for (std::size_t i = 0; i < half; ++i) {
                                 g[i] += self.grad[i] * gate[i];
                                 g[half + i] += self.grad[i] * x[i] * gate[i] * (1.0 - gate[i]);
                               }
                             });
}

InstanceNormResult instance_norm_stats(const Tensor& input, double eps) {
  if (input.rank() < 2) throw ShapeError("instance_norm: expected a channel axis plus data axes");
  const std::size_t channels = input.dim(0);
  const std::size_t n = input.numel() / channels;
  if (n < 2) {
    throw ShapeError("instance_norm: variance undefined for " + std::to_string(n) +
                     " element(s) per channel");
  }
  auto x = input.data();
  std::vector<double> mu(channels), sigma(channels), out(x.size());
  for (std::size_t c = 0; c < channels; ++c) {
    const double* xc = x.data() + c * n;
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += xc[i];
    m /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (xc[i] - m) * (xc[i] - m);
    var /= static_cast<double>(n);
    const double s = std::sqrt(var + eps);
    if (!std::isfinite(s)) throw NumericError("instance_norm: non-finite variance");
    mu[c] = m;
    sigma[c] = s;
    for (std::size_t i = 0; i < n; ++i) out[c * n + i] = (xc[i] - m) / s;
  }
  auto output = Tensor::make_result(
      input.shape(), std::move(out), {input},
      [input, channels, n, sigma](const detail::Node& self) {
        auto g = Tensor::grad_sink(input);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t c = 0; c < channels; ++c) {
          const double* go = self.grad.data() + c * n;
          const double* xh = self.value.data() + c * n;
          double mean_g = 0.0, mean_gx = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            mean_g += go[i];
            mean_gx += go[i] * xh[i];
          }
          mean_g *= inv_n;
          mean_gx *= inv_n;
          for (std::size_t i = 0; i < n; ++i) {
            g[c * n + i] += (go[i] - mean_g - xh[i] * mean_gx) / sigma[c];
          }
        }
      });
  return {std::move(output), std::move(mu), std::move(sigma)};
}

Tensor instance_norm(const Tensor& input, double eps) {
  return instance_norm_stats(input, eps).output;
}

Tensor channel_affine(const Tensor& input, const Tensor& gamma, const Tensor& beta) {
  const std::size_t channels = input.dim(0);
  if (gamma.shape() != Shape{channels} || beta.shape() != Shape{channels}) {
    throw ShapeError("channel_affine: gamma/beta must be [" + std::to_string(channels) + "]");
  }
  const std::size_t n = input.numel() / channels;
  auto x = input.data();
  auto gm = gamma.data();
  auto bt = beta.data();
  std::vector<double> out(x.size());
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < n; ++i) out[c * n + i] = gm[c] * x[c * n + i] + bt[c];
  }
  return Tensor::make_result(
      input.shape(), std::move(out), {input, gamma, beta},
      [input, gamma, beta, channels, n](const detail::Node& self) {
        auto gx = Tensor::grad_sink(input);
        auto gg = Tensor::grad_sink(gamma);
        auto gb = Tensor::grad_sink(beta);
        auto x = input.data();
        auto gm = gamma.data();
        for (std::size_t c = 0; c < channels; ++c) {
          double sg = 0.0, sb = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double go = self.grad[c * n + i];
            sg += go * x[c * n + i];
            sb += go;
            if (!gx.empty()) gx[c * n + i] += go * gm[c];
          }
          if (!gg.empty()) gg[c] += sg;
          if (!gb.empty()) gb[c] += sb;
        }
      });
}

namespace {

// Flat index map for pixel shuffle: shuffled[k] = input[src[k]].
std::vector<std::size_t> shuffle_map(std::size_t c_out, std::size_t h, std::size_t w, std::size_t r) {
  const std::size_t oh = h * r, ow = w * r;
  std::vector<std::size_t> src(c_out * oh * ow);
  for (std::size_t c = 0; c < c_out; ++c)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        const std::size_t ic = c * r * r + (y % r) * r + (x % r);
        src[(c * oh + y) * ow + x] = (ic * h + y / r) * w + x / r;
      }
  return src;
}

Tensor gather(const Tensor& input, Shape shape, std::vector<std::size_t> src) {
  auto x = input.data();
  std::vector<double> out(src.size());
  for (std::size_t k = 0; k < src.size(); ++k) out[k] = x[src[k]];
  return Tensor::make_result(std::move(shape), std::move(out), {input},
                             [input, src = std::move(src)](const detail::Node& self) {
                               auto g = Tensor::grad_sink(input);
                               for (std::size_t k = 0; k < src.size(); ++k) g[src[k]] += self.grad[k];
                             });
}

}  // namespace

Tensor pixel_shuffle(const Tensor& input, std::size_t r) {
  if (input.rank() != 3 || r == 0 || input.dim(0) % (r * r) != 0) {
    throw ShapeError("pixel_shuffle: channels of " + shape_string(input.shape()) +
                     " not divisible by r^2 = " + std::to_string(r * r));
  }
  const std::size_t c = input.dim(0) / (r * r), h = input.dim(1), w = input.dim(2);
  return gather(input, Shape{c, h * r, w * r}, shuffle_map(c, h, w, r));
}

Tensor pixel_unshuffle(const Tensor& input, std::size_t r) {
  if (input.rank() != 3 || r == 0 || input.dim(1) % r != 0 || input.dim(2) % r != 0) {
    throw ShapeError("pixel_unshuffle: spatial dims of " + shape_string(input.shape()) +
                     " not divisible by r = " + std::to_string(r));
  }
  const std::size_t c = input.dim(0), h = input.dim(1) / r, w = input.dim(2) / r;
  auto fwd = shuffle_map(c, h, w, r);
  std::vector<std::size_t> inv(fwd.size());
  for (std::size_t k = 0; k < fwd.size(); ++k) inv[fwd[k]] = k;
  return gather(input, Shape{c * r * r, h, w}, std::move(inv));
}

Tensor adaptive_avg_pool_last(const Tensor& input, std::size_t out_len) {
  if (input.rank() != 2 || out_len == 0) throw ShapeError("adaptive_avg_pool_last: expected [C, T]");
  const std::size_t channels = input.dim(0), len = input.dim(1);
  if (out_len > len) throw ShapeError("adaptive_avg_pool_last: cannot pool to a longer length");
  std::vector<std::size_t> begin(out_len), end(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    begin[i] = i * len / out_len;
    end[i] = ((i + 1) * len + out_len - 1) / out_len;
  }
  auto x = input.data();
  std::vector<double> out(channels * out_len);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t i = 0; i < out_len; ++i) {
      double s = 0.0;
      for (std::size_t t = begin[i]; t < end[i]; ++t) s += x[c * len + t];
      out[c * out_len + i] = s / static_cast<double>(end[i] - begin[i]);
    }
  return Tensor::make_result(Shape{channels, out_len}, std::move(out), {input},
                             [input, channels, len, out_len, begin, end](const detail::Node& self) {
                               auto g = Tensor::grad_sink(input);
                               for (std::size_t c = 0; c < channels; ++c)
                                 for (std::size_t i = 0; i < out_len; ++i) {
                                   const double d = self.grad[c * out_len + i] /
                                                    static_cast<double>(end[i] - begin[i]);
                                   for (std::size_t t = begin[i]; t < end[i]; ++t) g[c * len + t] += d;
                                 }
                             });
}

Tensor nearest_resize_2d(const Tensor& input, std::size_t out_h, std::size_t out_w) {
  if (input.rank() != 3 || out_h == 0 || out_w == 0) {
    throw ShapeError("nearest_resize_2d: expected [C, H, W] and positive output size");
  }
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  std::vector<std::size_t> src(c * out_h * out_w);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < out_h; ++y)
      for (std::size_t x = 0; x < out_w; ++x)
        src[(ch * out_h + y) * out_w + x] = (ch * h + y * h / out_h) * w + x * w / out_w;
  return gather(input, Shape{c, out_h, out_w}, std::move(src));
}

}  // namespace cvc3

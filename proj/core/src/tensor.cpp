#include "naswot/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "naswot/error.hpp"

namespace naswot {
namespace {

void require_positive(const Shape4& s) {
  if (s.n == 0 || s.c == 0 || s.h == 0 || s.w == 0) {
    throw ShapeMismatch("tensor dimensions must all be >= 1");
  }
}

// Sum of per-sample partials in ascending order: independent of sample order.
double sorted_sum(std::vector<double>& partials) {
  std::sort(partials.begin(), partials.end());
  double total = 0.0;
  for (double p : partials) total += p;
  return total;
}

}  // namespace

Tensor4::Tensor4(Shape4 shape) : shape_(shape), data_(shape.numel(), 0.0f) {
  require_positive(shape_);
}

Tensor4::Tensor4(Shape4 shape, std::vector<float> values)
    : shape_(shape), data_(std::move(values)) {
  require_positive(shape_);
  if (data_.size() != shape_.numel()) {
    throw ShapeMismatch("tensor value count " + std::to_string(data_.size()) +
                        " does not match shape element count " +
                        std::to_string(shape_.numel()));
  }
}

Tensor4 Tensor4::select_rows(std::span<const std::size_t> rows) const {
  Shape4 s = shape_;
  s.n = rows.size();
  Tensor4 out(s);
  const std::size_t row_size = shape_.c * shape_.plane();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= shape_.n) throw std::out_of_range("Tensor4::select_rows: row out of range");
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(rows[i] * row_size), row_size,
                out.data_.begin() + static_cast<std::ptrdiff_t>(i * row_size));
  }
  return out;
}

bool Tensor4::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

bool Tensor4::all_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return v == 0.0f; });
}

Tensor4& Tensor4::operator+=(const Tensor4& other) {
  if (!(shape_ == other.shape_)) throw ShapeMismatch("tensor add: shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor4& Tensor4::operator*=(float factor) noexcept {
  for (float& v : data_) v *= factor;
  return *this;
}

Tensor4 conv2d(const Tensor4& x, const ConvWeights& weights, std::size_t stride,
               std::size_t padding) {
  const Shape4& in = x.shape();
  if (weights.in_channels != in.c) {
    throw ShapeMismatch("conv2d: weights expect " + std::to_string(weights.in_channels) +
                        " input channels, tensor has " + std::to_string(in.c));
  }
  const std::size_t k = weights.kernel;
  if (weights.values.size() != weights.out_channels * weights.fan_in()) {
    throw ShapeMismatch("conv2d: weight buffer size does not match its declared shape");
  }
  if (stride == 0 || in.h + 2 * padding < k || in.w + 2 * padding < k) {
    throw ShapeMismatch("conv2d: kernel larger than padded input or zero stride");
  }
  const std::size_t out_h = (in.h + 2 * padding - k) / stride + 1;
  const std::size_t out_w = (in.w + 2 * padding - k) / stride + 1;
  Tensor4 out(Shape4{in.n, weights.out_channels, out_h, out_w});

  const auto pad = static_cast<std::ptrdiff_t>(padding);
  const auto s = static_cast<std::ptrdiff_t>(stride);
  const auto ih = static_cast<std::ptrdiff_t>(in.h);
  const auto iw = static_cast<std::ptrdiff_t>(in.w);

  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t co = 0; co < weights.out_channels; ++co) {
      std::span<float> dst = out.plane(n, co);
      for (std::size_t ci = 0; ci < in.c; ++ci) {
        std::span<const float> src = x.plane(n, ci);
        const float* w = weights.values.data() + (co * in.c + ci) * k * k;
        for (std::size_t ky = 0; ky < k; ++ky) {
          for (std::size_t kx = 0; kx < k; ++kx) {
            const float wv = w[ky * k + kx];
            const auto dy = static_cast<std::ptrdiff_t>(ky) - pad;
            const auto dx = static_cast<std::ptrdiff_t>(kx) - pad;
            // Output columns whose input column ox*s+dx lies in [0, iw).
            std::ptrdiff_t ox_lo = dx >= 0 ? 0 : (-dx + s - 1) / s;
            std::ptrdiff_t ox_hi = std::min<std::ptrdiff_t>(
                static_cast<std::ptrdiff_t>(out_w), (iw - 1 - dx) / s + 1);
            if (iw - 1 - dx < 0) ox_hi = 0;
            for (std::size_t oy = 0; oy < out_h; ++oy) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy) * s + dy;
              if (iy < 0 || iy >= ih) continue;
              float* drow = dst.data() + oy * out_w;
              const float* srow = src.data() + iy * iw;
              if (s == 1) {
                for (std::ptrdiff_t ox = ox_lo; ox < ox_hi; ++ox) drow[ox] += wv * srow[ox + dx];
              } else {
                for (std::ptrdiff_t ox = ox_lo; ox < ox_hi; ++ox) drow[ox] += wv * srow[ox * s + dx];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor4 batchnorm_batchstats(const Tensor4& x, double epsilon) {
  const Shape4& s = x.shape();
  if (s.n < 2) throw std::invalid_argument("batchnorm_batchstats: batch must hold >= 2 samples");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("batchnorm_batchstats: epsilon must be >= 0");
  Tensor4 out(s);
  const auto count = static_cast<double>(s.n * s.plane());
  std::vector<double> partials(s.n);
  for (std::size_t c = 0; c < s.c; ++c) {
    for (std::size_t n = 0; n < s.n; ++n) {
      double acc = 0.0;
      for (float v : x.plane(n, c)) acc += v;
      partials[n] = acc;
    }
    const double mean = sorted_sum(partials) / count;
    for (std::size_t n = 0; n < s.n; ++n) {
      double acc = 0.0;
      for (float v : x.plane(n, c)) {
        const double d = static_cast<double>(v) - mean;
        acc += d * d;
      }
      partials[n] = acc;
    }
    const double var = sorted_sum(partials) / count;
    const double denom = var + epsilon;
    if (denom == 0.0) continue;  // constant channel, already zero
    const double inv_std = 1.0 / std::sqrt(denom);
    for (std::size_t n = 0; n < s.n; ++n) {
      std::span<const float> src = x.plane(n, c);
      std::span<float> dst = out.plane(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = static_cast<float>((static_cast<double>(src[i]) - mean) * inv_std);
      }
    }
  }
  return out;
}

Tensor4 avgpool3x3_same(const Tensor4& x) {
  const Shape4& s = x.shape();
  Tensor4 out(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      std::span<const float> src = x.plane(n, c);
      std::span<float> dst = out.plane(n, c);
      for (std::size_t y = 0; y < s.h; ++y) {
        const std::size_t y0 = y == 0 ? 0 : y - 1;
        const std::size_t y1 = std::min(s.h - 1, y + 1);
        for (std::size_t xx = 0; xx < s.w; ++xx) {
          const std::size_t x0 = xx == 0 ? 0 : xx - 1;
          const std::size_t x1 = std::min(s.w - 1, xx + 1);
          float acc = 0.0f;
          for (std::size_t yy = y0; yy <= y1; ++yy) {
            for (std::size_t xi = x0; xi <= x1; ++xi) acc += src[yy * s.w + xi];
          }
          dst[y * s.w + xx] = acc / static_cast<float>((y1 - y0 + 1) * (x1 - x0 + 1));
        }
      }
    }
  }
  return out;
}

Tensor4 avgpool2x2_stride2(const Tensor4& x) {
  const Shape4& s = x.shape();
  const std::size_t oh = (s.h + 1) / 2;
  const std::size_t ow = (s.w + 1) / 2;
  Tensor4 out(Shape4{s.n, s.c, oh, ow});
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      std::span<const float> src = x.plane(n, c);
      std::span<float> dst = out.plane(n, c);
      for (std::size_t y = 0; y < oh; ++y) {
        const std::size_t y1 = std::min(s.h, 2 * y + 2);
        for (std::size_t xx = 0; xx < ow; ++xx) {
          const std::size_t x1 = std::min(s.w, 2 * xx + 2);
          float acc = 0.0f;
          for (std::size_t yy = 2 * y; yy < y1; ++yy) {
            for (std::size_t xi = 2 * xx; xi < x1; ++xi) acc += src[yy * s.w + xi];
          }
          dst[y * ow + xx] = acc / static_cast<float>((y1 - 2 * y) * (x1 - 2 * xx));
        }
      }
    }
  }
  return out;
}

Tensor4 relu(const Tensor4& x) {
  Tensor4 out = x;
  for (float& v : out.values()) v = v > 0.0f ? v : 0.0f;
  return out;
}

Tensor4 global_avgpool(const Tensor4& x) {
  const Shape4& s = x.shape();
  Tensor4 out(Shape4{s.n, s.c, 1, 1});
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      double acc = 0.0;
      for (float v : x.plane(n, c)) acc += v;
      out.at(n, c, 0, 0) = static_cast<float>(acc / static_cast<double>(s.plane()));
    }
  }
  return out;
}

}  // namespace naswot

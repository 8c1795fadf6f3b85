#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace naswot {

struct Shape4 {
  std::size_t n = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t numel() const noexcept { return n * c * h * w; }
  std::size_t plane() const noexcept { return h * w; }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

// Dense NCHW float tensor.
class Tensor4 {
 public:
  Tensor4() = default;
  // Zero-filled. All dimensions must be >= 1.
  explicit Tensor4(Shape4 shape);
  Tensor4(Shape4 shape, std::vector<float> values);

  const Shape4& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }

  float& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }
  float at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }

  // Contiguous H*W plane of (sample, channel).
  std::span<float> plane(std::size_t n, std::size_t c) {
    return {data_.data() + (n * shape_.c + c) * shape_.plane(), shape_.plane()};
  }
  std::span<const float> plane(std::size_t n, std::size_t c) const {
    return {data_.data() + (n * shape_.c + c) * shape_.plane(), shape_.plane()};
  }

  // Batch of the given rows, in order (rows may repeat).
  Tensor4 select_rows(std::span<const std::size_t> rows) const;

  bool all_finite() const noexcept;
  bool all_zero() const noexcept;

  Tensor4& operator+=(const Tensor4& other);
  Tensor4& operator*=(float factor) noexcept;

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_{};
  std::vector<float> data_;
};

// Convolution weights, layout (out_channels, in_channels, k, k). No bias.
struct ConvWeights {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t kernel = 1;
  std::vector<float> values;

  std::size_t fan_in() const noexcept { return in_channels * kernel * kernel; }
};

// Cross-correlation with zero padding. Output spatial size is
// (H + 2*padding - kernel)/stride + 1, which for "same" padding
// ((kernel-1)/2) equals ceil(H/stride). Throws ShapeMismatch when the
// weights do not match the input channels or the output would be empty.
Tensor4 conv2d(const Tensor4& x, const ConvWeights& weights, std::size_t stride,
               std::size_t padding);

// Per-channel standardisation with mini-batch statistics, gamma = 1,
// beta = 0. Statistics are accumulated in double; per-sample partial sums
// are combined in sorted order so the result does not depend on the order
// of samples in the batch. A channel with var + epsilon == 0 maps to zeros.
// Requires batch >= 2.
Tensor4 batchnorm_batchstats(const Tensor4& x, double epsilon);

// 3x3 average pool, stride 1, padding 1; each output averages only the
// in-bounds taps.
Tensor4 avgpool3x3_same(const Tensor4& x);

// 2x2 average pool, stride 2, output ceil(H/2) x ceil(W/2); partial windows
// at an odd border average their in-bounds taps.
Tensor4 avgpool2x2_stride2(const Tensor4& x);

Tensor4 relu(const Tensor4& x);

// Mean over H, W: (N, C, H, W) -> (N, C, 1, 1).
Tensor4 global_avgpool(const Tensor4& x);

}  // namespace naswot

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "naswot/searchspace.hpp"
#include "naswot/tensor.hpp"

namespace naswot {

// Skeleton hyperparameters of a NAS-Bench-201 style network: a 3x3 stem,
// three stages of `cells_per_stage` cells separated by two residual
// downsampling blocks (stride 2, channels x2), and a BN-ReLU-GAP-linear
// head.
struct NetworkConfig {
  std::size_t stem_channels = 8;
  std::size_t cells_per_stage = 1;
  std::size_t input_channels = 3;
  std::size_t input_height = 8;
  std::size_t input_width = 8;
  double bn_epsilon = 1e-5;
  std::uint64_t init_seed = 0;
  std::size_t num_classes = 10;

  static constexpr std::size_t kStages = 3;

  // Stem 8, one cell per stage, 8x8x3 inputs.
  static NetworkConfig desk();
  // Stem 16, five cells per stage (the benchmark's N = 5), 32x32x3 inputs.
  static NetworkConfig full();

  // Throws ConfigError when a field is out of range.
  void validate() const;

  Shape4 batch_shape(std::size_t batch) const {
    return Shape4{batch, input_channels, input_height, input_width};
  }
};

// Bit-packed binary ReLU codes: one row per input, one bit per rectified
// linear unit, 64 bits per word. Padding bits past n_active are zero.
class ActivationCodeMatrix {
 public:
  ActivationCodeMatrix() = default;
  ActivationCodeMatrix(std::size_t rows, std::size_t n_active);

  // Rows given as '0'/'1' strings of equal length.
  static ActivationCodeMatrix from_strings(std::span<const std::string> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t n_active() const noexcept { return n_active_; }
  std::size_t words_per_row() const noexcept { return words_per_row_; }

  bool bit(std::size_t row, std::size_t index) const {
    return (words_[row * words_per_row_ + index / 64] >> (index % 64)) & 1U;
  }
  void set_bit(std::size_t row, std::size_t index, bool value) {
    std::uint64_t& word = words_[row * words_per_row_ + index / 64];
    const std::uint64_t mask = std::uint64_t{1} << (index % 64);
    word = value ? (word | mask) : (word & ~mask);
  }

  std::span<const std::uint64_t> row_words(std::size_t row) const {
    return {words_.data() + row * words_per_row_, words_per_row_};
  }

  friend bool operator==(const ActivationCodeMatrix&, const ActivationCodeMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t n_active_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> words_;
};

// A rectified-linear site in forward order, with the per-sample shape of
// the tensor it rectifies.
struct ReluSite {
  std::string name;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t units() const noexcept { return channels * height * width; }
};

// ReLU -> conv (no bias) -> batch-norm, the benchmark's conv edge.
struct ReluConvBn {
  ConvWeights conv;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

struct CellEdge {
  OpKind op = OpKind::kZeroise;
  std::optional<ReluConvBn> conv;  // present for the two conv ops
};

struct Cell {
  std::size_t channels = 0;
  std::array<CellEdge, kNumEdges> edges{};
};

// Residual downsampling block: ReLU-conv3x3(stride 2)-BN, ReLU-conv3x3-BN,
// plus a 2x2 average pool and 1x1 conv shortcut.
struct ResidualBlock {
  ReluConvBn conv_a;
  ReluConvBn conv_b;
  ConvWeights shortcut;
};

// Immutable randomly-initialised network. Structure is a function of
// (Genotype, NetworkConfig); weights are a function of config.init_seed.
class Network {
 public:
  using Block = std::variant<Cell, ResidualBlock>;

  const Genotype& genotype() const noexcept { return genotype_; }
  const NetworkConfig& config() const noexcept { return config_; }
  const ConvWeights& stem() const noexcept { return stem_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const ConvWeights& classifier() const noexcept { return classifier_; }

  // ReLU sites in the order their bits appear in an activation code.
  const std::vector<ReluSite>& relu_sites() const noexcept { return sites_; }

  // Logits (N, num_classes, 1, 1). When `codes` is non-null, each ReLU
  // site writes one bit per unit: 1 iff its input is > 0. Throws
  // NonFiniteActivation on NaN/Inf anywhere in the pass.
  Tensor4 forward(const Tensor4& batch, ActivationCodeMatrix* codes = nullptr) const;

  // Output of each cell in order, for inspection.
  std::vector<Tensor4> cell_outputs(const Tensor4& batch) const;

 private:
  friend Network build_network(const Genotype& g, const NetworkConfig& cfg);

  Genotype genotype_;
  NetworkConfig config_;
  ConvWeights stem_;
  std::vector<Block> blocks_;
  ConvWeights classifier_;  // 1x1 "conv" over pooled features
  std::vector<ReluSite> sites_;
};

Network build_network(const Genotype& g, const NetworkConfig& cfg);

// Runs the forward pass and returns the activation codes of every input.
// Requires batch shape == cfg.batch_shape(N) with N >= 2.
ActivationCodeMatrix forward_collect_codes(const Network& net, const Tensor4& batch);

// N_A for the given per-sample input shape (channels, height, width),
// derived from shape propagation without running data.
std::size_t count_relu_units(const Network& net, std::size_t channels, std::size_t height,
                             std::size_t width);
std::size_t count_relu_units(const Network& net);

}  // namespace naswot

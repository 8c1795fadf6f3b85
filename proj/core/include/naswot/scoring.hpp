#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "naswot/netengine.hpp"

namespace naswot {

// Square matrix of doubles, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}
  SquareMatrix(std::size_t n, std::vector<double> values);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

// K_H: entry (i, j) = N_A - d_H(c_i, c_j). Symmetric, diagonal N_A,
// entries in [0, N_A], positive semidefinite.
struct HammingKernel {
  SquareMatrix matrix;
  std::size_t n_active = 0;
};

// Word-wise XOR + popcount. Requires rows >= 2 and n_active >= 1.
HammingKernel hamming_kernel(const ActivationCodeMatrix& codes);

enum class ScoreStatus { kValid, kSingular, kNonFinite };

std::string_view status_name(ScoreStatus status) noexcept;

// Natural log-determinant of K_H with a validity status. Non-valid scores
// carry the lowest double as a sentinel and order below every valid score;
// all non-valid scores compare equal to each other.
struct Score {
  double value = std::numeric_limits<double>::lowest();
  ScoreStatus status = ScoreStatus::kSingular;

  static Score valid(double v) { return {v, ScoreStatus::kValid}; }
  static Score singular() { return {std::numeric_limits<double>::lowest(), ScoreStatus::kSingular}; }
  static Score non_finite() {
    return {std::numeric_limits<double>::lowest(), ScoreStatus::kNonFinite};
  }

  bool is_valid() const noexcept { return status == ScoreStatus::kValid; }

  friend std::partial_ordering operator<=>(const Score& a, const Score& b) {
    if (a.is_valid() != b.is_valid()) return a.is_valid() <=> b.is_valid();
    if (!a.is_valid()) return std::partial_ordering::equivalent;
    return a.value <=> b.value;
  }
  friend bool operator==(const Score& a, const Score& b) {
    return (a <=> b) == std::partial_ordering::equivalent;
  }
};

// log det via Cholesky: 2 * sum(log L_kk). A pivot at or below
// n * DBL_EPSILON * max|K| marks the kernel SINGULAR; non-finite entries
// give NON_FINITE.
Score logdet_score(const SquareMatrix& k);
Score logdet_score(const HammingKernel& k);

// Entry (i, j) / sqrt(k(i,i) * k(j,j)). Throws ZeroDiagonal.
SquareMatrix normalize_kernel(const SquareMatrix& k);
SquareMatrix normalize_kernel(const HammingKernel& k);

// Codes -> kernel -> score, with the kernel kept for inspection.
struct ScoredNetwork {
  HammingKernel kernel;
  Score score;
};

// build_network -> forward_collect_codes -> hamming_kernel -> logdet_score.
// NonFiniteActivation surfaces as status NON_FINITE (kernel left empty).
ScoredNetwork score_network_detailed(const Genotype& g, const NetworkConfig& cfg,
                                     const Tensor4& batch);
Score score_network(const Genotype& g, const NetworkConfig& cfg, const Tensor4& batch);

}  // namespace naswot

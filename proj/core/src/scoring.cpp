#include "naswot/scoring.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <stdexcept>

#include "naswot/error.hpp"

namespace naswot {

SquareMatrix::SquareMatrix(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_) throw std::invalid_argument("SquareMatrix: value count is not n*n");
}

HammingKernel hamming_kernel(const ActivationCodeMatrix& codes) {
  const std::size_t n = codes.rows();
  if (n < 2) throw std::invalid_argument("hamming_kernel: need at least 2 code rows");
  if (codes.n_active() < 1) throw std::invalid_argument("hamming_kernel: need at least 1 unit");
  const auto n_active = static_cast<double>(codes.n_active());
  HammingKernel k{SquareMatrix(n), codes.n_active()};
  for (std::size_t i = 0; i < n; ++i) {
    k.matrix(i, i) = n_active;
    const auto ri = codes.row_words(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto rj = codes.row_words(j);
      std::uint64_t distance = 0;
      for (std::size_t w = 0; w < ri.size(); ++w) distance += std::popcount(ri[w] ^ rj[w]);
      const double agree = n_active - static_cast<double>(distance);
      k.matrix(i, j) = agree;
      k.matrix(j, i) = agree;
    }
  }
  return k;
}

std::string_view status_name(ScoreStatus status) noexcept {
  switch (status) {
    case ScoreStatus::kValid:
      return "VALID";
    case ScoreStatus::kSingular:
      return "SINGULAR";
    case ScoreStatus::kNonFinite:
      return "NON_FINITE";
  }
  return "UNKNOWN";
}

Score logdet_score(const SquareMatrix& k) {
  const std::size_t n = k.size();
  if (n == 0) throw std::invalid_argument("logdet_score: empty matrix");
  double scale = 0.0;
  for (double v : k.values()) {
    if (!std::isfinite(v)) return Score::non_finite();
    scale = std::max(scale, std::abs(v));
  }
  const double tolerance = static_cast<double>(n) * DBL_EPSILON * scale;

  // Lower-triangular factor, row-major, computed in place.
  std::vector<double> l(k.values());
  double log_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = l[j * n + j];
    for (std::size_t p = 0; p < j; ++p) pivot -= l[j * n + p] * l[j * n + p];
    if (!(pivot > tolerance)) return Score::singular();
    const double diag = std::sqrt(pivot);
    l[j * n + j] = diag;
    log_sum += std::log(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = l[i * n + j];
      for (std::size_t p = 0; p < j; ++p) v -= l[i * n + p] * l[j * n + p];
      l[i * n + j] = v / diag;
    }
  }
  const double value = 2.0 * log_sum;
  if (!std::isfinite(value)) return Score::non_finite();
  return Score::valid(value);
}

Score logdet_score(const HammingKernel& k) { return logdet_score(k.matrix); }

SquareMatrix normalize_kernel(const SquareMatrix& k) {
  const std::size_t n = k.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (k(i, i) == 0.0) throw ZeroDiagonal("kernel diagonal entry " + std::to_string(i) + " is zero");
    if (k(i, i) < 0.0) throw std::invalid_argument("normalize_kernel: negative diagonal entry");
  }
  SquareMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j) = i == j ? 1.0 : k(i, j) / std::sqrt(k(i, i) * k(j, j));
    }
  }
  return out;
}

SquareMatrix normalize_kernel(const HammingKernel& k) { return normalize_kernel(k.matrix); }

ScoredNetwork score_network_detailed(const Genotype& g, const NetworkConfig& cfg,
                                     const Tensor4& batch) {
  const Network net = build_network(g, cfg);
  ActivationCodeMatrix codes;
  try {
    codes = forward_collect_codes(net, batch);
  } catch (const NonFiniteActivation&) {
    return {HammingKernel{}, Score::non_finite()};
  }
  HammingKernel kernel = hamming_kernel(codes);
  const Score score = logdet_score(kernel);
  return {std::move(kernel), score};
}

Score score_network(const Genotype& g, const NetworkConfig& cfg, const Tensor4& batch) {
  return score_network_detailed(g, cfg, batch).score;
}

}  // namespace naswot

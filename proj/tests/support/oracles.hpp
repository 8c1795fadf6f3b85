#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Deliberately naive: no bit packing, no factorization shortcuts.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "naswot/naswot.hpp"

namespace naswot::testing {

// Random 0/1 rows with a given probability of a set bit.
inline std::vector<std::vector<int>> random_bits(std::size_t rows, std::size_t cols, Rng& rng,
                                                 double p_one = 0.5) {
  std::vector<std::vector<int>> bits(rows, std::vector<int>(cols));
  for (auto& row : bits) {
    for (auto& b : row) b = rng.uniform01() < p_one ? 1 : 0;
  }
  return bits;
}

inline ActivationCodeMatrix to_codes(const std::vector<std::vector<int>>& bits) {
  const std::size_t cols = bits.empty() ? 0 : bits.front().size();
  ActivationCodeMatrix codes(bits.size(), cols);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) codes.set_bit(i, j, bits[i][j] != 0);
  }
  return codes;
}

// K(i,j) = number of positions where rows i and j agree.
inline std::vector<std::vector<double>> per_bit_kernel(const std::vector<std::vector<int>>& bits) {
  const std::size_t n = bits.size();
  std::vector<std::vector<double>> k(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t same = 0;
      for (std::size_t c = 0; c < bits[i].size(); ++c) same += bits[i][c] == bits[j][c] ? 1 : 0;
      k[i][j] = static_cast<double>(same);
    }
  }
  return k;
}

// Laplace expansion along the first row. Fine for n <= 8.
inline double cofactor_det(const std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  double det = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<std::vector<double>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (std::size_t c = 0; c < n; ++c) {
        if (c != col) row.push_back(m[r][c]);
      }
      minor.push_back(row);
    }
    const double sign = col % 2 == 0 ? 1.0 : -1.0;
    det += sign * m[0][col] * cofactor_det(minor);
  }
  return det;
}

inline SquareMatrix to_square(const std::vector<std::vector<double>>& m) {
  SquareMatrix out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) out(i, j) = m[i][j];
  }
  return out;
}

// Tau-b from explicit enumeration of all pairs.
inline double kendall_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t tie_x = 0;
  std::int64_t tie_y = 0;
  std::int64_t tie_both = 0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) {
        ++tie_both;
        ++tie_x;
        ++tie_y;
      } else if (dx == 0) {
        ++tie_x;
      } else if (dy == 0) {
        ++tie_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const std::int64_t n0 = static_cast<std::int64_t>(n * (n - 1) / 2);
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(n0 - tie_x) * static_cast<double>(n0 - tie_y));
}

// Vectors with a controllable amount of ties: values drawn from {0..levels-1}.
inline std::vector<double> random_levels(std::size_t n, std::size_t levels, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(rng.uniform_index(levels));
  return v;
}

}  // namespace naswot::testing

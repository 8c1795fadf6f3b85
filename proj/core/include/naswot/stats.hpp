#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "naswot/benchdata.hpp"
#include "naswot/scoring.hpp"
#include "naswot/search.hpp"

namespace naswot {

// Kendall's tau-b, (C - D) / sqrt((n0 - tx)(n0 - ty)), in O(n log n)
// (Knight's merge-sort method). Inputs must have equal length >= 2 and no
// NaN. Throws DegenerateInput when all x or all y are equal.
double kendall_tau(std::span<const double> x, std::span<const double> y);

struct CorrelationRow {
  Genotype genotype;
  Score score;
  double accuracy = 0.0;
};

// Rows hold every sampled architecture in sampling order; tau uses only
// the rows with a VALID score.
struct CorrelationReport {
  std::optional<double> tau;  // empty when fewer than two usable rows
  std::size_t n = 0;          // rows.size()
  std::size_t excluded_count = 0;
  std::vector<CorrelationRow> rows;

  std::size_t valid_count() const noexcept { return n - excluded_count; }
};

// Samples sample_n table entries without replacement (Rng(seed)), scores
// each untrained and correlates score with the chosen accuracy metric.
CorrelationReport correlate_space(const EvaluatorTable& table, const Scorer& scorer,
                                  std::size_t sample_n, std::uint64_t seed,
                                  AccuracyMetric metric = AccuracyMetric::kValidation,
                                  std::size_t jobs = 1);

enum class AblationMode { kBatches, kRandomInputs, kInits, kBatchSizes };

std::string_view ablation_mode_name(AblationMode mode) noexcept;
// Throws ConfigError on an unknown mode.
AblationMode ablation_mode_from_name(std::string_view name);

inline constexpr std::array<std::size_t, 4> kAblationBatchSizes = {32, 64, 128, 256};

struct AblationSetup {
  std::size_t batch_size = 32;
  std::uint64_t data_seed = 0;
  // Real images for kBatches / kBatchSizes; random normal inputs when null.
  const Cifar10Source* images = nullptr;
};

struct AblationRow {
  std::uint64_t level = 0;  // repeat index, init seed or batch size
  std::size_t repeat = 0;
  std::size_t batch_size = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t init_seed = 0;
  Score score;
};

// Repeated scorings of one architecture varying only the named factor:
//   kBatches      - a fresh mini-batch per repeat (images if available)
//   kRandomInputs - a fresh random-normal batch per repeat
//   kInits        - a fresh weight-init seed per repeat, batch fixed
//   kBatchSizes   - repeats for each size in {32, 64, 128, 256}
// Requires repeats >= 2.
std::vector<AblationRow> ablation_run(const Genotype& arch, const NetworkConfig& cfg,
                                      AblationMode mode, std::size_t repeats,
                                      const AblationSetup& setup);

// Divides every score by the minimum VALID score of its group. Non-valid
// scores map to empty. Throws EmptyGroup, AllSingularGroup, and
// DegenerateInput for a zero minimum.
std::map<std::size_t, std::vector<std::optional<double>>> normalize_by_min(
    const std::map<std::size_t, std::vector<Score>>& groups);

}  // namespace naswot

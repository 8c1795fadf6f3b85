#include "naswot/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "naswot/error.hpp"

namespace naswot {
namespace {

using Count = std::int64_t;

Count pairs(Count t) { return t * (t - 1) / 2; }

// Sorts v in place and returns the number of strict inversions.
Count merge_count(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                  std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  Count swaps = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<Count>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Sum of t(t-1)/2 over runs of equal values in a sorted sequence.
template <typename Eq>
Count tied_pairs(std::size_t n, Eq equal) {
  Count total = 0;
  Count run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal(i - 1, i)) {
      ++run;
    } else {
      total += pairs(run);
      run = 1;
    }
  }
  return total + pairs(run);
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall_tau: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("kendall_tau: need at least 2 observations");
  const auto is_nan = [](double v) { return std::isnan(v); };
  if (std::any_of(x.begin(), x.end(), is_nan) || std::any_of(y.begin(), y.end(), is_nan)) {
    throw std::invalid_argument("kendall_tau: NaN input");
  }
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  const Count n0 = pairs(static_cast<Count>(n));
  const Count tx = tied_pairs(n, [&](std::size_t a, std::size_t b) { return x[order[a]] == x[order[b]]; });
  const Count txy = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]] && y[order[a]] == y[order[b]];
  });

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> scratch(n);
  const Count discordant = merge_count(ys, scratch, 0, n);
  const Count ty = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  if (n0 == tx || n0 == ty) throw DegenerateInput("kendall_tau: all x or all y values are equal");
  const Count concordant_minus_discordant = n0 - tx - ty + txy - 2 * discordant;
  return static_cast<double>(concordant_minus_discordant) /
         std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
}

CorrelationReport correlate_space(const EvaluatorTable& table, const Scorer& scorer,
                                  std::size_t sample_n, std::uint64_t seed,
                                  AccuracyMetric metric, std::size_t jobs) {
  if (sample_n > table.size()) {
    throw ConfigError("cannot sample " + std::to_string(sample_n) + " architectures from a table of " +
                      std::to_string(table.size()));
  }
  Rng rng(seed);
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < sample_n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(order.size() - i));
    std::swap(order[i], order[j]);
  }
  std::vector<Genotype> sampled;
  sampled.reserve(sample_n);
  for (std::size_t i = 0; i < sample_n; ++i) sampled.push_back(table.records()[order[i]].genotype);

  const Evaluator accuracy = table_evaluator(table, metric);
  const auto scores = score_all(sampled, scorer, jobs);

  CorrelationReport report;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < sample_n; ++i) {
    const double acc = accuracy(sampled[i]);
    report.rows.push_back({sampled[i], scores[i], acc});
    if (scores[i].is_valid()) {
      xs.push_back(scores[i].value);
      ys.push_back(acc);
    } else {
      ++report.excluded_count;
    }
  }
  report.n = report.rows.size();
  if (xs.size() >= 2) {
    try {
      report.tau = kendall_tau(xs, ys);
    } catch (const DegenerateInput&) {
      report.tau.reset();
    }
  }
  return report;
}

std::string_view ablation_mode_name(AblationMode mode) noexcept {
  switch (mode) {
    case AblationMode::kBatches:
      return "batches";
    case AblationMode::kRandomInputs:
      return "random_inputs";
    case AblationMode::kInits:
      return "inits";
    case AblationMode::kBatchSizes:
      return "batch_sizes";
  }
  return "unknown";
}

AblationMode ablation_mode_from_name(std::string_view name) {
  for (AblationMode m : {AblationMode::kBatches, AblationMode::kRandomInputs, AblationMode::kInits,
                         AblationMode::kBatchSizes}) {
    if (ablation_mode_name(m) == name) return m;
  }
  throw ConfigError("unknown ablation mode '" + std::string(name) +
                    "' (expected batches, random_inputs, inits or batch_sizes)");
}

std::vector<AblationRow> ablation_run(const Genotype& arch, const NetworkConfig& cfg,
                                      AblationMode mode, std::size_t repeats,
                                      const AblationSetup& setup) {
  if (repeats < 2) throw ConfigError("ablation needs repeats >= 2");
  const auto make_batch = [&](std::size_t batch_size, std::uint64_t data_seed, bool images) {
    if (images && setup.images != nullptr) {
      Rng rng(data_seed);
      return setup.images->sample_batch(batch_size, rng);
    }
    return random_normal_batch(cfg.batch_shape(batch_size), data_seed);
  };
  const auto score_one = [&](std::uint64_t level, std::size_t repeat, std::size_t batch_size,
                             std::uint64_t data_seed, std::uint64_t init_seed, bool images) {
    NetworkConfig c = cfg;
    c.init_seed = init_seed;
    return AblationRow{level, repeat, batch_size, data_seed, init_seed,
                       score_network(arch, c, make_batch(batch_size, data_seed, images))};
  };

  std::vector<AblationRow> rows;
  switch (mode) {
    case AblationMode::kBatches:
    case AblationMode::kRandomInputs: {
      const bool images = mode == AblationMode::kBatches;
      for (std::size_t r = 0; r < repeats; ++r) {
        rows.push_back(score_one(r, r, setup.batch_size, derive_seed(setup.data_seed, r), cfg.init_seed,
                                 images));
      }
      break;
    }
    case AblationMode::kInits:
      for (std::size_t r = 0; r < repeats; ++r) {
        const std::uint64_t init = derive_seed(cfg.init_seed, r);
        rows.push_back(score_one(init, r, setup.batch_size, setup.data_seed, init, true));
      }
      break;
    case AblationMode::kBatchSizes:
      for (std::size_t bs : kAblationBatchSizes) {
        for (std::size_t r = 0; r < repeats; ++r) {
          rows.push_back(score_one(bs, r, bs, derive_seed(setup.data_seed, r), cfg.init_seed, true));
        }
      }
      break;
  }
  return rows;
}

std::map<std::size_t, std::vector<std::optional<double>>> normalize_by_min(
    const std::map<std::size_t, std::vector<Score>>& groups) {
  std::map<std::size_t, std::vector<std::optional<double>>> out;
  for (const auto& [key, scores] : groups) {
    if (scores.empty()) throw EmptyGroup("group " + std::to_string(key) + " is empty");
    std::optional<double> min;
    for (const Score& s : scores) {
      if (s.is_valid() && (!min || s.value < *min)) min = s.value;
    }
    if (!min) throw AllSingularGroup("group " + std::to_string(key) + " has no valid score");
    if (*min == 0.0) throw DegenerateInput("group " + std::to_string(key) + " has a zero minimum");
    auto& normalized = out[key];
    for (const Score& s : scores) {
      normalized.push_back(s.is_valid() ? std::optional<double>(s.value / *min) : std::nullopt);
    }
  }
  return out;
}

}  // namespace naswot

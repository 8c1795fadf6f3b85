#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "naswot/benchdata.hpp"
#include "naswot/scoring.hpp"
#include "naswot/searchspace.hpp"

namespace naswot {

// Training-free score of a genotype. Must be deterministic per genotype and
// safe to call concurrently when jobs > 1.
using Scorer = std::function<Score(const Genotype&)>;

// Trained accuracy (percent) of a genotype; stands in for training. May
// throw EvaluatorMiss.
using Evaluator = std::function<double(const Genotype&)>;

enum class AccuracyMetric { kValidation, kTest };

// Looks genotypes up in `table`. The table must outlive the evaluator.
// Throws EvaluatorMiss if the genotype or the requested metric is missing.
Evaluator table_evaluator(const EvaluatorTable& table, AccuracyMetric metric);

// Scorer that builds, runs and scores networks on a fixed batch.
Scorer network_scorer(const NetworkConfig& cfg, Tensor4 batch);

struct Candidate {
  Genotype genotype;
  std::optional<Score> score;
  std::optional<double> accuracy;
  std::size_t birth_index = 0;
};

struct SearchResult {
  Candidate chosen;
  std::vector<Candidate> history;  // in birth_index order
  double wall_time = 0.0;          // seconds
  std::uint64_t seed = 0;
};

// Scores every candidate (duplicates once) on up to `jobs` threads and
// returns the results in input order.
std::vector<Score> score_all(std::span<const Genotype> genotypes, const Scorer& scorer,
                             std::size_t jobs = 1);

// NASWOT: sample `sample_count` genotypes uniformly with replacement,
// score each untrained, return the highest score (earliest birth index on
// ties, including the all-non-valid case).
SearchResult naswot_search(std::size_t sample_count, const Scorer& scorer, std::uint64_t seed,
                           std::size_t jobs = 1);

// NASWOT over an explicit candidate list (enumeration mode).
SearchResult naswot_select(std::span<const Genotype> candidates, const Scorer& scorer,
                           std::size_t jobs = 1);

struct EvolutionConfig {
  std::size_t population_size = 10;
  std::size_t tournament_size = 5;
  // Total evaluations, counting the initial population.
  std::size_t budget_evals = 100;

  // Throws ConfigError.
  void validate() const;
};

// Evaluation budget equivalent to a time budget at a fixed per-network
// training cost, never less than the population size.
std::size_t budget_from_seconds(double seconds, double seconds_per_eval,
                                std::size_t population_size);

// Regularised (aging) evolution: random initial population, then
// tournament selection on accuracy, single-edge mutation, oldest removed,
// until budget_evals evaluations. Returns the most accurate network seen.
SearchResult rea_search(const Evaluator& evaluator, const EvolutionConfig& config,
                        std::uint64_t seed);

// REA whose initial population is the top population_size of
// pool_size scored random samples. Retained members keep their sampling
// order. With pool_size == population_size and the same seed, the run is
// identical to rea_search. History holds every pool member (with score)
// followed by the children.
SearchResult area_search(const Scorer& scorer, const Evaluator& evaluator, std::size_t pool_size,
                         const EvolutionConfig& config, std::uint64_t seed, std::size_t jobs = 1);

// CSV rows `index,arch,score,status,accuracy`; unscored rows have status
// UNSCORED, missing values are empty fields.
void write_run_log_rows(const SearchResult& result, std::ostream& out);

}  // namespace naswot

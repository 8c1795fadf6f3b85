#include "naswot/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>
#include <unordered_map>

#include "naswot/error.hpp"
#include "naswot/format.hpp"

namespace naswot {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Earliest candidate with the highest score.
std::size_t best_by_score(const std::vector<Candidate>& history) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (*history[i].score > *history[best].score) best = i;
  }
  return best;
}

// Earliest evaluated candidate with the highest accuracy.
std::size_t best_by_accuracy(const std::vector<Candidate>& history) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (!history[i].accuracy) continue;
    if (!best || *history[i].accuracy > *history[*best].accuracy) best = i;
  }
  return best.value();
}

double evaluate(const Evaluator& evaluator, const Genotype& g) {
  const double acc = evaluator(g);
  if (!std::isfinite(acc)) throw EvaluatorMiss("evaluator returned a non-finite accuracy for " + format_arch(g));
  return acc;
}

// Aging-evolution loop shared by REA and AREA. `population` holds history
// indices, oldest first.
void evolve(const Evaluator& evaluator, const EvolutionConfig& config, Rng& rng,
            std::vector<Candidate>& history, std::deque<std::size_t>& population,
            std::size_t evaluations) {
  std::vector<std::size_t> slots(population.size());
  while (evaluations < config.budget_evals) {
    // Tournament: sample without replacement, keep the most accurate (oldest on ties).
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    std::optional<std::size_t> parent;
    for (std::size_t i = 0; i < config.tournament_size; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(slots.size() - i));
      std::swap(slots[i], slots[j]);
      const std::size_t member = population[slots[i]];
      if (!parent || *history[member].accuracy > *history[*parent].accuracy ||
          (*history[member].accuracy == *history[*parent].accuracy && member < *parent)) {
        parent = member;
      }
    }
    Candidate child;
    child.genotype = mutate(history[*parent].genotype, rng);
    child.accuracy = evaluate(evaluator, child.genotype);
    child.birth_index = history.size();
    ++evaluations;
    population.pop_front();
    population.push_back(history.size());
    history.push_back(child);
  }
}

}  // namespace

Evaluator table_evaluator(const EvaluatorTable& table, AccuracyMetric metric) {
  return [&table, metric](const Genotype& g) {
    const BenchmarkRecord& rec = table.at(g);
    if (metric == AccuracyMetric::kValidation) return rec.val_acc;
    if (!rec.test_acc) throw EvaluatorMiss("no test accuracy for " + format_arch(g));
    return *rec.test_acc;
  };
}

Scorer network_scorer(const NetworkConfig& cfg, Tensor4 batch) {
  return [cfg, batch = std::move(batch)](const Genotype& g) { return score_network(g, cfg, batch); };
}

std::vector<Score> score_all(std::span<const Genotype> genotypes, const Scorer& scorer,
                             std::size_t jobs) {
  // Deduplicate first so no shared memo is touched by workers.
  std::vector<Genotype> unique;
  std::unordered_map<std::size_t, std::size_t> slot_of;
  std::vector<std::size_t> slot(genotypes.size());
  for (std::size_t i = 0; i < genotypes.size(); ++i) {
    const auto [it, fresh] = slot_of.try_emplace(genotypes[i].index(), unique.size());
    if (fresh) unique.push_back(genotypes[i]);
    slot[i] = it->second;
  }

  std::vector<Score> unique_scores(unique.size());
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(unique.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < unique.size(); ++i) unique_scores[i] = scorer(unique[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < unique.size(); i = next++) {
          try {
            unique_scores[i] = scorer(unique[i]);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<Score> scores(genotypes.size());
  for (std::size_t i = 0; i < genotypes.size(); ++i) scores[i] = unique_scores[slot[i]];
  return scores;
}

SearchResult naswot_select(std::span<const Genotype> candidates, const Scorer& scorer,
                           std::size_t jobs) {
  if (candidates.empty()) throw ConfigError("NASWOT needs at least one candidate");
  const auto start = Clock::now();
  const auto scores = score_all(candidates, scorer, jobs);
  SearchResult result;
  result.history.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    result.history.push_back(Candidate{candidates[i], scores[i], std::nullopt, i});
  }
  result.chosen = result.history[best_by_score(result.history)];
  result.wall_time = seconds_since(start);
  return result;
}

SearchResult naswot_search(std::size_t sample_count, const Scorer& scorer, std::uint64_t seed,
                           std::size_t jobs) {
  if (sample_count < 1) throw ConfigError("NASWOT sample count must be >= 1");
  const auto start = Clock::now();
  Rng rng(seed);
  std::vector<Genotype> samples;
  samples.reserve(sample_count);
  for (std::size_t i = 0; i < sample_count; ++i) samples.push_back(sample_uniform(rng));
  SearchResult result = naswot_select(samples, scorer, jobs);
  result.seed = seed;
  result.wall_time = seconds_since(start);
  return result;
}

void EvolutionConfig::validate() const {
  if (population_size < 2) throw ConfigError("population size must be >= 2");
  if (tournament_size < 1 || tournament_size > population_size) {
    throw ConfigError("tournament size must be in [1, population size]");
  }
  if (budget_evals < population_size) {
    throw ConfigError("evaluation budget must cover the initial population");
  }
}

std::size_t budget_from_seconds(double seconds, double seconds_per_eval,
                                std::size_t population_size) {
  if (!(seconds >= 0.0) || !(seconds_per_eval > 0.0)) {
    throw ConfigError("time budget must be >= 0 and per-evaluation cost > 0");
  }
  const double evals = std::floor(seconds / seconds_per_eval);
  return std::max(population_size, static_cast<std::size_t>(evals));
}

SearchResult rea_search(const Evaluator& evaluator, const EvolutionConfig& config,
                        std::uint64_t seed) {
  config.validate();
  const auto start = Clock::now();
  Rng rng(seed);
  SearchResult result;
  result.seed = seed;
  std::deque<std::size_t> population;
  for (std::size_t i = 0; i < config.population_size; ++i) {
    Candidate c;
    c.genotype = sample_uniform(rng);
    c.accuracy = evaluate(evaluator, c.genotype);
    c.birth_index = i;
    population.push_back(i);
    result.history.push_back(c);
  }
  evolve(evaluator, config, rng, result.history, population, config.population_size);
  result.chosen = result.history[best_by_accuracy(result.history)];
  result.wall_time = seconds_since(start);
  return result;
}

SearchResult area_search(const Scorer& scorer, const Evaluator& evaluator, std::size_t pool_size,
                         const EvolutionConfig& config, std::uint64_t seed, std::size_t jobs) {
  config.validate();
  if (pool_size < config.population_size) {
    throw ConfigError("AREA pool size must be >= population size");
  }
  const auto start = Clock::now();
  Rng rng(seed);
  SearchResult result;
  result.seed = seed;

  std::vector<Genotype> pool;
  pool.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) pool.push_back(sample_uniform(rng));
  const auto scores = score_all(pool, scorer, jobs);
  for (std::size_t i = 0; i < pool_size; ++i) {
    result.history.push_back(Candidate{pool[i], scores[i], std::nullopt, i});
  }

  // Top population_size by score; stable so ties keep the earlier sample.
  std::vector<std::size_t> order(pool_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> kept(order.begin(),
                                order.begin() + static_cast<std::ptrdiff_t>(config.population_size));
  std::sort(kept.begin(), kept.end());

  std::deque<std::size_t> population;
  for (std::size_t idx : kept) {
    result.history[idx].accuracy = evaluate(evaluator, result.history[idx].genotype);
    population.push_back(idx);
  }
  evolve(evaluator, config, rng, result.history, population, config.population_size);
  result.chosen = result.history[best_by_accuracy(result.history)];
  result.wall_time = seconds_since(start);
  return result;
}

void write_run_log_rows(const SearchResult& result, std::ostream& out) {
  out << "index,arch,score,status,accuracy\n";
  for (const auto& c : result.history) {
    out << c.birth_index << ',' << format_arch(c.genotype) << ',';
    if (c.score && c.score->is_valid()) out << format_full(c.score->value);
    out << ',' << (c.score ? status_name(c.score->status) : std::string_view("UNSCORED")) << ',';
    if (c.accuracy) out << format_full(*c.accuracy);
    out << '\n';
  }
}

}  // namespace naswot

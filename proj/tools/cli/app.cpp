#include "cli/app.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "naswot/naswot.hpp"
#include "naswot/format.hpp"

namespace naswot::cli {
namespace {

// Everything a run depends on. Echoed into the header of every output file.
struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::string scale = "desk";
  std::optional<std::size_t> stem_channels;
  std::optional<std::size_t> cells_per_stage;
  std::optional<std::size_t> image_size;
  std::optional<double> bn_eps;
  std::optional<std::uint64_t> arch_seed;
  std::optional<std::uint64_t> init_seed;
  std::optional<std::uint64_t> data_seed;
  std::optional<std::size_t> batch_size;
  std::string input = "random";
  std::string bench;
  std::string dataset = "cifar10";
  std::string metric = "val";
  std::optional<std::size_t> n;
  std::size_t pool = 20;
  std::size_t pop = 10;
  std::size_t tournament = 5;
  std::size_t budget = 100;
  std::optional<double> seconds;
  std::optional<double> eval_cost;
  std::size_t jobs = 1;
  std::string out;
  std::string kernel = "raw";
  std::string dump_kernel;
  std::vector<std::string> archs;
  std::string mode = "inits";
  std::size_t repeats = 20;

  // Resolved values.
  NetworkConfig net;
  std::size_t resolved_batch = 0;
  std::uint64_t resolved_arch_seed = 0;
  std::uint64_t resolved_data_seed = 0;
};

std::string cifar_dir(const RunConfig& rc) {
  constexpr std::string_view prefix = "cifar10:";
  if (rc.input.rfind(prefix, 0) == 0) return rc.input.substr(prefix.size());
  return {};
}

void resolve(RunConfig& rc) {
  if (rc.scale != "desk" && rc.scale != "full") throw ConfigError("--scale must be desk or full");
  const bool desk = rc.scale == "desk";
  NetworkConfig cfg = desk ? NetworkConfig::desk() : NetworkConfig::full();

  const bool images = !cifar_dir(rc).empty();
  if (!images && rc.input != "random") {
    throw ConfigError("--input must be 'random' or 'cifar10:<dir>'");
  }
  if (images) {
    if (rc.image_size && *rc.image_size != 32) throw ConfigError("cifar10 input requires --image-size 32");
    cfg.input_height = cfg.input_width = 32;
  }
  if (rc.stem_channels) cfg.stem_channels = *rc.stem_channels;
  if (rc.cells_per_stage) cfg.cells_per_stage = *rc.cells_per_stage;
  if (rc.image_size) cfg.input_height = cfg.input_width = *rc.image_size;
  if (rc.bn_eps) cfg.bn_epsilon = *rc.bn_eps;
  cfg.init_seed = rc.init_seed.value_or(derive_seed(rc.seed, SeedStream::kWeightInit));
  cfg.validate();
  rc.net = cfg;
  rc.resolved_batch = rc.batch_size.value_or(desk ? 32 : 128);
  if (rc.resolved_batch < 2) throw ConfigError("--batch-size must be >= 2");
  rc.resolved_arch_seed = rc.arch_seed.value_or(derive_seed(rc.seed, SeedStream::kArchitecture));
  rc.resolved_data_seed = rc.data_seed.value_or(derive_seed(rc.seed, SeedStream::kData));
  if (rc.jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (rc.metric != "val" && rc.metric != "test") throw ConfigError("--metric must be val or test");
}

void write_header(std::ostream& os, const RunConfig& rc) {
  const auto& c = rc.net;
  os << "# naswot " << rc.subcommand << '\n'
     << "# seed=" << rc.seed << '\n'
     << "# arch_seed=" << rc.resolved_arch_seed << '\n'
     << "# init_seed=" << c.init_seed << '\n'
     << "# data_seed=" << rc.resolved_data_seed << '\n'
     << "# scale=" << rc.scale << '\n'
     << "# stem_channels=" << c.stem_channels << '\n'
     << "# cells_per_stage=" << c.cells_per_stage << '\n'
     << "# input_shape=" << c.input_channels << 'x' << c.input_height << 'x' << c.input_width << '\n'
     << "# bn_epsilon=" << format_full(c.bn_epsilon) << '\n'
     << "# batch_size=" << rc.resolved_batch << '\n'
     << "# input=" << rc.input << '\n'
     << "# bench=" << rc.bench << '\n'
     << "# dataset=" << rc.dataset << '\n'
     << "# metric=" << rc.metric << '\n'
     << "# n=" << (rc.n ? std::to_string(*rc.n) : std::string()) << '\n'
     << "# pool=" << rc.pool << '\n'
     << "# pop=" << rc.pop << '\n'
     << "# tournament=" << rc.tournament << '\n'
     << "# budget=" << rc.budget << '\n'
     << "# seconds=" << (rc.seconds ? format_full(*rc.seconds) : std::string()) << '\n'
     << "# eval_cost=" << (rc.eval_cost ? format_full(*rc.eval_cost) : std::string()) << '\n'
     << "# mode=" << rc.mode << '\n'
     << "# repeats=" << rc.repeats << '\n';
  os << "# archs=";
  for (std::size_t i = 0; i < rc.archs.size(); ++i) os << (i ? ";" : "") << rc.archs[i];
  os << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open output file " + path);
  return os;
}

std::string output_path(const RunConfig& rc, std::string_view fallback) {
  return rc.out.empty() ? std::string(fallback) : rc.out;
}

Tensor4 make_batch(const RunConfig& rc, std::size_t batch_size, std::uint64_t data_seed) {
  const std::string dir = cifar_dir(rc);
  if (!dir.empty()) {
    Rng rng(data_seed);
    return load_cifar10_batch(dir, batch_size, rng);
  }
  return random_normal_batch(rc.net.batch_shape(batch_size), data_seed);
}

EvaluatorTable load_table(const RunConfig& rc) {
  if (rc.bench.empty()) throw ConfigError("--bench <csv> is required for " + rc.subcommand);
  return load_benchmark_csv(rc.bench, dataset_from_name(rc.dataset));
}

AccuracyMetric metric_of(const RunConfig& rc) {
  return rc.metric == "test" ? AccuracyMetric::kTest : AccuracyMetric::kValidation;
}

EvolutionConfig evolution_of(const RunConfig& rc) {
  EvolutionConfig evo{rc.pop, rc.tournament, rc.budget};
  if (rc.seconds) {
    if (!rc.eval_cost) throw ConfigError("--seconds requires --eval-cost <seconds per evaluation>");
    evo.budget_evals = budget_from_seconds(*rc.seconds, *rc.eval_cost, rc.pop);
  }
  evo.validate();
  return evo;
}

void write_kernel_csv(std::ostream& os, const SquareMatrix& k) {
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = 0; j < k.size(); ++j) os << (j ? "," : "") << format_full(k(i, j));
    os << '\n';
  }
}

SquareMatrix kernel_for_output(const HammingKernel& k, const std::string& kind) {
  if (kind == "raw") return k.matrix;
  if (kind == "normalized") return normalize_kernel(k);
  throw ConfigError("kernel kind must be raw or normalized");
}

void print_score(std::ostream& out, const Genotype& g, const ScoredNetwork& scored) {
  out << "arch=" << format_arch(g) << '\n'
      << "status=" << status_name(scored.score.status) << '\n'
      << "score=" << (scored.score.is_valid() ? format_short(scored.score.value) : "n/a") << '\n';
  if (scored.kernel.n_active > 0) out << "n_active=" << scored.kernel.n_active << '\n';
}

int cmd_score(RunConfig& rc, std::ostream& out) {
  const Genotype g = parse_arch(rc.archs.at(0));
  const Tensor4 batch = make_batch(rc, rc.resolved_batch, rc.resolved_data_seed);
  const ScoredNetwork scored = score_network_detailed(g, rc.net, batch);
  print_score(out, g, scored);
  if (!rc.dump_kernel.empty()) {
    if (rc.out.empty()) throw ConfigError("--dump-kernel needs --out <path>");
    if (scored.kernel.n_active == 0) throw NonFiniteActivation("no kernel: forward pass was non-finite");
    const SquareMatrix k = kernel_for_output(scored.kernel, rc.dump_kernel);
    auto os = open_output(rc.out);
    write_header(os, rc);
    write_kernel_csv(os, k);
  }
  return 0;
}

int cmd_dump_kernel(RunConfig& rc, std::ostream& out) {
  const Genotype g = parse_arch(rc.archs.at(0));
  const Tensor4 batch = make_batch(rc, rc.resolved_batch, rc.resolved_data_seed);
  const ScoredNetwork scored = score_network_detailed(g, rc.net, batch);
  if (scored.kernel.n_active == 0) throw NonFiniteActivation("no kernel: forward pass was non-finite");
  const SquareMatrix k = kernel_for_output(scored.kernel, rc.kernel);
  if (rc.out.empty()) {
    write_header(out, rc);
    write_kernel_csv(out, k);
  } else {
    auto os = open_output(rc.out);
    write_header(os, rc);
    write_kernel_csv(os, k);
  }
  return 0;
}

void write_run_log(const RunConfig& rc, const SearchResult& result, const std::string& path) {
  auto os = open_output(path);
  write_header(os, rc);
  write_run_log_rows(result, os);
}

int cmd_search(RunConfig& rc, std::ostream& out) {
  const std::size_t n = rc.n.value_or(10);
  const Scorer scorer = network_scorer(rc.net, make_batch(rc, rc.resolved_batch, rc.resolved_data_seed));
  const SearchResult result = naswot_search(n, scorer, rc.resolved_arch_seed, rc.jobs);
  const std::string path = output_path(rc, "naswot_search.csv");
  write_run_log(rc, result, path);
  out << "arch=" << format_arch(result.chosen.genotype) << '\n'
      << "status=" << status_name(result.chosen.score->status) << '\n'
      << "score="
      << (result.chosen.score->is_valid() ? format_short(result.chosen.score->value) : "n/a") << '\n'
      << "samples=" << result.history.size() << '\n'
      << "wall_time=" << format_short(result.wall_time) << "s\n"
      << "run_log=" << path << '\n';
  return 0;
}

void print_evolution(std::ostream& out, const SearchResult& result, const EvaluatorTable& table,
                     const std::string& path) {
  const BenchmarkRecord& rec = table.at(result.chosen.genotype);
  out << "arch=" << format_arch(result.chosen.genotype) << '\n'
      << "accuracy=" << format_short(*result.chosen.accuracy) << '\n'
      << "val_acc=" << format_short(rec.val_acc) << '\n'
      << "test_acc=" << (rec.test_acc ? format_short(*rec.test_acc) : "n/a") << '\n'
      << "evaluations=" << std::count_if(result.history.begin(), result.history.end(),
                                          [](const Candidate& c) { return c.accuracy.has_value(); })
      << '\n'
      << "wall_time=" << format_short(result.wall_time) << "s\n"
      << "run_log=" << path << '\n';
}

int cmd_rea(RunConfig& rc, std::ostream& out) {
  const EvaluatorTable table = load_table(rc);
  const SearchResult result =
      rea_search(table_evaluator(table, metric_of(rc)), evolution_of(rc), rc.resolved_arch_seed);
  const std::string path = output_path(rc, "naswot_rea.csv");
  write_run_log(rc, result, path);
  print_evolution(out, result, table, path);
  return 0;
}

int cmd_area(RunConfig& rc, std::ostream& out) {
  const EvaluatorTable table = load_table(rc);
  const Scorer scorer = network_scorer(rc.net, make_batch(rc, rc.resolved_batch, rc.resolved_data_seed));
  const SearchResult result = area_search(scorer, table_evaluator(table, metric_of(rc)), rc.pool,
                                          evolution_of(rc), rc.resolved_arch_seed, rc.jobs);
  const std::string path = output_path(rc, "naswot_area.csv");
  write_run_log(rc, result, path);
  print_evolution(out, result, table, path);
  return 0;
}

int cmd_correlate(RunConfig& rc, std::ostream& out) {
  const EvaluatorTable table = load_table(rc);
  const std::size_t n = rc.n.value_or(1000);
  const Scorer scorer = network_scorer(rc.net, make_batch(rc, rc.resolved_batch, rc.resolved_data_seed));
  const CorrelationReport report =
      correlate_space(table, scorer, n, rc.resolved_arch_seed, metric_of(rc), rc.jobs);
  const std::string tau = report.tau ? format_full(*report.tau) : "nan";
  const std::string path = output_path(rc, "naswot_correlate.csv");
  {
    auto os = open_output(path);
    write_header(os, rc);
    os << "arch,score,status,accuracy\n";
    for (const auto& row : report.rows) {
      os << format_arch(row.genotype) << ','
         << (row.score.is_valid() ? format_full(row.score.value) : std::string()) << ','
         << status_name(row.score.status) << ',' << format_full(row.accuracy) << '\n';
    }
    os << "# summary tau=" << tau << " n=" << report.n << " excluded=" << report.excluded_count << '\n';
  }
  out << "tau=" << (report.tau ? format_short(*report.tau) : "nan") << '\n'
      << "n=" << report.n << '\n'
      << "excluded=" << report.excluded_count << '\n'
      << "report=" << path << '\n';
  return 0;
}

int cmd_ablate(RunConfig& rc, std::ostream& out) {
  if (rc.archs.empty()) throw ConfigError("ablate needs at least one --arch");
  const AblationMode mode = ablation_mode_from_name(rc.mode);
  std::optional<Cifar10Source> images;
  if (const std::string dir = cifar_dir(rc); !dir.empty()) images.emplace(dir);
  const AblationSetup setup{rc.resolved_batch, rc.resolved_data_seed, images ? &*images : nullptr};

  struct Entry {
    std::string arch;
    AblationRow row;
  };
  std::vector<Entry> entries;
  for (const auto& text : rc.archs) {
    const Genotype g = parse_arch(text);
    for (const auto& row : ablation_run(g, rc.net, mode, rc.repeats, setup)) {
      entries.push_back({format_arch(g), row});
    }
  }

  std::vector<std::optional<double>> normalized(entries.size());
  const bool by_size = mode == AblationMode::kBatchSizes;
  if (by_size) {
    std::map<std::size_t, std::vector<Score>> groups;
    std::map<std::size_t, std::vector<std::size_t>> positions;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      groups[entries[i].row.batch_size].push_back(entries[i].row.score);
      positions[entries[i].row.batch_size].push_back(i);
    }
    const auto norm = normalize_by_min(groups);
    for (const auto& [size, values] : norm) {
      for (std::size_t k = 0; k < values.size(); ++k) normalized[positions[size][k]] = values[k];
    }
  }

  const std::string path = output_path(rc, "naswot_ablate.csv");
  {
    auto os = open_output(path);
    write_header(os, rc);
    os << "arch,mode,level,repeat,batch_size,data_seed,init_seed,score,status";
    if (by_size) os << ",normalized";
    os << '\n';
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& [arch, row] = entries[i];
      os << arch << ',' << rc.mode << ',' << row.level << ',' << row.repeat << ',' << row.batch_size
         << ',' << row.data_seed << ',' << row.init_seed << ','
         << (row.score.is_valid() ? format_full(row.score.value) : std::string()) << ','
         << status_name(row.score.status);
      if (by_size) os << ',' << (normalized[i] ? format_full(*normalized[i]) : std::string());
      os << '\n';
    }
  }
  out << "mode=" << rc.mode << '\n' << "rows=" << entries.size() << '\n' << "table=" << path << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Training-free architecture scoring and search over the NAS-Bench-201 cell space",
               "naswot"};
  app.set_config("--config", "", "Read key=value option defaults from a file");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--seed", rc.seed, "Master seed (split into arch/init/data streams)");
  app.add_option("--scale", rc.scale, "Preset network/batch scale: desk or full");
  app.add_option("--stem-channels", rc.stem_channels, "Stem channel count");
  app.add_option("--cells-per-stage", rc.cells_per_stage, "Cells per stage");
  app.add_option("--image-size", rc.image_size, "Input height and width");
  app.add_option("--bn-eps", rc.bn_eps, "Batch-norm epsilon");
  app.add_option("--arch-seed", rc.arch_seed, "Override the architecture-sampling seed");
  app.add_option("--init-seed", rc.init_seed, "Override the weight-init seed");
  app.add_option("--data-seed", rc.data_seed, "Override the data-sampling seed");
  app.add_option("--batch-size", rc.batch_size, "Mini-batch size");
  app.add_option("--input", rc.input, "random | cifar10:<dir>");
  app.add_option("--bench", rc.bench, "Benchmark accuracy CSV (arch,dataset,val_acc,test_acc)");
  app.add_option("--dataset", rc.dataset, "Benchmark dataset tag to load");
  app.add_option("--metric", rc.metric, "Accuracy used by search/correlation: val or test");
  app.add_option("--n", rc.n, "Sample count");
  app.add_option("--pool", rc.pool, "AREA pool size");
  app.add_option("--pop", rc.pop, "Evolution population size");
  app.add_option("--tournament", rc.tournament, "Tournament size");
  app.add_option("--budget", rc.budget, "Evaluation budget (includes the initial population)");
  app.add_option("--seconds", rc.seconds, "Time budget in simulated seconds (needs --eval-cost)");
  app.add_option("--eval-cost", rc.eval_cost, "Simulated seconds per evaluation");
  app.add_option("--jobs", rc.jobs, "Parallel scoring workers");
  app.add_option("--out", rc.out, "Output file");

  auto* score = app.add_subcommand("score", "Score one architecture");
  score->add_option("arch", rc.archs, "Canonical architecture string")->required()->expected(1);
  score->add_option("--dump-kernel", rc.dump_kernel, "Also write the kernel CSV: raw | normalized");

  auto* dump = app.add_subcommand("dump-kernel", "Write the Hamming kernel of one architecture as CSV");
  dump->add_option("arch", rc.archs, "Canonical architecture string")->required()->expected(1);
  dump->add_option("--kernel", rc.kernel, "raw | normalized");

  app.add_subcommand("search", "NASWOT: sample --n architectures, return the best score");
  app.add_subcommand("rea", "Regularised evolution over benchmark accuracies");
  app.add_subcommand("area", "Score-assisted regularised evolution");
  app.add_subcommand("correlate", "Kendall tau between untrained score and benchmark accuracy");
  auto* ablate = app.add_subcommand("ablate", "Score robustness ablations");
  ablate->add_option("--arch", rc.archs, "Architecture (repeatable)");
  ablate->add_option("--mode", rc.mode, "batches | random_inputs | inits | batch_sizes");
  ablate->add_option("--repeats", rc.repeats, "Scorings per factor level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[UsageError]: " << e.what() << '\n';
    return 2;
  }

  try {
    rc.subcommand = app.get_subcommands().front()->get_name();
    resolve(rc);
    if (rc.subcommand == "score") return cmd_score(rc, out);
    if (rc.subcommand == "dump-kernel") return cmd_dump_kernel(rc, out);
    if (rc.subcommand == "search") return cmd_search(rc, out);
    if (rc.subcommand == "rea") return cmd_rea(rc, out);
    if (rc.subcommand == "area") return cmd_area(rc, out);
    if (rc.subcommand == "correlate") return cmd_correlate(rc, out);
    if (rc.subcommand == "ablate") return cmd_ablate(rc, out);
    err << "error[UsageError]: unknown subcommand\n";
    return 2;
  } catch (const Error& e) {
    err << "error[" << e.tag() << "]: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error[Internal]: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace naswot::cli

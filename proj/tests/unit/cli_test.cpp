#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli/app.hpp"
#include "naswot/format.hpp"
#include "naswot/naswot.hpp"

namespace naswot {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "naswot");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> data_lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.front() != '#') lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

std::string value_of(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("naswot_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string file(const std::string& name) const { return (dir_ / name).string(); }

  // The scoring setup used by the CLI for the flags in kNetFlags.
  static NetworkConfig net_config() {
    NetworkConfig cfg = NetworkConfig::desk();
    cfg.init_seed = 0;
    return cfg;
  }
  static Scorer scorer() { return network_scorer(net_config(), random_normal_batch(net_config().batch_shape(16), 0)); }

  std::vector<std::string> with_net(std::initializer_list<std::string> rest) const {
    std::vector<std::string> args = {"--init-seed", "0", "--data-seed", "0", "--batch-size", "16"};
    args.insert(args.end(), rest);
    return args;
  }

  void write_table(const std::string& path, const std::vector<std::pair<Genotype, double>>& rows) {
    std::ofstream out(path);
    out << "arch,dataset,val_acc,test_acc\n";
    for (const auto& [g, acc] : rows) out << format_arch(g) << ",cifar10," << format_full(acc) << ",\n";
  }

  fs::path dir_;
};

const std::string kZero = "|none~0|+|none~0|none~1|+|none~0|none~1|none~2|";
const std::string kConv =
    "|nor_conv_3x3~0|+|nor_conv_3x3~0|nor_conv_3x3~1|+|nor_conv_3x3~0|nor_conv_3x3~1|nor_conv_3x3~2|";

TEST_F(CliTest, ScoreZeroiseIsSingular) {
  const Outcome r = run_cli({"score", kZero});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(value_of(r.out, "status"), "SINGULAR");
}

TEST_F(CliTest, ScoreIsRepeatable) {
  const Outcome a = run_cli({"--seed", "4", "score", kConv});
  const Outcome b = run_cli({"--seed", "4", "score", kConv});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(value_of(a.out, "status"), "VALID");
}

TEST_F(CliTest, ScoreMatchesLibrary) {
  const Outcome r = run_cli(with_net({"score", kConv}));
  EXPECT_EQ(value_of(r.out, "score"), format_short(scorer()(parse_arch(kConv)).value));
}

TEST_F(CliTest, NormalizedKernelDumpHasUnitDiagonal) {
  const Outcome r = run_cli(with_net({"--out", file("k.csv"), "score", kConv, "--dump-kernel", "normalized"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(file("k.csv"));
  EXPECT_EQ(text.rfind("# naswot score\n", 0), 0u);
  const auto lines = data_lines(file("k.csv"));
  ASSERT_EQ(lines.size(), 16u);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    ASSERT_EQ(cells.size(), 16u);
    EXPECT_EQ(std::stod(cells[i]), 1.0);
  }
}

TEST_F(CliTest, DumpKernelRawDiagonalIsUnitCount) {
  const Outcome r = run_cli(with_net({"--out", file("k.csv"), "dump-kernel", kConv}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(file("k.csv"));
  ASSERT_EQ(lines.size(), 16u);
  for (std::size_t i = 0; i < lines.size(); ++i) EXPECT_EQ(split(lines[i])[i], "6656");
}

TEST_F(CliTest, SearchWritesOneRowPerSample) {
  const Outcome r = run_cli({"--seed", "2", "--n", "10", "--out", file("s.csv"), "search"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(file("s.csv"));
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[0], "index,arch,score,status,accuracy");
  double best = -1e300;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    if (cells[3] == "VALID") best = std::max(best, std::stod(cells[2]));
  }
  EXPECT_EQ(value_of(r.out, "score"), format_short(best));
}

TEST_F(CliTest, SearchRerunIsByteIdentical) {
  ASSERT_EQ(run_cli({"--seed", "3", "--n", "6", "--out", file("a.csv"), "search"}).code, 0);
  ASSERT_EQ(run_cli({"--seed", "3", "--n", "6", "--out", file("b.csv"), "--jobs", "2", "search"}).code, 0);
  // The header echoes --out and --jobs only indirectly; the rows must match.
  EXPECT_EQ(data_lines(file("a.csv")), data_lines(file("b.csv")));
  ASSERT_EQ(run_cli({"--seed", "3", "--n", "6", "--out", file("c.csv"), "search"}).code, 0);
  EXPECT_EQ(slurp(file("a.csv")), slurp(file("c.csv")));
}

TEST_F(CliTest, ReaBudgetEqualsPopulation) {
  std::vector<std::pair<Genotype, double>> rows;
  for (const Genotype& g : enumerate_all()) rows.emplace_back(g, static_cast<double>(g.index() % 97));
  write_table(file("bench.csv"), rows);
  const Outcome r = run_cli({"--bench", file("bench.csv"), "--budget", "10", "--pop", "10",
                             "--out", file("rea.csv"), "rea"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(file("rea.csv"));
  ASSERT_EQ(lines.size(), 11u);
  double best = -1;
  for (std::size_t i = 1; i < lines.size(); ++i) best = std::max(best, std::stod(split(lines[i])[4]));
  EXPECT_EQ(value_of(r.out, "accuracy"), format_short(best));

  const Outcome no_cost = run_cli({"--bench", file("bench.csv"), "--seconds", "20", "rea"});
  EXPECT_EQ(no_cost.err.rfind("error[ConfigError]: ", 0), 0u);
  ASSERT_EQ(run_cli({"--bench", file("bench.csv"), "--seconds", "20", "--eval-cost", "1.0", "--out",
                     file("timed.csv"), "rea"}).code, 0);
  EXPECT_EQ(data_lines(file("timed.csv")).size(), 21u);
}

TEST_F(CliTest, MissingArchRowNamesTheArch) {
  write_table(file("bench.csv"), {{parse_arch(kConv), 90.0}});
  const Outcome r = run_cli({"--bench", file("bench.csv"), "rea"});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.err.rfind("error[EvaluatorMiss]: ", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("~0|+|"), std::string::npos);
}

TEST_F(CliTest, AreaMonotoneTableReachesPoolMaximum) {
  // Replicate the pool the CLI will draw, then make accuracy increase with score.
  const std::uint64_t arch_seed = 77;
  Rng rng(arch_seed);
  std::vector<Genotype> pool;
  for (int i = 0; i < 20; ++i) pool.push_back(sample_uniform(rng));
  const auto scores = score_all(pool, scorer());
  std::vector<std::pair<Genotype, double>> rows;
  double best = -1;
  std::set<Genotype> seen;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!seen.insert(pool[i]).second) continue;
    const double acc = scores[i].is_valid() ? std::clamp(scores[i].value / 3.0, 0.0, 100.0) : 0.0;
    best = std::max(best, acc);
    rows.emplace_back(pool[i], acc);
  }
  write_table(file("bench.csv"), rows);
  auto args = with_net({"--arch-seed", "77", "--bench", file("bench.csv"), "--pool", "20", "--pop", "10",
                        "--budget", "10", "--out", file("area.csv"), "area"});
  const Outcome r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "accuracy"), format_short(best));
}

TEST_F(CliTest, CorrelateOnScoreTableIsPerfect) {
  std::vector<Genotype> gs;
  for (std::size_t i = 0; i < 40; ++i) gs.push_back(Genotype::from_index(i * 389 + 1));
  const auto scores = score_all(gs, scorer());
  std::vector<std::pair<Genotype, double>> rows;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    rows.emplace_back(gs[i], scores[i].is_valid() ? std::clamp(scores[i].value / 3.0, 0.0, 100.0) : 0.0);
  }
  write_table(file("bench.csv"), rows);
  const Outcome r = run_cli(with_net({"--bench", file("bench.csv"), "--n", "30", "--out", file("c.csv"), "correlate"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "tau"), "1");
  const auto lines = data_lines(file("c.csv"));
  EXPECT_EQ(lines.size(), 31u);
  EXPECT_EQ(lines[0], "arch,score,status,accuracy");
  EXPECT_NE(slurp(file("c.csv")).find("# summary tau=1 n=30 excluded="), std::string::npos);
}

TEST_F(CliTest, AblateInitsHasOneRowPerRepeat) {
  const Outcome r = run_cli(with_net({"--out", file("ab.csv"), "ablate", "--arch", kConv, "--mode", "inits"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_lines(file("ab.csv")).size(), 21u);
}

TEST_F(CliTest, AblateBatchSizesGroups) {
  const Outcome r = run_cli(with_net({"--out", file("ab.csv"), "ablate", "--arch", kConv, "--arch",
                                      "|nor_conv_1x1~0|+|nor_conv_1x1~0|nor_conv_1x1~1|+|nor_conv_1x1~0|"
                                      "nor_conv_1x1~1|nor_conv_1x1~2|",
                                      "--mode", "batch_sizes", "--repeats", "2"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(file("ab.csv"));
  ASSERT_EQ(lines.size(), 17u);
  EXPECT_EQ(split(lines[0]).back(), "normalized");
  std::map<std::string, double> min_norm;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    const double norm = std::stod(cells[9]);
    EXPECT_GE(norm, 1.0);
    auto [it, fresh] = min_norm.try_emplace(cells[4], norm);
    if (!fresh) it->second = std::min(it->second, norm);
  }
  ASSERT_EQ(min_norm.size(), 4u);
  for (const char* bs : {"32", "64", "128", "256"}) EXPECT_EQ(min_norm.at(bs), 1.0);
}

TEST_F(CliTest, AblateRejectsUnknownMode) {
  const Outcome r = run_cli({"--out", file("ab.csv"), "ablate", "--arch", kConv, "--mode", "seeds"});
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(r.err.rfind("error[ConfigError]: ", 0), 0u);
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  {
    std::ofstream cfg(file("run.cfg"));
    cfg << "seed=5\nn=4\nout=" << file("s.csv") << "\n";
  }
  const Outcome r = run_cli({"--config", file("run.cfg"), "search"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_lines(file("s.csv")).size(), 5u);
  EXPECT_NE(slurp(file("s.csv")).find("# seed=5\n"), std::string::npos);
}

TEST_F(CliTest, HeaderEchoesConfiguration) {
  ASSERT_EQ(run_cli({"--seed", "9", "--n", "2", "--out", file("s.csv"), "search"}).code, 0);
  const std::string text = slurp(file("s.csv"));
  for (const char* key : {"# naswot search\n", "# seed=9\n", "# arch_seed=", "# init_seed=", "# data_seed=",
                          "# batch_size=32\n", "# input=random\n", "# stem_channels=8\n"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST_F(CliTest, UsageAndConfigErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"score"}).code, 2);
  const Outcome bad_arch = run_cli({"score", "|x|"});
  EXPECT_EQ(bad_arch.code, 1);
  EXPECT_EQ(bad_arch.err.rfind("error[MalformedArchString]: ", 0), 0u);
  EXPECT_EQ(run_cli({"--scale", "huge", "score", kConv}).code, 1);
  EXPECT_EQ(run_cli({"--input", "cifar10:/x", "--image-size", "16", "score", kConv}).code, 1);
  const Outcome missing = run_cli({"--input", "cifar10:/nonexistent", "score", kConv});
  EXPECT_EQ(missing.err.rfind("error[MissingFile]: ", 0), 0u);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

}  // namespace
}  // namespace naswot

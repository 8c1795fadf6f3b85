#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "naswot/benchdata.hpp"
#include "naswot/error.hpp"

namespace naswot {
namespace {

namespace fs = std::filesystem;

const std::string kA =
    "|nor_conv_3x3~0|+|nor_conv_3x3~0|nor_conv_3x3~1|+|nor_conv_3x3~0|nor_conv_3x3~1|nor_conv_3x3~2|";
const std::string kB = "|none~0|+|none~0|none~1|+|none~0|none~1|none~2|";
const std::string kC =
    "|skip_connect~0|+|skip_connect~0|skip_connect~1|+|skip_connect~0|skip_connect~1|skip_connect~2|";

EvaluatorTable parse(const std::string& text, std::optional<DatasetTag> ds = std::nullopt) {
  std::istringstream in(text);
  return read_benchmark_csv(in, ds);
}

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / ("naswot_" + std::string(info->name()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_cifar(const fs::path& file, std::size_t records, std::ptrdiff_t extra_bytes, Rng& rng) {
  std::ofstream out(file, std::ios::binary);
  const auto total = static_cast<std::ptrdiff_t>(records * kCifarRecordBytes) + extra_bytes;
  std::vector<char> bytes(static_cast<std::size_t>(total));
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<char>(i % kCifarRecordBytes == 0 ? rng.uniform_index(10) : rng.uniform_index(256));
  }
  out.write(bytes.data(), total);
}

TEST(BenchmarkCsv, HeaderOnlyIsEmpty) {
  EXPECT_EQ(parse("arch,dataset,val_acc,test_acc\n").size(), 0u);
}

TEST(BenchmarkCsv, ThreeRows) {
  const EvaluatorTable t = parse("# export\narch,dataset,val_acc,test_acc\n" + kA +
                                 ",cifar10,91.5,93.25\r\n" + kB + ",cifar10,10,\n\n" + kC +
                                 ",cifar10,55.125,54\n");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.at(parse_arch(kA)).val_acc, 91.5);
  EXPECT_EQ(t.at(parse_arch(kA)).test_acc, 93.25);
  EXPECT_EQ(t.at(parse_arch(kB)).val_acc, 10.0);
  EXPECT_FALSE(t.at(parse_arch(kB)).test_acc.has_value());
  EXPECT_EQ(t.at(parse_arch(kC)).test_acc, 54.0);
  EXPECT_EQ(t.find(Genotype::uniform(OpKind::kConv1x1)), nullptr);
  EXPECT_THROW(t.at(Genotype::uniform(OpKind::kConv1x1)), EvaluatorMiss);
}

TEST(BenchmarkCsv, Errors) {
  const std::string h = "arch,dataset,val_acc,test_acc\n";
  EXPECT_THROW(parse(h + kA + ",cifar10,101,90\n"), ParseError);
  EXPECT_THROW(parse(h + kA + ",cifar10,-1,90\n"), ParseError);
  EXPECT_THROW(parse(h + kA + ",cifar10,abc,90\n"), ParseError);
  EXPECT_THROW(parse(h + kA + ",cifar10,90\n"), ParseError);
  EXPECT_THROW(parse(h + kA + ",mnist,90,90\n"), ParseError);
  EXPECT_THROW(parse("arch,val\n"), ParseError);
  EXPECT_THROW(parse(h + "|bad|,cifar10,90,90\n"), ParseError);
  EXPECT_THROW(parse(h + kA + ",cifar10,90,90\n" + kA + ",cifar10,80,80\n"), DuplicateKey);
  EXPECT_THROW(parse(h + kA + ",cifar10,90,90\n" + kB + ",cifar100,80,80\n"), ParseError);
}

TEST(BenchmarkCsv, DatasetFilter) {
  const std::string text = "arch,dataset,val_acc,test_acc\n" + kA + ",cifar10,90,90\n" + kA +
                           ",cifar100,70,70\n" + kB + ",imagenet16-120,40,\n";
  const EvaluatorTable t = parse(text, DatasetTag::kCifar100);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.dataset(), DatasetTag::kCifar100);
  EXPECT_EQ(t.at(parse_arch(kA)).val_acc, 70.0);
}

TEST(BenchmarkCsv, RoundTrip) {
  EvaluatorTable t;
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Genotype g = Genotype::from_index(rng.uniform_index(kSpaceSize));
    if (t.find(g) != nullptr) continue;
    std::optional<double> test;
    if (i % 3 != 0) test = 100.0 * rng.uniform01();
    t.insert({g, DatasetTag::kCifar10, 100.0 * rng.uniform01(), test});
  }
  std::ostringstream os;
  write_benchmark_csv(t, os);
  const EvaluatorTable back = parse(os.str());
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.records()[i].genotype, t.records()[i].genotype);
    EXPECT_EQ(back.records()[i].val_acc, t.records()[i].val_acc);
    EXPECT_EQ(back.records()[i].test_acc, t.records()[i].test_acc);
  }
}

TEST(BenchmarkCsv, MissingFile) {
  EXPECT_THROW(load_benchmark_csv("/nonexistent/bench.csv"), MissingFile);
}

TEST(Cifar10, RecordCountArithmetic) {
  TempDir dir;
  Rng rng(2);
  write_cifar(dir.path() / "exact.bin", 10000, 0, rng);
  write_cifar(dir.path() / "plus.bin", 10000, 1, rng);
  write_cifar(dir.path() / "minus.bin", 10000, -1, rng);
  EXPECT_EQ(Cifar10Source(dir.path() / "exact.bin").record_count(), 10000u);
  EXPECT_THROW(Cifar10Source(dir.path() / "plus.bin"), TruncatedRecord);
  EXPECT_THROW(Cifar10Source(dir.path() / "minus.bin"), TruncatedRecord);
  EXPECT_THROW(Cifar10Source(dir.path() / "nothing.bin"), MissingFile);
}

TEST(Cifar10, BatchIsDeterministicAndStandardized) {
  TempDir dir;
  Rng writer(3);
  write_cifar(dir.path() / "data_batch_1.bin", 1200, 0, writer);
  write_cifar(dir.path() / "data_batch_2.bin", 300, 0, writer);
  const Cifar10Source src(dir.path());
  EXPECT_EQ(src.record_count(), 1500u);
  Rng a(7);
  Rng b(7);
  const Tensor4 x = src.sample_batch(1024, a);
  EXPECT_EQ(x, src.sample_batch(1024, b));
  ASSERT_EQ(x.shape(), (Shape4{1024, 3, 32, 32}));
  for (std::size_t c = 0; c < 3; ++c) {
    const double lo = (0.0 - kCifarMean[c]) / kCifarStd[c];
    const double hi = (1.0 - kCifarMean[c]) / kCifarStd[c];
    double sum = 0;
    for (std::size_t n = 0; n < 1024; ++n) {
      for (float v : x.plane(n, c)) {
        ASSERT_TRUE(std::isfinite(v));
        ASSERT_GE(v, lo - 1e-5);
        ASSERT_LE(v, hi + 1e-5);
        sum += v;
      }
    }
    // Uniform random pixels have mean 0.5, so the standardized mean is
    // (0.5 - mu) / sigma, well inside (-0.5, 0.5) for these constants.
    const double mean = sum / (1024.0 * 1024.0);
    EXPECT_GT(mean, -0.5);
    EXPECT_LT(mean, 0.5);
    EXPECT_NEAR(mean, (0.5 - kCifarMean[c]) / kCifarStd[c], 0.02);
  }
}

TEST(Cifar10, PixelValuesAreScaledAndStandardized) {
  TempDir dir;
  std::vector<unsigned char> rec(kCifarRecordBytes, 0);
  rec[0] = 3;
  for (std::size_t i = 0; i < kCifarImageBytes; ++i) rec[1 + i] = static_cast<unsigned char>(i / 1024 * 100);
  {
    std::ofstream out(dir.path() / "one.bin", std::ios::binary);
    out.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
  }
  const Cifar10Source src(dir.path() / "one.bin");
  EXPECT_EQ(src.read_record(0)[0], 3);
  Rng rng(0);
  const Tensor4 x = src.sample_batch(1, rng);
  for (std::size_t c = 0; c < 3; ++c) {
    const double expect = (c * 100 / 255.0 - kCifarMean[c]) / kCifarStd[c];
    EXPECT_NEAR(x.at(0, c, 0, 0), expect, 1e-5);
    EXPECT_NEAR(x.at(0, c, 31, 31), expect, 1e-5);
  }
}

TEST(RandomBatch, DeterministicAndNormal) {
  const Shape4 s{1000, 1, 1, 1000};
  const Tensor4 a = random_normal_batch(s, 11);
  EXPECT_EQ(a, random_normal_batch(s, 11));
  EXPECT_FALSE(a == random_normal_batch(s, 12));
  const double n = static_cast<double>(a.size());
  double mean = 0;
  for (float v : a.values()) mean += v;
  mean /= n;
  double var = 0;
  for (float v : a.values()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  EXPECT_LT(std::abs(mean), 4 / std::sqrt(n));
  EXPECT_LT(std::abs(sd - 1), 4 / std::sqrt(2 * n));
}

}  // namespace
}  // namespace naswot

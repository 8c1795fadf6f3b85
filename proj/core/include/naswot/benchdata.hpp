#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "naswot/rng.hpp"
#include "naswot/searchspace.hpp"
#include "naswot/tensor.hpp"

namespace naswot {

enum class DatasetTag { kCifar10, kCifar100, kImageNet16_120 };

std::string_view dataset_name(DatasetTag tag) noexcept;
// Accepts "cifar10", "cifar100", "imagenet16-120". Throws ParseError.
DatasetTag dataset_from_name(std::string_view name);

struct BenchmarkRecord {
  Genotype genotype;
  DatasetTag dataset = DatasetTag::kCifar10;
  double val_acc = 0.0;  // percent
  std::optional<double> test_acc;

  std::string arch() const { return format_arch(genotype); }
};

// Offline genotype -> accuracy lookup standing in for training. Keeps
// insertion order for deterministic iteration.
class EvaluatorTable {
 public:
  explicit EvaluatorTable(DatasetTag dataset = DatasetTag::kCifar10) : dataset_(dataset) {}

  DatasetTag dataset() const noexcept { return dataset_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<BenchmarkRecord>& records() const noexcept { return records_; }

  // Throws DuplicateKey if the genotype is present, ParseError if the
  // record's dataset or accuracies are invalid for this table.
  void insert(const BenchmarkRecord& record);

  const BenchmarkRecord* find(const Genotype& g) const;
  // Throws EvaluatorMiss naming the architecture.
  const BenchmarkRecord& at(const Genotype& g) const;

 private:
  DatasetTag dataset_;
  std::vector<BenchmarkRecord> records_;
  std::unordered_map<std::size_t, std::size_t> by_genotype_;
};

inline constexpr std::string_view kBenchmarkCsvHeader = "arch,dataset,val_acc,test_acc";

// Reads `arch,dataset,val_acc,test_acc` CSV. Lines starting with '#' and
// blank lines are skipped; the first other line must be the header
// verbatim. Empty test_acc means absent. When `dataset` is given, rows of
// other datasets are skipped; otherwise all rows must share one dataset.
// Throws MissingFile, ParseError, DuplicateKey.
EvaluatorTable load_benchmark_csv(const std::filesystem::path& path,
                                  std::optional<DatasetTag> dataset = std::nullopt);
EvaluatorTable read_benchmark_csv(std::istream& in, std::optional<DatasetTag> dataset = std::nullopt,
                                  std::string_view source = "<stream>");
void write_benchmark_csv(const EvaluatorTable& table, std::ostream& out);

// CIFAR-10 binary format: 1 label byte + 3072 channel-major pixel bytes.
inline constexpr std::size_t kCifarImageBytes = 3 * 32 * 32;
inline constexpr std::size_t kCifarRecordBytes = 1 + kCifarImageBytes;
inline constexpr std::array<double, 3> kCifarMean = {0.4914, 0.4822, 0.4465};
inline constexpr std::array<double, 3> kCifarStd = {0.2470, 0.2435, 0.2616};

// One or more CIFAR-10 batch files. A directory contributes every regular
// "*.bin" file in it, in name order.
class Cifar10Source {
 public:
  // Throws MissingFile, TruncatedRecord.
  explicit Cifar10Source(const std::filesystem::path& path);

  std::size_t record_count() const noexcept { return total_; }
  const std::vector<std::filesystem::path>& files() const noexcept { return files_; }

  // Raw record (label + pixels).
  std::array<std::uint8_t, kCifarRecordBytes> read_record(std::size_t index) const;

  // batch_size records drawn uniformly without replacement, pixels scaled
  // to [0,1] then standardised per channel. Shape (batch_size, 3, 32, 32).
  Tensor4 sample_batch(std::size_t batch_size, Rng& rng) const;

 private:
  std::vector<std::filesystem::path> files_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

Tensor4 load_cifar10_batch(const std::filesystem::path& path, std::size_t batch_size, Rng& rng);

// i.i.d. standard normal entries from Rng(seed).
Tensor4 random_normal_batch(Shape4 shape, std::uint64_t seed);

}  // namespace naswot

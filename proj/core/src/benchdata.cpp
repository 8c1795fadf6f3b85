#include "naswot/benchdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "naswot/error.hpp"
#include "naswot/format.hpp"

namespace naswot {
namespace {

constexpr std::array<std::string_view, 3> kDatasetNames = {"cifar10", "cifar100",
                                                           "imagenet16-120"};

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

bool valid_accuracy(double v) { return std::isfinite(v) && v >= 0.0 && v <= 100.0; }

double parse_accuracy(std::string_view field, std::string_view what, const std::string& where) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(where + ": " + std::string(what) + " '" + std::string(field) +
                     "' is not a number");
  }
  if (!valid_accuracy(value)) {
    throw ParseError(where + ": " + std::string(what) + " " + std::string(field) +
                     " outside [0, 100]");
  }
  return value;
}

}  // namespace

std::string_view dataset_name(DatasetTag tag) noexcept {
  return kDatasetNames[static_cast<std::size_t>(tag)];
}

DatasetTag dataset_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kDatasetNames.size(); ++i) {
    if (kDatasetNames[i] == name) return static_cast<DatasetTag>(i);
  }
  throw ParseError("unknown dataset tag '" + std::string(name) + "'");
}

void EvaluatorTable::insert(const BenchmarkRecord& record) {
  if (record.dataset != dataset_) {
    throw ParseError("record for dataset " + std::string(dataset_name(record.dataset)) +
                     " does not belong in a " + std::string(dataset_name(dataset_)) + " table");
  }
  if (!valid_accuracy(record.val_acc) ||
      (record.test_acc && !valid_accuracy(*record.test_acc))) {
    throw ParseError("accuracy outside [0, 100] for " + record.arch());
  }
  const std::size_t key = record.genotype.index();
  if (by_genotype_.contains(key)) throw DuplicateKey("duplicate architecture " + record.arch());
  by_genotype_.emplace(key, records_.size());
  records_.push_back(record);
}

const BenchmarkRecord* EvaluatorTable::find(const Genotype& g) const {
  const auto it = by_genotype_.find(g.index());
  return it == by_genotype_.end() ? nullptr : &records_[it->second];
}

const BenchmarkRecord& EvaluatorTable::at(const Genotype& g) const {
  const BenchmarkRecord* r = find(g);
  if (r == nullptr) throw EvaluatorMiss("no benchmark entry for " + format_arch(g));
  return *r;
}

EvaluatorTable read_benchmark_csv(std::istream& in, std::optional<DatasetTag> dataset,
                                  std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<BenchmarkRecord> rows;
  std::optional<DatasetTag> table_tag = dataset;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (!header_seen) {
      if (line != kBenchmarkCsvHeader) {
        throw ParseError(where + ": expected header '" + std::string(kBenchmarkCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_commas(line);
    if (fields.size() != 4) {
      throw ParseError(where + ": expected 4 fields, found " + std::to_string(fields.size()));
    }
    BenchmarkRecord rec;
    try {
      rec.genotype = parse_arch(fields[0]);
    } catch (const MalformedArchString& e) {
      throw ParseError(where + ": " + e.what());
    }
    try {
      rec.dataset = dataset_from_name(fields[1]);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    rec.val_acc = parse_accuracy(fields[2], "val_acc", where);
    if (!fields[3].empty()) rec.test_acc = parse_accuracy(fields[3], "test_acc", where);

    if (dataset) {
      if (rec.dataset != *dataset) continue;
    } else if (!table_tag) {
      table_tag = rec.dataset;
    } else if (*table_tag != rec.dataset) {
      throw ParseError(where + ": mixed dataset tags; select one dataset");
    }
    rows.push_back(rec);
  }
  if (!header_seen) {
    throw ParseError(std::string(source) + ": missing header '" +
                     std::string(kBenchmarkCsvHeader) + "'");
  }
  EvaluatorTable table(table_tag.value_or(DatasetTag::kCifar10));
  for (const auto& rec : rows) table.insert(rec);
  return table;
}

EvaluatorTable load_benchmark_csv(const std::filesystem::path& path,
                                  std::optional<DatasetTag> dataset) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open benchmark CSV " + path.string());
  return read_benchmark_csv(in, dataset, path.string());
}

void write_benchmark_csv(const EvaluatorTable& table, std::ostream& out) {
  out << kBenchmarkCsvHeader << '\n';
  for (const auto& rec : table.records()) {
    out << rec.arch() << ',' << dataset_name(rec.dataset) << ',' << format_full(rec.val_acc) << ',';
    if (rec.test_acc) out << format_full(*rec.test_acc);
    out << '\n';
  }
}

Cifar10Source::Cifar10Source(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".bin") {
        files_.push_back(entry.path());
      }
    }
    std::sort(files_.begin(), files_.end());
    if (files_.empty()) throw MissingFile("no CIFAR-10 *.bin files in " + path.string());
  } else if (fs::is_regular_file(path, ec)) {
    files_.push_back(path);
  } else {
    throw MissingFile("CIFAR-10 path not found: " + path.string());
  }
  for (const auto& file : files_) {
    const auto bytes = static_cast<std::size_t>(fs::file_size(file));
    if (bytes == 0 || bytes % kCifarRecordBytes != 0) {
      throw TruncatedRecord(file.string() + ": size " + std::to_string(bytes) +
                            " is not a positive multiple of " + std::to_string(kCifarRecordBytes));
    }
    counts_.push_back(bytes / kCifarRecordBytes);
    total_ += counts_.back();
  }
}

std::array<std::uint8_t, kCifarRecordBytes> Cifar10Source::read_record(std::size_t index) const {
  if (index >= total_) throw std::out_of_range("CIFAR-10 record index out of range");
  std::size_t file = 0;
  while (index >= counts_[file]) index -= counts_[file++];
  std::ifstream in(files_[file], std::ios::binary);
  if (!in) throw MissingFile("cannot open " + files_[file].string());
  in.seekg(static_cast<std::streamoff>(index * kCifarRecordBytes));
  std::array<std::uint8_t, kCifarRecordBytes> record{};
  in.read(reinterpret_cast<char*>(record.data()), kCifarRecordBytes);
  if (in.gcount() != static_cast<std::streamsize>(kCifarRecordBytes)) {
    throw TruncatedRecord("short read in " + files_[file].string());
  }
  return record;
}

Tensor4 Cifar10Source::sample_batch(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0 || batch_size > total_) {
    throw std::invalid_argument("CIFAR-10 batch size must be in [1, " + std::to_string(total_) + "]");
  }
  // Partial Fisher-Yates over record indices.
  std::vector<std::size_t> order(total_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(total_ - i));
    std::swap(order[i], order[j]);
  }
  Tensor4 batch(Shape4{batch_size, 3, 32, 32});
  auto values = batch.values();
  for (std::size_t b = 0; b < batch_size; ++b) {
    const auto record = read_record(order[b]);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t p = 0; p < 1024; ++p) {
        const double pixel = record[1 + c * 1024 + p] / 255.0;
        values[(b * 3 + c) * 1024 + p] = static_cast<float>((pixel - kCifarMean[c]) / kCifarStd[c]);
      }
    }
  }
  return batch;
}

Tensor4 load_cifar10_batch(const std::filesystem::path& path, std::size_t batch_size, Rng& rng) {
  return Cifar10Source(path).sample_batch(batch_size, rng);
}

Tensor4 random_normal_batch(Shape4 shape, std::uint64_t seed) {
  Tensor4 out(shape);
  Rng rng(seed);
  for (float& v : out.values()) v = static_cast<float>(rng.normal());
  return out;
}

}  // namespace naswot

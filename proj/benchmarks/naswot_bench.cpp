#include <benchmark/benchmark.h>

#include <vector>

#include "naswot/naswot.hpp"

namespace {

using namespace naswot;

ActivationCodeMatrix random_codes(std::size_t rows, std::size_t units, std::uint64_t seed) {
  Rng rng(seed);
  ActivationCodeMatrix codes(rows, units);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < units; ++i) codes.set_bit(r, i, rng.next_u64() & 1U);
  return codes;
}

void BM_HammingKernel(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto units = static_cast<std::size_t>(state.range(1));
  const ActivationCodeMatrix codes = random_codes(rows, units, 1);
  for (auto _ : state) benchmark::DoNotOptimize(hamming_kernel(codes));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * rows * units));
}
BENCHMARK(BM_HammingKernel)->Args({32, 4096})->Args({128, 4096})->Args({128, 65536});

void BM_LogDet(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const HammingKernel k = hamming_kernel(random_codes(rows, 8192, 2));
  for (auto _ : state) benchmark::DoNotOptimize(logdet_score(k));
}
BENCHMARK(BM_LogDet)->Arg(32)->Arg(128)->Arg(256);

void BM_Conv3x3(benchmark::State& state) {
  const auto channels = static_cast<std::size_t>(state.range(0));
  const Tensor4 x = random_normal_batch({32, channels, 16, 16}, 3);
  Rng rng(4);
  ConvWeights w{channels, channels, 3, std::vector<float>(channels * channels * 9)};
  for (float& v : w.values) v = static_cast<float>(rng.normal());
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, 1, 1));
}
BENCHMARK(BM_Conv3x3)->Arg(8)->Arg(16);

void BM_ScoreDesk(benchmark::State& state) {
  const NetworkConfig cfg = NetworkConfig::desk();
  const Tensor4 batch = random_normal_batch(cfg.batch_shape(static_cast<std::size_t>(state.range(0))), 5);
  const Genotype g = Genotype::uniform(OpKind::kConv3x3);
  for (auto _ : state) benchmark::DoNotOptimize(score_network(g, cfg, batch));
}
BENCHMARK(BM_ScoreDesk)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

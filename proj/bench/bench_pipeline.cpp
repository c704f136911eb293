// Serial reference vs OpenMP kernels, plus streaming pipeline throughput.

#include <benchmark/benchmark.h>

#include <random>

#include "tgrasp/kernels.hpp"
#include "tgrasp/pipeline.hpp"
#include "tgrasp/simulator.hpp"

namespace {

std::vector<tgrasp::TaxelFrame> random_frames(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<tgrasp::TaxelFrame> frames(n);
  for (std::size_t t = 0; t < n; ++t) {
    frames[t].timestamp_ms = static_cast<std::int64_t>(t) * tgrasp::kFrameIntervalMs;
    for (auto& v : frames[t].values) v = u(rng);
  }
  return frames;
}

void BM_VarianceMatrixSerial(benchmark::State& state) {
  const auto frames = random_frames(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto m = tgrasp::kernels::variance_matrix_serial(frames, 4, 8);
    benchmark::DoNotOptimize(m.data.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_VarianceMatrixParallel(benchmark::State& state) {
  const auto frames = random_frames(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto m = tgrasp::kernels::variance_matrix_parallel(frames, 4, 8);
    benchmark::DoNotOptimize(m.data.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_StreamingPush(benchmark::State& state) {
  const auto frames = random_frames(1024);
  tgrasp::TaxelPipeline pipeline;
  std::size_t i = 0;
  for (auto _ : state) {
    if (pipeline.frame_count() == 4096) pipeline.reset();
    pipeline.push(frames[i++ % frames.size()]);
    benchmark::DoNotOptimize(pipeline.latest_finger_max().data());
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_GenerateBenchmarkSerial(benchmark::State& state) {
  for (auto _ : state) {
    auto recs = tgrasp::generate_benchmark_serial(tgrasp::kDefaultBenchmarkSeed);
    benchmark::DoNotOptimize(recs.data());
  }
}

void BM_GenerateBenchmarkParallel(benchmark::State& state) {
  for (auto _ : state) {
    auto recs = tgrasp::generate_benchmark(tgrasp::kDefaultBenchmarkSeed);
    benchmark::DoNotOptimize(recs.data());
  }
}

}  // namespace

BENCHMARK(BM_VarianceMatrixSerial)->Arg(72)->Arg(1000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_VarianceMatrixParallel)->Arg(72)->Arg(1000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StreamingPush);
BENCHMARK(BM_GenerateBenchmarkSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateBenchmarkParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

// Optimized (OpenMP + Eigen) kernels against their serial reference versions.
// Each pair runs on identical inputs; compare the *_Parallel and *_Reference
// timings.

#include <benchmark/benchmark.h>

#include "dhnet/features.hpp"
#include "dhnet/intra_quant.hpp"
#include "dhnet/nn/layers.hpp"
#include "dhnet/reference/kernels.hpp"
#include "dhnet/rng.hpp"
#include "dhnet/runtime.hpp"
#include "dhnet/synth.hpp"

namespace {

using namespace dhnet;

YPlane bench_plane(int size) {
  Rng rng(1);
  return synth_texture(size, size, TextureMix{}, rng);
}

nn::Tensor bench_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
  Rng rng(seed);
  nn::Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

void BlockDct_Parallel(benchmark::State& st) {
  const YPlane p = bench_plane(256);
  for (auto _ : st) benchmark::DoNotOptimize(block_dct_stack(p, static_cast<int>(st.range(0))));
}
void BlockDct_Reference(benchmark::State& st) {
  const YPlane p = bench_plane(256);
  for (auto _ : st) benchmark::DoNotOptimize(reference::block_dct_stack(p, static_cast<int>(st.range(0))));
}
BENCHMARK(BlockDct_Parallel)->Arg(4)->Arg(8)->Arg(16);
BENCHMARK(BlockDct_Reference)->Arg(4)->Arg(8)->Arg(16);

void CumulativeHist_Parallel(benchmark::State& st) {
  const DctChannelStack s = block_dct_stack(bench_plane(256), 8);
  for (auto _ : st) benchmark::DoNotOptimize(cumulative_hist(s, kDefaultAlpha));
}
void CumulativeHist_Reference(benchmark::State& st) {
  const DctChannelStack s = block_dct_stack(bench_plane(256), 8);
  for (auto _ : st) benchmark::DoNotOptimize(reference::cumulative_hist(s, kDefaultAlpha));
}
BENCHMARK(CumulativeHist_Parallel);
BENCHMARK(CumulativeHist_Reference);

void CompressPlane_Parallel(benchmark::State& st) {
  const YPlane p = bench_plane(256);
  const QuantConfig cfg = QuantConfig::make(5, q2_matrix());
  for (auto _ : st) benchmark::DoNotOptimize(compress_plane(p, cfg));
}
void CompressPlane_Reference(benchmark::State& st) {
  const YPlane p = bench_plane(256);
  const QuantConfig cfg = QuantConfig::make(5, q2_matrix());
  for (auto _ : st) benchmark::DoNotOptimize(reference::compress_plane(p, cfg));
}
BENCHMARK(CompressPlane_Parallel);
BENCHMARK(CompressPlane_Reference);

void ExtractAll(benchmark::State& st) {
  const YPlane p = bench_plane(256);
  for (auto _ : st) benchmark::DoNotOptimize(extract_all(p, q1_matrix(), 3));
}
BENCHMARK(ExtractAll);

// First block of the 8x8 stream at desk width: [32, 1, 120, 64] -> 4 channels.
void Conv3x3_Parallel(benchmark::State& st) {
  nn::Conv2d c("c", 1, 4, 3);
  Rng rng(2);
  c.init(rng);
  const nn::Tensor x = bench_tensor({32, 1, 120, 64}, 3);
  for (auto _ : st) benchmark::DoNotOptimize(c.forward(x));
}
void Conv3x3_Reference(benchmark::State& st) {
  nn::Conv2d c("c", 1, 4, 3);
  Rng rng(2);
  c.init(rng);
  const nn::Tensor x = bench_tensor({32, 1, 120, 64}, 3);
  for (auto _ : st) benchmark::DoNotOptimize(reference::conv2d(x, c.weight().value, c.bias().value, 1));
}
BENCHMARK(Conv3x3_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(Conv3x3_Reference)->Unit(benchmark::kMillisecond);

void Conv3x3Backward(benchmark::State& st) {
  nn::Conv2d c("c", 4, 8, 3);
  Rng rng(2);
  c.init(rng);
  const nn::Tensor x = bench_tensor({32, 4, 60, 32}, 4);
  const nn::Tensor dy = bench_tensor({32, 8, 60, 32}, 5);
  c.forward(x);
  for (auto _ : st) benchmark::DoNotOptimize(c.backward(dy));
}
BENCHMARK(Conv3x3Backward)->Unit(benchmark::kMillisecond);

void Dense_Parallel(benchmark::State& st) {
  nn::Dense d("d", 4096, 128);
  Rng rng(6);
  d.init(rng);
  const nn::Tensor x = bench_tensor({32, 4096}, 7);
  for (auto _ : st) benchmark::DoNotOptimize(d.forward(x));
}
void Dense_Reference(benchmark::State& st) {
  nn::Dense d("d", 4096, 128);
  Rng rng(6);
  d.init(rng);
  const nn::Tensor x = bench_tensor({32, 4096}, 7);
  for (auto _ : st) benchmark::DoNotOptimize(reference::dense(x, d.weight().value, d.bias().value));
}
BENCHMARK(Dense_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(Dense_Reference)->Unit(benchmark::kMillisecond);

void MaxPool_Parallel(benchmark::State& st) {
  const nn::Tensor x = bench_tensor({32, 8, 60, 32}, 8);
  nn::MaxPool2x2 p;
  for (auto _ : st) benchmark::DoNotOptimize(p.forward(x));
}
void MaxPool_Reference(benchmark::State& st) {
  const nn::Tensor x = bench_tensor({32, 8, 60, 32}, 8);
  for (auto _ : st) benchmark::DoNotOptimize(reference::maxpool2x2(x));
}
BENCHMARK(MaxPool_Parallel);
BENCHMARK(MaxPool_Reference);

void BatchNormTrain_Parallel(benchmark::State& st) {
  const nn::Tensor x = bench_tensor({32, 8, 60, 32}, 9);
  nn::BatchNorm2d bn("bn", 8);
  for (auto _ : st) benchmark::DoNotOptimize(bn.forward(x, nn::Mode::kTrain));
}
void BatchNormTrain_Reference(benchmark::State& st) {
  const nn::Tensor x = bench_tensor({32, 8, 60, 32}, 9);
  const nn::Tensor gamma({8}, 1.0), beta({8}, 0.0);
  for (auto _ : st) benchmark::DoNotOptimize(reference::batchnorm_train(x, gamma, beta, 1e-3));
}
BENCHMARK(BatchNormTrain_Parallel);
BENCHMARK(BatchNormTrain_Reference);

}  // namespace

int main(int argc, char** argv) {
  dhnet::tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}

/*
 * Copyright 2026 The apesed Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS (or
// APESED_THREADS) set to compare scaling; on one core the pairs should match.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "apesed/audio.hpp"
#include "apesed/features.hpp"
#include "apesed/kernels.hpp"
#include "apesed/rng.hpp"

namespace {

using apesed::Rng;
namespace k = apesed::kernels;

std::vector<double> random_vec(size_t n, uint64_t seed) {
  Rng r(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = r.uniform(-1.0, 1.0);
  return v;
}

template <auto Fn>
void BM_gemm(benchmark::State& state) {
  const auto n = static_cast<size_t>(state.range(0));
  const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Fn(n, n, n, a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}

BENCHMARK(BM_gemm<k::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_gemm<k::omp::gemm_nn>)->Name("gemm_nn/omp")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_gemm<k::serial::gemm_tn>)->Name("gemm_tn/serial")->Arg(256);
BENCHMARK(BM_gemm<k::omp::gemm_tn>)->Name("gemm_tn/omp")->Arg(256);
BENCHMARK(BM_gemm<k::serial::gemm_nt>)->Name("gemm_nt/serial")->Arg(256);
BENCHMARK(BM_gemm<k::omp::gemm_nt>)->Name("gemm_nt/omp")->Arg(256);

apesed::AudioClip tone_clip(int rate, double seconds) {
  apesed::AudioClip clip;
  clip.clip_id = "bench";
  clip.sample_rate = rate;
  Rng r(3);
  clip.samples.resize(static_cast<size_t>(rate * seconds));
  for (auto& s : clip.samples) s = static_cast<float>(r.uniform(-0.5, 0.5));
  return clip;
}

void BM_resample_direct(benchmark::State& state) {
  const auto clip = tone_clip(44100, 0.25);
  for (auto _ : state)
    benchmark::DoNotOptimize(apesed::detail::resample_direct(clip.samples, 44100, apesed::kSampleRate));
}
void BM_resample_omp(benchmark::State& state) {
  const auto clip = tone_clip(44100, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(apesed::resample(clip, apesed::kSampleRate));
}
BENCHMARK(BM_resample_direct)->Name("resample/serial_direct");
BENCHMARK(BM_resample_omp)->Name("resample/omp_polyphase");

// The spectrogram loop has no separate serial body; one thread is the
// reference.
void BM_spectrogram(benchmark::State& state) {
  const auto clip = tone_clip(apesed::kSampleRate, 10.0);
  const auto grid = apesed::frame_grid(clip);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(state.range(0) == 0 ? 1 : saved);
  for (auto _ : state) benchmark::DoNotOptimize(apesed::spectrogram_features(clip, grid));
  omp_set_num_threads(saved);
}
BENCHMARK(BM_spectrogram)->Name("spectrogram/serial")->Arg(0);
BENCHMARK(BM_spectrogram)->Name("spectrogram/omp")->Arg(1);

}  // namespace

BENCHMARK_MAIN();

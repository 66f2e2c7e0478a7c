#include <benchmark/benchmark.h>

#include "seld/fusion.hpp"
#include "seld/music.hpp"
#include "seld/random.hpp"
#include "seld/scene.hpp"
#include "seld/ssl.hpp"

using namespace seld;

namespace {

const Scene& ten_second_scene() {
  static const Scene scene = [] {
    SceneSpec s;
    s.duration_s = 10.0;
    s.snr_db = 20.0;
    s.seed = 1;
    s.events = {{0, SourceKind::kNoiseBurst, 0.5, 6.0, {-120.0, -10.0}},
                {1, SourceKind::kNoiseBurst, 3.0, 9.5, {100.0, -20.0}}};
    return synthesize(s);
  }();
  return scene;
}

const TimeFreqTensor& ten_second_tensor() {
  static const TimeFreqTensor tf = stft(ten_second_scene().audio);
  return tf;
}

void BM_Stft(benchmark::State& state) {
  const auto& clip = ten_second_scene().audio;
  for (auto _ : state) benchmark::DoNotOptimize(stft(clip));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ten_second_tensor().frame_count()));
}
BENCHMARK(BM_Stft)->Unit(benchmark::kMillisecond);

void BM_SingleSourceBins(benchmark::State& state) {
  const auto grid = default_task_grid();
  for (auto _ : state) benchmark::DoNotOptimize(single_source_bins(ten_second_tensor(), grid, {}));
}
BENCHMARK(BM_SingleSourceBins)->Unit(benchmark::kMillisecond);

void BM_DoaTrack(benchmark::State& state) {
  const auto grid = default_task_grid();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_doa_track(ten_second_tensor(), grid));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ten_second_tensor().frame_count()));
}
BENCHMARK(BM_DoaTrack)->Unit(benchmark::kMillisecond);

void BM_Smooth(benchmark::State& state) {
  const auto grid = default_task_grid();
  Histogram2D h(grid);
  Rng rng(1);
  for (std::size_t c = 0; c < h.cell_count(); ++c) h[c] = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(smooth_histogram(h, 1.0, 1.5));
}
BENCHMARK(BM_Smooth);

void BM_PickPeaks(benchmark::State& state) {
  const auto grid = default_task_grid();
  Histogram2D h(grid);
  Rng rng(2);
  for (std::size_t c = 0; c < h.cell_count(); ++c) h[c] = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(pick_peaks(h, grid, 0.0, 2));
}
BENCHMARK(BM_PickPeaks);

void BM_MusicSpectrum(benchmark::State& state) {
  const auto grid = default_task_grid();
  for (auto _ : state) benchmark::DoNotOptimize(music_spectrum(ten_second_tensor(), grid, 250, 7, 2));
}
BENCHMARK(BM_MusicSpectrum)->Unit(benchmark::kMillisecond);

void BM_FuseTrack(benchmark::State& state) {
  const auto grid = default_task_grid();
  const auto track = estimate_doa_track(ten_second_tensor(), grid);
  const auto dets = oracle_detections(ten_second_scene().truth);
  for (auto _ : state) benchmark::DoNotOptimize(fuse_track(dets, track));
}
BENCHMARK(BM_FuseTrack)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();

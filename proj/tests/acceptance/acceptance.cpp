// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracle/metrics_oracle.hpp"
#include "../support/scenarios.hpp"
#include "seld/dsp.hpp"
#include "seld/foa.hpp"
#include "seld/fusion.hpp"
#include "seld/metrics.hpp"
#include "seld/music.hpp"
#include "seld/random.hpp"
#include "seld/scene.hpp"
#include "seld/ssl.hpp"
#include "seld/track_io.hpp"
#include "seld/wav.hpp"

using namespace seld;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kScenes = 20;
int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %-22s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct SuiteResult {
  double doa_error = 0, frame_recall = 0, overlap_recall = 0, music_error = 0;
  int scenes_both_found = 0;
};

// Both true cells appear among the estimates on most overlap frames.
bool both_recovered(const DoaTrack& track, const GroundTruth& gt) {
  std::size_t frames = 0, hits = 0;
  for (std::size_t t = 0; t < gt.frame_count; ++t) {
    if (gt.frames[t].size() != 2) continue;
    ++frames;
    bool all = true;
    for (const auto& l : gt.frames[t]) {
      bool found = false;
      for (const auto& e : track[t]) found = found || e.direction == l.direction;
      all = all && found;
    }
    hits += all;
  }
  return frames > 0 && 2 * hits > frames;
}

SuiteResult run_suite(const std::function<SceneSpec(std::uint64_t)>& make, bool with_music) {
  const auto grid = default_task_grid();
  const SslConfig cfg;
  SuiteResult r;
  int overlap_scenes = 0;
  for (int i = 0; i < kScenes; ++i) {
    const auto scene = synthesize(make(static_cast<std::uint64_t>(i)));
    const auto tf = stft(scene.audio);
    const auto track = estimate_doa_track(tf, grid, cfg);
    const auto s = scenarios::score(track, scene.truth);
    r.doa_error += s.doa_error / kScenes;
    r.frame_recall += s.frame_recall / kScenes;
    if (s.overlap_frames > 0) {
      r.overlap_recall += s.overlap_recall;
      ++overlap_scenes;
      r.scenes_both_found += both_recovered(track, scene.truth);
    }
    if (with_music) {
      const auto m = music_track(tf, grid, scenarios::peak_counts(track), cfg.frame_window, cfg.bins);
      r.music_error += scenarios::score(m, scene.truth).doa_error / kScenes;
    }
  }
  if (overlap_scenes > 0) r.overlap_recall /= overlap_scenes;
  return r;
}

void criterion_anechoic() {
  const auto t0 = Clock::now();
  const auto r = run_suite([](std::uint64_t s) { return scenarios::single_source_scene(s, std::nullopt); }, false);
  const double dt = seconds_since(t0);
  report(1, "anechoic oracle", r.doa_error <= 5.0 && r.frame_recall >= 95.0 && dt < 60.0,
         fmt("doa_error=%.3f deg (<=5) frame_recall=%.2f%% (>=95) time=%.1f s (<60)", r.doa_error,
             r.frame_recall, dt));
}

void criterion_overlap() {
  const auto single = run_suite([](std::uint64_t s) { return scenarios::single_source_scene(s, 20.0); }, false);
  const auto ovl = run_suite([](std::uint64_t s) { return scenarios::overlap_scene(s, 20.0); }, false);
  const bool ok = ovl.scenes_both_found == kScenes && ovl.doa_error <= 10.0 && ovl.overlap_recall >= 80.0 &&
                  ovl.overlap_recall < single.frame_recall;
  report(2, "overlap robustness", ok,
         fmt("both_found=%d/%d doa_error=%.3f deg (<=10) overlap_fr=%.2f%% (>=80, < single_fr=%.2f%%)",
             ovl.scenes_both_found, kScenes, ovl.doa_error, ovl.overlap_recall, single.frame_recall));
}

void criterion_music() {
  const auto r = run_suite(
      [](std::uint64_t s) { return scenarios::overlap_scene(s, 20.0, ReverbSpec{0.4, 0.0}); }, true);
  report(3, "music comparison", r.doa_error <= r.music_error,
         fmt("histogram=%.3f deg <= music=%.3f deg (reverberant two-source, drr 0 dB)", r.doa_error,
             r.music_error));
}

void criterion_fig3() {
  const auto grid = default_task_grid();
  const auto scene = synthesize(scenarios::fig3_scene(0));
  const auto a = grid.find({-120.0, -10.0}).value();
  const auto b = grid.find({100.0, -20.0}).value();
  std::size_t frames = 0, exact = 0;
  estimate_doa_track(stft(scene.audio), grid, {}, [&](std::size_t t, const Histogram2D&, const Histogram2D& sm) {
    if (scene.truth.frames[t].size() != 2) return;
    ++frames;
    const auto p = pick_peaks(sm, grid, 0.0, 2);
    exact += p.size() == 2 && std::set<std::size_t>{p[0].cell, p[1].cell} == std::set<std::size_t>{a, b};
  });
  report(4, "fig3 emulation", frames > 0 && exact == frames,
         fmt("top-2 smoothed peaks == {(-120,-10), (100,-20)} on %zu/%zu overlap frames", exact, frames));
}

void criterion_algorithm1() {
  const auto t0 = Clock::now();
  const DoaEstimate d1{{10.0, 0.0}, 0, 10.0}, d2{{-90.0, 20.0}, 0, 5.0}, d3{{150.0, -10.0}, 0, 4.0};
  const ActiveEvent hi{3, 0.9}, lo{1, 0.7};
  const std::vector<std::vector<ActiveEvent>> sed = {{}, {hi}, {hi, lo}};
  const std::vector<std::vector<DoaEstimate>> doa = {{}, {d1}, {d1, d2}};
  using Pairs = std::vector<EventPair>;
  // expected[n_sed][n_doa]
  const Pairs expected[3][3] = {
      {{}, {}, {}},
      {{}, {{3, d1.direction}}, {{3, d1.direction}, {3, d2.direction}}},
      {{}, {{3, d1.direction}}, {{1, d1.direction}, {3, d2.direction}}},
  };
  int ok = 0;
  for (int s = 0; s < 3; ++s)
    for (int d = 0; d < 3; ++d) ok += fuse_frame(0, sed[s], doa[d], {}).pairs == expected[s][d];
  const std::vector<NeighborDoas> near = {{-3, std::span<const DoaEstimate>(&d2, 1)},
                                          {1, std::span<const DoaEstimate>(&d3, 1)}};
  const bool neighbor =
      fuse_frame(0, sed[2], doa[1], near).pairs == Pairs{{1, d1.direction}, {3, d3.direction}};
  const std::vector<NeighborDoas> dup = {{1, std::span<const DoaEstimate>(&d1, 1)}};
  const bool surplus = fuse_frame(0, sed[2], doa[1], dup).pairs == Pairs{{3, d1.direction}};
  const double dt = seconds_since(t0);
  report(5, "algorithm 1 table", ok == 9 && neighbor && surplus && dt < 1.0,
         fmt("cases=%d/9 neighbor_recovery=%s surplus_drop=%s time=%.4f s (<1)", ok, neighbor ? "ok" : "BAD",
             surplus ? "ok" : "BAD", dt));
}

void criterion_metrics_oracle() {
  Rng rng(7);
  const std::vector<SphericalDirection> palette = {{0.0, 0.0}, {90.0, 10.0}, {-120.0, -10.0}};
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto per_seg = static_cast<std::size_t>(rng.uniform_int(1, 5));
    const auto frames = per_seg * static_cast<std::size_t>(rng.uniform_int(1, 10));
    LabelTrack est, ref;
    for (auto* l : {&est, &ref}) {
      l->classes.resize(frames);
      l->doas.resize(frames);
    }
    for (std::size_t t = 0; t < frames; ++t) {
      for (auto* l : {&est, &ref}) {
        for (int c = 0; c < 2; ++c) {
          if (!rng.bernoulli(0.45)) continue;
          l->classes[t].insert(c);
          l->doas[t].push_back(rng.bernoulli(0.5)
                                   ? palette[static_cast<std::size_t>(rng.uniform_int(0, 2))]
                                   : SphericalDirection(rng.uniform() * 360 - 180, rng.uniform() * 180 - 90));
        }
      }
    }
    std::vector<unsigned> me, mr;
    std::vector<oracle::Frame> oe(frames), orf(frames);
    for (std::size_t t = 0; t < frames; ++t) {
      unsigned a = 0, b = 0;
      for (int c : est.classes[t]) a |= 1u << c;
      for (int c : ref.classes[t]) b |= 1u << c;
      me.push_back(a);
      mr.push_back(b);
      for (const auto& d : est.doas[t]) oe[t].push_back({d.azimuth(), d.elevation()});
      for (const auto& d : ref.doas[t]) orf[t].push_back({d.azimuth(), d.elevation()});
    }
    const auto s = evaluate(est, ref, per_seg);
    const auto o = oracle::segment_scores(me, mr, per_seg);
    worst = std::max({worst, std::abs(s.sed_error_rate - o.er), std::abs(s.sed_f1 - o.f1),
                      std::abs(s.doa_error - oracle::doa_error(oe, orf)),
                      std::abs(s.frame_recall - oracle::frame_recall(oe, orf))});
  }
  report(6, "metrics oracle", worst <= 1e-9, fmt("50 random tracks, max |diff| = %.3g (<=1e-9)", worst));
}

void criterion_invariants() {
  std::vector<std::string> bad;
  Rng rng(31);

  // STFT Parseval and linearity
  {
    std::vector<std::vector<double>> x(1, std::vector<double>(9600)), y = x, z = x;
    for (std::size_t i = 0; i < 9600; ++i) {
      x[0][i] = rng.normal();
      y[0][i] = rng.normal();
      z[0][i] = 2.0 * x[0][i] - 0.5 * y[0][i];
    }
    const StftConfig cfg;
    const auto tx = stft(AudioClip(x, 48000.0)), ty = stft(AudioClip(y, 48000.0)), tz = stft(AudioClip(z, 48000.0));
    double lin = 0, ref = 0;
    for (std::size_t i = 0; i < tz.values().size(); ++i) {
      lin = std::max(lin, std::abs(tz.values()[i] - (2.0 * tx.values()[i] - 0.5 * ty.values()[i])));
      ref = std::max(ref, std::abs(tz.values()[i]));
    }
    if (lin > 1e-9 * ref) bad.push_back("stft-linearity");
    const auto w = make_window(cfg);
    for (std::size_t t = 0; t < tx.frame_count(); ++t) {
      double e = 0;
      for (std::size_t n = 0; n < cfg.window_length; ++n) {
        const long i = static_cast<long>(t * cfg.hop_length + n) - static_cast<long>(cfg.window_length / 2);
        if (i >= 0 && i < 9600) e += std::pow(x[0][static_cast<std::size_t>(i)] * w[n], 2);
      }
      double s = 0;
      for (std::size_t k = 0; k < tx.bin_count(); ++k)
        s += (k == 0 || k + 1 == tx.bin_count() ? 1.0 : 2.0) * std::norm(tx.at(0, t, k));
      if (std::abs(s / cfg.fft_size - e) > 1e-6 * e) {
        bad.push_back("stft-parseval");
        break;
      }
    }
  }
  // steering distinctness and wrap
  {
    const auto grid = default_task_grid();
    double worst = 0;
    for (std::size_t i = 0; i < grid.cell_count(); ++i)
      for (std::size_t j = i + 1; j < grid.cell_count(); ++j) {
        double d = 0;
        for (std::size_t c = 0; c < 4; ++c) d += grid.steering(i).gains[c] * grid.steering(j).gains[c];
        worst = std::max(worst, std::abs(d));
      }
    if (worst >= 1.0 - 1e-6) bad.push_back("steering-distinct");
    if (steering_vector({-180.0, 10.0}).gains != steering_vector({180.0, 10.0}).gains) bad.push_back("steering-wrap");
  }
  // histogram mass conservation
  {
    const auto grid = default_task_grid();
    for (int i = 0; i < 50; ++i) {
      Histogram2D h(grid);
      for (std::size_t c = 0; c < h.cell_count(); ++c) h[c] = rng.bernoulli(0.2) ? rng.uniform() * 50 : 0.0;
      const auto s = smooth_histogram(h, 1.0, 1.5);
      if (std::abs(s.total() - h.total()) > 1e-9 * h.total()) {
        bad.push_back("histogram-mass");
        break;
      }
    }
  }
  // angular distance metric axioms
  {
    for (int i = 0; i < 2000; ++i) {
      auto r = [&] { return SphericalDirection(rng.uniform() * 360 - 180, rng.uniform() * 180 - 90); };
      const auto a = r(), b = r(), c = r();
      const double ab = angular_distance(a, b);
      if (std::abs(ab - angular_distance(b, a)) > 1e-9 || angular_distance(a, a) > 1e-9 || ab < 0 || ab > 180 ||
          ab > angular_distance(a, c) + angular_distance(c, b) + 1e-9) {
        bad.push_back("metric-axioms");
        break;
      }
    }
  }
  // determinism under seed
  {
    const auto spec = scenarios::overlap_scene(3, 20.0, ReverbSpec{0.3, 3.0});
    const auto a = synthesize(spec), b = synthesize(spec);
    bool same = a.truth.frames == b.truth.frames;
    for (std::size_t c = 0; c < 4 && same; ++c)
      same = std::equal(a.audio.channel(c).begin(), a.audio.channel(c).end(), b.audio.channel(c).begin());
    std::ostringstream ta, tb;
    const auto grid = default_task_grid();
    write_doa_csv(estimate_doa_track(stft(a.audio), grid), 0.02, {}, ta);
    write_doa_csv(estimate_doa_track(stft(b.audio), grid), 0.02, {}, tb);
    if (!same || ta.str() != tb.str()) bad.push_back("determinism");
  }
  // file round-trips
  {
    const auto scene = synthesize(scenarios::fig3_scene(1));
    std::stringstream wav;
    write_wav(scene.audio, wav);
    const auto back = read_wav(wav, 4);
    std::vector<double> as_float(scene.audio.channel(2).begin(), scene.audio.channel(2).end());
    bool ok = back.sample_count() == scene.audio.sample_count();
    for (std::size_t i = 0; ok && i < as_float.size(); ++i)
      ok = back.channel(2)[i] == static_cast<double>(static_cast<float>(as_float[i]));
    std::stringstream gt;
    write_gt(scene.truth, gt);
    const auto g2 = read_gt(gt);
    ok = ok && g2.events == scene.truth.events && g2.frames == scene.truth.frames;
    DoaTrack t(4);
    t[2] = {{{-120.0, -10.0}, 0, 0.1 + 0.2}};
    std::stringstream dc;
    write_doa_csv(t, 0.02, {}, dc);
    const auto d2 = read_doa_csv(dc);
    ok = ok && d2.frames[2].size() == 1 && d2.frames[2][0] == t[2][0].direction && d2.scores[2][0] == t[2][0].score;
    if (!ok) bad.push_back("round-trips");
  }

  std::string detail = "stft parseval+linearity, steering distinct+wrap, histogram mass, metric axioms, "
                       "determinism, round-trips";
  if (!bad.empty()) {
    detail = "violated:";
    for (const auto& b : bad) detail += " " + b;
  }
  report(7, "invariant suites", bad.empty(), detail);
}

void criterion_performance() {
  SceneSpec spec;
  spec.duration_s = 60.0;
  spec.snr_db = 20.0;
  spec.seed = 1;
  for (int i = 0; i < 12; ++i)
    spec.events.push_back({i % 11, SourceKind::kNoiseBurst, i * 5.0 + 0.5, i * 5.0 + 4.0,
                           SphericalDirection(i * 30.0 - 180.0, (i % 9) * 10.0 - 40.0)});
  const auto scene = synthesize(spec);
  const auto grid = default_task_grid();
  const auto t0 = Clock::now();
  const auto tf = stft(scene.audio);
  const auto track = estimate_doa_track(tf, grid);
  const double dt = seconds_since(t0);
  report(8, "performance", dt < 10.0 && track.size() == 3000,
         fmt("60 s 4-channel clip, stft + doa track = %.2f s (<10), frames=%zu", dt, track.size()));
}

}  // namespace

int main() {
  criterion_anechoic();
  criterion_overlap();
  criterion_music();
  criterion_fig3();
  criterion_algorithm1();
  criterion_metrics_oracle();
  criterion_invariants();
  criterion_performance();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

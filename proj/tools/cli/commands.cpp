#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seld/dsp.hpp"
#include "seld/error.hpp"
#include "seld/fusion.hpp"
#include "seld/histogram_dump.hpp"
#include "seld/metrics.hpp"
#include "seld/music.hpp"
#include "seld/scene.hpp"
#include "seld/track_io.hpp"
#include "seld/wav.hpp"

namespace fs = std::filesystem;

namespace seld::cli {

DoaGrid AnalysisConfig::grid() const { return build_grid(azimuth, elevation, resolution); }

namespace {

using nlohmann::json;

template <typename T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Provenance provenance(const std::string& command, const AnalysisConfig& c, bool music) {
  const auto& s = c.ssl;
  return {
      {"seld", command},
      {"method", music ? "music" : "histogram"},
      {"bins", std::to_string(s.bins.lo) + ":" + std::to_string(s.bins.hi)},
      {"magnitude_gamma", num(s.magnitude_gamma)},
      {"floor_window", std::to_string(s.floor_window)},
      {"coherence_rho", num(s.coherence_rho)},
      {"coherence_half_frames", std::to_string(s.coherence_half_frames)},
      {"coherence_half_bins", std::to_string(s.coherence_half_bins)},
      {"onset_enabled", s.onset_enabled ? "1" : "0"},
      {"onset_alpha", num(s.onset_alpha)},
      {"onset_smoothing", num(s.onset_smoothing)},
      {"frame_window", std::to_string(s.frame_window)},
      {"smooth_sigma_az", num(s.smooth_sigma_az)},
      {"smooth_sigma_el", num(s.smooth_sigma_el)},
      {"peak_threshold_ratio", num(s.peak_threshold_ratio)},
      {"peak_threshold_min", num(s.peak_threshold_min)},
      {"max_peaks", std::to_string(s.max_peaks)},
      {"grid", num(c.azimuth.lo) + ":" + num(c.azimuth.hi) + "," + num(c.elevation.lo) + ":" +
                   num(c.elevation.hi) + "@" + num(c.resolution)},
  };
}

// Flags shared by analyze and compare.
struct SslFlags {
  std::optional<double> gamma, rho, onset_alpha, sigma_az, sigma_el, peak_ratio, peak_min,
      resolution;
  std::optional<std::size_t> frame_window, max_peaks, floor_window;
  bool onset = false;

  void add(CLI::App* app) {
    app->add_option("--gamma", gamma, "magnitude test factor over the noise floor");
    app->add_option("--floor-window", floor_window, "noise-floor minimum window (frames)");
    app->add_option("--rho", rho, "coherence threshold on lambda_max / trace");
    app->add_flag("--onset", onset, "enable the onset test");
    app->add_option("--onset-alpha", onset_alpha, "onset test factor");
    app->add_option("--frame-window", frame_window, "histogram half window L (frames)");
    app->add_option("--sigma-az", sigma_az, "azimuth smoothing width (cells)");
    app->add_option("--sigma-el", sigma_el, "elevation smoothing width (cells)");
    app->add_option("--peak-ratio", peak_ratio, "peak threshold relative to window votes");
    app->add_option("--peak-min", peak_min, "absolute peak threshold (votes)");
    app->add_option("--max-peaks", max_peaks, "peaks per frame");
    app->add_option("--resolution", resolution, "grid resolution (degrees)");
  }

  void apply(AnalysisConfig& c) const {
    auto& s = c.ssl;
    if (gamma) s.magnitude_gamma = *gamma;
    if (floor_window) s.floor_window = *floor_window;
    if (rho) s.coherence_rho = *rho;
    if (onset) s.onset_enabled = true;
    if (onset_alpha) s.onset_alpha = *onset_alpha;
    if (frame_window) s.frame_window = *frame_window;
    if (sigma_az) s.smooth_sigma_az = *sigma_az;
    if (sigma_el) s.smooth_sigma_el = *sigma_el;
    if (peak_ratio) s.peak_threshold_ratio = *peak_ratio;
    if (peak_min) s.peak_threshold_min = *peak_min;
    if (max_peaks) s.max_peaks = *max_peaks;
    if (resolution) c.resolution = *resolution;
  }
};

AnalysisConfig load_config(const std::string& path, const SslFlags& flags) {
  AnalysisConfig c;
  if (!path.empty()) c = parse_analysis_config(slurp(path));
  flags.apply(c);
  return c;
}

std::vector<std::size_t> peak_counts(const DoaTrack& track) {
  std::vector<std::size_t> n(track.size());
  for (std::size_t t = 0; t < track.size(); ++t) n[t] = track[t].size();
  return n;
}

void dump_pair(const fs::path& dir, std::size_t frame, const char* tag, const Histogram2D& h) {
  char stem[48];
  std::snprintf(stem, sizeof stem, "frame_%05zu_%s", frame, tag);
  write_histogram_csv(h, dir / (std::string(stem) + ".csv"));
  write_histogram_pgm(h, dir / (std::string(stem) + ".pgm"));
}

// ---- synth

struct SynthOptions {
  std::string spec;
  std::string out_dir = ".";
  std::string name;
  bool pcm16 = false;
};

int cmd_synth(const SynthOptions& o, std::optional<std::uint64_t> seed, std::ostream& out) {
  SceneSpec spec = load_scene_spec(o.spec);
  if (seed) spec.seed = *seed;
  const Scene scene = synthesize(spec);
  const std::string name = o.name.empty() ? fs::path(o.spec).stem().string() : o.name;
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  const fs::path wav = dir / (name + ".wav");
  const fs::path gt = dir / (name + "_gt.csv");
  write_wav(scene.audio, wav, o.pcm16 ? WavSampleFormat::kPcm16 : WavSampleFormat::kFloat32);
  write_gt(scene.truth, gt);
  out << wav.string() << '\n' << gt.string() << '\n';
  return 0;
}

// ---- analyze

struct AnalyzeOptions {
  std::string wav;
  std::string out;
  bool music = false;
  std::optional<std::size_t> music_sources;
  std::string dump_dir;
  SslFlags flags;
};

int cmd_analyze(const AnalyzeOptions& o, const std::string& config_path, std::ostream& out) {
  const AnalysisConfig cfg = load_config(config_path, o.flags);
  const DoaGrid grid = cfg.grid();
  const AudioClip clip = read_wav(fs::path(o.wav), 4);
  const TimeFreqTensor tf = stft(clip);

  const bool dump = !o.dump_dir.empty();
  if (dump) fs::create_directories(o.dump_dir);
  HistogramObserver observer;
  if (dump && !o.music) {
    observer = [&](std::size_t t, const Histogram2D& raw, const Histogram2D& smoothed) {
      if (raw.total() <= 0.0) return;
      dump_pair(o.dump_dir, t, "raw", raw);
      dump_pair(o.dump_dir, t, "smoothed", smoothed);
    };
  }
  DoaTrack track = estimate_doa_track(tf, grid, cfg.ssl, observer);
  if (o.music) {
    std::vector<std::size_t> counts = peak_counts(track);
    if (o.music_sources) counts.assign(counts.size(), *o.music_sources);
    track = music_track(tf, grid, counts, cfg.ssl.frame_window, cfg.ssl.bins);
    if (dump) {
      for (std::size_t t = 0; t < counts.size(); ++t) {
        if (counts[t] == 0) continue;
        const auto r = music_spectrum(tf, grid, t, cfg.ssl.frame_window, std::min<std::size_t>(counts[t], 3),
                                      cfg.ssl.bins);
        dump_pair(o.dump_dir, t, "music", r.spectrum);
      }
    }
  }
  const Provenance prov = provenance("analyze", cfg, o.music);
  if (o.out.empty() || o.out == "-") {
    write_doa_csv(track, tf.hop_seconds(), prov, out);
  } else {
    auto f = open_out(o.out);
    write_doa_csv(track, tf.hop_seconds(), prov, f);
  }
  return 0;
}

// ---- fuse

struct FuseOptions {
  std::string doa;
  std::string detections;
  std::string oracle;
  std::string out;
  std::size_t neighborhood = kDefaultNeighborhood;
  double threshold = 0.5;
  double dropout = 0.0;
  std::size_t jitter = 0;
};

int cmd_fuse(const FuseOptions& o, std::optional<std::uint64_t> seed, std::ostream& out) {
  if (o.detections.empty() == o.oracle.empty()) {
    throw Error("give exactly one of --detections and --oracle");
  }
  const DoaCsv doa = read_doa_csv(fs::path(o.doa));
  const DoaTrack track = doa.as_track();
  std::vector<DetectionFrame> det;
  if (!o.oracle.empty()) {
    const GroundTruth gt = read_gt(fs::path(o.oracle), doa.meta.hop_seconds, track.size());
    det = oracle_detections(gt, {o.dropout, o.jitter, seed.value_or(0)});
  } else {
    det = read_detections_csv(fs::path(o.detections));
  }
  if (det.size() > track.size()) {
    throw Error("detections cover " + std::to_string(det.size()) + " frames but the DOA track only " +
                std::to_string(track.size()));
  }
  for (std::size_t t = det.size(); t < track.size(); ++t) {
    det.push_back({t, std::vector<double>(kDefaultClassCount, 0.0)});
  }
  const auto fused = fuse_track(det, track, o.neighborhood, o.threshold);
  Provenance prov = {{"seld", "fuse"},
                     {"source", o.oracle.empty() ? "detections" : "oracle"},
                     {"neighborhood", std::to_string(o.neighborhood)},
                     {"threshold", num(o.threshold)}};
  if (!o.oracle.empty()) {
    prov.push_back({"dropout", num(o.dropout)});
    prov.push_back({"jitter", std::to_string(o.jitter)});
    prov.push_back({"seed", std::to_string(seed.value_or(0))});
  }
  if (o.out.empty() || o.out == "-") {
    write_fused_csv(fused, doa.meta.hop_seconds, prov, out);
  } else {
    auto f = open_out(o.out);
    write_fused_csv(fused, doa.meta.hop_seconds, prov, f);
  }
  return 0;
}

// ---- eval

struct EvalOptions {
  std::string est;
  std::string gt;
  std::string format = "json";
  std::string out;
  double segment_s = 1.0;
};

void pad(LabelTrack& t, std::size_t n) {
  t.classes.resize(n);
  t.doas.resize(n);
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  const FusedCsv fused = read_fused_csv(fs::path(o.est));
  const GroundTruth gt = read_gt(fs::path(o.gt), fused.meta.hop_seconds);
  LabelTrack est = LabelTrack::from_fused(fused.frames);
  LabelTrack ref = LabelTrack::from_ground_truth(gt);
  const std::size_t n = std::max(est.frame_count(), ref.frame_count());
  pad(est, n);
  pad(ref, n);
  const SeldScores s = evaluate(est, ref, frames_per_segment(o.segment_s, gt.hop_seconds));
  std::ofstream file;
  std::ostream& dst = (o.out.empty() || o.out == "-") ? out : (file = open_out(o.out), file);
  if (o.format == "csv") {
    write_scores_csv(s, dst);
  } else {
    write_scores_json(s, dst);
  }
  return 0;
}

// ---- compare

struct CompareOptions {
  std::vector<std::string> specs;
  std::vector<std::string> wavs;
  std::vector<std::string> gts;
  std::string format = "text";
  SslFlags flags;
};

struct CompareRow {
  std::string name;
  double hist_error = 0.0, hist_recall = 0.0, music_error = 0.0, music_recall = 0.0;
};

CompareRow compare_clip(std::string name, const AudioClip& clip, const GroundTruth& gt,
                        const AnalysisConfig& cfg, const DoaGrid& grid) {
  const TimeFreqTensor tf = stft(clip);
  const DoaTrack hist = estimate_doa_track(tf, grid, cfg.ssl);
  const auto counts = peak_counts(hist);
  const DoaTrack music = music_track(tf, grid, counts, cfg.ssl.frame_window, cfg.ssl.bins);
  LabelTrack ref = LabelTrack::from_ground_truth(gt);
  LabelTrack h = LabelTrack::from_doa_track(hist);
  LabelTrack m = LabelTrack::from_doa_track(music);
  const std::size_t n = std::max(ref.frame_count(), h.frame_count());
  pad(ref, n);
  pad(h, n);
  pad(m, n);
  return {std::move(name), doa_error(h.doas, ref.doas), frame_recall(h.doas, ref.doas),
          doa_error(m.doas, ref.doas), frame_recall(m.doas, ref.doas)};
}

int cmd_compare(const CompareOptions& o, const std::string& config_path,
                std::optional<std::uint64_t> seed, std::ostream& out) {
  if (o.wavs.size() != o.gts.size()) throw Error("every --wav needs a matching --gt");
  if (o.specs.empty() && o.wavs.empty()) throw Error("nothing to compare: give --spec or --wav/--gt");
  const AnalysisConfig cfg = load_config(config_path, o.flags);
  const DoaGrid grid = cfg.grid();
  std::vector<CompareRow> rows;
  for (const auto& path : o.specs) {
    SceneSpec spec = load_scene_spec(path);
    if (seed) spec.seed = *seed;
    const Scene scene = synthesize(spec);
    rows.push_back(compare_clip(path, scene.audio, scene.truth, cfg, grid));
  }
  for (std::size_t i = 0; i < o.wavs.size(); ++i) {
    const AudioClip clip = read_wav(fs::path(o.wavs[i]), 4);
    const StftConfig sc;
    const double hop = static_cast<double>(sc.hop_length) / clip.sample_rate();
    const GroundTruth gt = read_gt(fs::path(o.gts[i]), hop, stft_frame_count(clip.sample_count(), sc));
    rows.push_back(compare_clip(o.wavs[i], clip, gt, cfg, grid));
  }
  CompareRow mean{"mean"};
  for (const auto& r : rows) {
    mean.hist_error += r.hist_error / static_cast<double>(rows.size());
    mean.hist_recall += r.hist_recall / static_cast<double>(rows.size());
    mean.music_error += r.music_error / static_cast<double>(rows.size());
    mean.music_recall += r.music_recall / static_cast<double>(rows.size());
  }
  if (o.format == "json") {
    nlohmann::ordered_json j;
    auto row_json = [](const CompareRow& r) {
      return nlohmann::ordered_json{{"name", r.name},
                                    {"histogram", {{"doa_error", r.hist_error}, {"frame_recall", r.hist_recall}}},
                                    {"music", {{"doa_error", r.music_error}, {"frame_recall", r.music_recall}}}};
    };
    j["clips"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) j["clips"].push_back(row_json(r));
    j["mean"] = row_json(mean);
    out << j.dump(2) << '\n';
    return 0;
  }
  out << "# " << [&] {
    std::string s;
    for (const auto& [k, v] : provenance("compare", cfg, false)) s += k + "=" + v + " ";
    return s;
  }() << '\n';
  out << std::left << std::setw(40) << "clip" << std::right << std::setw(12) << "hist_err"
      << std::setw(12) << "hist_fr" << std::setw(12) << "music_err" << std::setw(12) << "music_fr"
      << '\n';
  auto print = [&](const CompareRow& r) {
    out << std::left << std::setw(40) << r.name << std::right << std::fixed << std::setprecision(3)
        << std::setw(12) << r.hist_error << std::setw(12) << r.hist_recall << std::setw(12)
        << r.music_error << std::setw(12) << r.music_recall << '\n';
  };
  for (const auto& r : rows) print(r);
  print(mean);
  return 0;
}

}  // namespace

AnalysisConfig parse_analysis_config(const std::string& text) {
  AnalysisConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error("config: expected a JSON object");
  static const char* kKeys[] = {"bins",
                                "magnitude_gamma",
                                "floor_window",
                                "coherence_rho",
                                "coherence_half_frames",
                                "coherence_half_bins",
                                "onset_enabled",
                                "onset_alpha",
                                "onset_smoothing",
                                "frame_window",
                                "smooth_sigma_az",
                                "smooth_sigma_el",
                                "peak_threshold_ratio",
                                "peak_threshold_min",
                                "max_peaks",
                                "grid"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw Error("config: unknown key '" + key + "'");
    }
  }
  try {
    auto& s = c.ssl;
    if (j.contains("bins")) {
      const auto& b = j["bins"];
      if (!b.is_array() || b.size() != 2) throw Error("config: bins must be [first, last]");
      s.bins = {b[0].get<std::size_t>(), b[1].get<std::size_t>()};
    }
    take(j, "magnitude_gamma", s.magnitude_gamma);
    take(j, "floor_window", s.floor_window);
    take(j, "coherence_rho", s.coherence_rho);
    take(j, "coherence_half_frames", s.coherence_half_frames);
    take(j, "coherence_half_bins", s.coherence_half_bins);
    take(j, "onset_enabled", s.onset_enabled);
    take(j, "onset_alpha", s.onset_alpha);
    take(j, "onset_smoothing", s.onset_smoothing);
    take(j, "frame_window", s.frame_window);
    take(j, "smooth_sigma_az", s.smooth_sigma_az);
    take(j, "smooth_sigma_el", s.smooth_sigma_el);
    take(j, "peak_threshold_ratio", s.peak_threshold_ratio);
    take(j, "peak_threshold_min", s.peak_threshold_min);
    take(j, "max_peaks", s.max_peaks);
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      for (const auto& [key, value] : g.items()) {
        if (key != "azimuth_min" && key != "azimuth_max" && key != "elevation_min" &&
            key != "elevation_max" && key != "resolution") {
          throw Error("config: unknown grid key '" + key + "'");
        }
      }
      take(g, "azimuth_min", c.azimuth.lo);
      take(g, "azimuth_max", c.azimuth.hi);
      take(g, "elevation_min", c.elevation.lo);
      take(g, "elevation_max", c.elevation.hi);
      take(g, "resolution", c.resolution);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  return c;
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-source histogram SELD pipeline"};
  app.name("seld");
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "analysis config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "seed override for synth/compare specs and oracle noise");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "render a scene spec to WAV + ground truth");
  synth->add_option("spec", so.spec, "scene spec (JSON)")->required();
  synth->add_option("-o,--out-dir", so.out_dir, "output directory");
  synth->add_option("--name", so.name, "output file stem (default: spec stem)");
  synth->add_flag("--pcm16", so.pcm16, "write 16-bit PCM instead of float");

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "per-frame DOA estimates from a 4-channel FOA WAV");
  analyze->add_option("wav", ao.wav, "input WAV")->required()->check(CLI::ExistingFile);
  analyze->add_option("-o,--out", ao.out, "output DOA CSV (default stdout)");
  analyze->add_flag("--music", ao.music, "MUSIC peaks instead of histogram peaks");
  analyze->add_option("--music-sources", ao.music_sources,
                      "fixed MUSIC source count (default: histogram peak count per frame)");
  analyze->add_option("--dump-histograms", ao.dump_dir,
                      "write raw/smoothed histograms (or MUSIC spectra) as CSV + PGM per frame");
  ao.flags.add(analyze);

  FuseOptions fo;
  auto* fuse = app.add_subcommand("fuse", "combine detections with DOA estimates");
  fuse->add_option("--doa", fo.doa, "DOA CSV from analyze")->required()->check(CLI::ExistingFile);
  fuse->add_option("--detections", fo.detections, "detections CSV")->check(CLI::ExistingFile);
  fuse->add_option("--oracle", fo.oracle, "ground-truth CSV used as detector")->check(CLI::ExistingFile);
  fuse->add_option("-o,--out", fo.out, "output fused CSV (default stdout)");
  fuse->add_option("--neighborhood", fo.neighborhood, "frames searched on each side");
  fuse->add_option("--threshold", fo.threshold, "activity threshold");
  fuse->add_option("--dropout", fo.dropout, "oracle: probability of dropping an active class")
      ->check(CLI::Range(0.0, 1.0));
  fuse->add_option("--jitter", fo.jitter, "oracle: boundary jitter in frames");

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "score a fused track against ground truth");
  eval->add_option("est", eo.est, "fused CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("gt", eo.gt, "ground-truth CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--format", eo.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  eval->add_option("-o,--out", eo.out, "output file (default stdout)");
  eval->add_option("--segment", eo.segment_s, "segment length (s)")->check(CLI::PositiveNumber);

  CompareOptions co;
  auto* compare = app.add_subcommand("compare", "histogram vs MUSIC DOA scores");
  compare->add_option("--spec", co.specs, "scene spec (repeatable)")->check(CLI::ExistingFile);
  compare->add_option("--wav", co.wavs, "WAV (repeatable, paired with --gt)")->check(CLI::ExistingFile);
  compare->add_option("--gt", co.gts, "ground truth for the matching --wav");
  compare->add_option("--format", co.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  co.flags.add(compare);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "seld: " << msg << '\n';
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(so, seed, out);
    if (*analyze) return cmd_analyze(ao, config_path, out);
    if (*fuse) return cmd_fuse(fo, seed, out);
    if (*eval) return cmd_eval(eo, out);
    if (*compare) return cmd_compare(co, config_path, seed, out);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "seld: " << msg << '\n';
    return 1;
  }
  return 1;
}

}  // namespace seld::cli

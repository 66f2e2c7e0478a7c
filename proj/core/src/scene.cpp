#include "seld/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "seld/error.hpp"
#include "seld/random.hpp"
#include "seld/wav.hpp"

namespace seld {
namespace {

constexpr double kNominalRms = 0.1;
constexpr double kBandHz = 375.0;
constexpr double kGatedGain = 0.01;  // -40 dB
// ln(1000): amplitude decays 60 dB over rt60.
constexpr double kDecay60 = 6.907755278982137;
const std::array<double, kFoaChannels> kDiffuseWeights{1.0, 1.0 / std::numbers::sqrt3,
                                                       1.0 / std::numbers::sqrt3,
                                                       1.0 / std::numbers::sqrt3};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double mean_square(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

void scale_to_rms(std::vector<double>& x, double rms) {
  const double ms = mean_square(x);
  if (ms <= 0.0) return;
  const double g = rms / std::sqrt(ms);
  for (double& v : x) v *= g;
}

// Full linear convolution via zero-padded FFT.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fa(n), fb(n), tmp;
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fft.fwd(tmp, fa);
  fa.swap(tmp);
  fft.fwd(tmp, fb);
  fb.swap(tmp);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft.inv(tmp, fa);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = tmp[i].real();
  return out;
}

std::vector<double> make_source(const EventSpec& ev, std::size_t length, double sample_rate,
                                std::uint64_t seed) {
  const double rms = kNominalRms * std::pow(10.0, ev.level_db / 20.0);
  std::vector<double> x(length);
  switch (ev.kind) {
    case SourceKind::kTone: {
      const double a = rms * std::numbers::sqrt2;
      for (std::size_t i = 0; i < length; ++i) {
        x[i] = a * std::sin(2.0 * std::numbers::pi * ev.frequency_hz * static_cast<double>(i) / sample_rate);
      }
      break;
    }
    case SourceKind::kChirp: {
      const double a = rms * std::numbers::sqrt2;
      const double dur = static_cast<double>(length) / sample_rate;
      const double k = dur > 0.0 ? (ev.end_frequency_hz - ev.frequency_hz) / dur : 0.0;
      for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        x[i] = a * std::sin(2.0 * std::numbers::pi * (ev.frequency_hz * t + 0.5 * k * t * t));
      }
      break;
    }
    case SourceKind::kNoiseBurst:
      return sparse_noise_burst(length, sample_rate, rms, seed);
    case SourceKind::kFile: {
      const AudioClip src = read_wav(std::filesystem::path(ev.file));
      if (src.sample_rate() != sample_rate) {
        throw Error("source file " + ev.file + " has a different sample rate");
      }
      const auto mono = src.channel(0);
      for (std::size_t i = 0; i < length; ++i) x[i] = mono[i % mono.size()];
      scale_to_rms(x, rms);
      break;
    }
  }
  return x;
}

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const char* where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end()) {
      throw Error(std::string("scene spec: unknown key '") + key + "' in " + where);
    }
  }
}

}  // namespace

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kTone: return "tone";
    case SourceKind::kChirp: return "chirp";
    case SourceKind::kNoiseBurst: return "noise-burst";
    case SourceKind::kFile: return "file";
  }
  return "?";
}

SourceKind parse_source_kind(std::string_view name) {
  if (name == "tone") return SourceKind::kTone;
  if (name == "chirp") return SourceKind::kChirp;
  if (name == "noise-burst") return SourceKind::kNoiseBurst;
  if (name == "file") return SourceKind::kFile;
  throw Error("unknown source kind '" + std::string(name) + "'");
}

void SceneSpec::validate() const {
  if (!(duration_s > 0.0)) throw Error("scene duration must be positive");
  if (!(sample_rate > 0.0)) throw Error("scene sample rate must be positive");
  if (reverb && (!(reverb->rt60_s > 0.0) || !std::isfinite(reverb->drr_db))) {
    throw Error("reverb needs a positive rt60 and finite direct-to-reverb ratio");
  }
  if (snr_db && !std::isfinite(*snr_db)) throw Error("snr must be finite");
  std::vector<std::pair<double, int>> edges;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    const std::string tag = "event " + std::to_string(i);
    if (ev.class_id < 0 || ev.class_id >= 11) throw Error(tag + ": class id outside 0..10");
    if (!(ev.onset_s >= 0.0) || !(ev.onset_s < ev.offset_s) || ev.offset_s > duration_s) {
      throw Error(tag + ": need 0 <= onset < offset <= duration");
    }
    if (ev.kind == SourceKind::kFile && ev.file.empty()) throw Error(tag + ": file source needs a path");
    edges.emplace_back(ev.onset_s, +1);
    edges.emplace_back(ev.offset_s, -1);
  }
  // Offsets sort before onsets at the same instant.
  std::sort(edges.begin(), edges.end());
  int active = 0;
  for (const auto& [t, d] : edges) {
    active += d;
    if (active > 2) throw Error("more than two events overlap at " + std::to_string(t) + " s");
  }
}

std::vector<double> sparse_noise_burst(std::size_t length, double sample_rate, double rms,
                                       std::uint64_t seed) {
  if (length == 0) return {};
  Rng rng(seed);
  const std::size_t n = next_pow2(length);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < length; ++i) buf[i] = rng.normal();

  const auto bands = static_cast<std::size_t>(std::ceil(sample_rate / 2.0 / kBandHz)) + 1;
  std::vector<double> gain(bands);
  for (double& g : gain) g = rng.bernoulli(0.5) ? 1.0 : kGatedGain;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, buf);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t mirrored = i <= n / 2 ? i : n - i;
    const double f = static_cast<double>(mirrored) * sample_rate / static_cast<double>(n);
    spec[i] *= gain[std::min(bands - 1, static_cast<std::size_t>(f / kBandHz))];
  }
  fft.inv(buf, spec);
  std::vector<double> x(length);
  for (std::size_t i = 0; i < length; ++i) x[i] = buf[i].real();
  scale_to_rms(x, rms);
  return x;
}

Scene synthesize(const SceneSpec& spec, const StftConfig& stft_config) {
  spec.validate();
  stft_config.validate();
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate));
  if (n == 0) throw Error("scene shorter than one sample");

  Rng master(spec.seed);
  std::vector<std::vector<double>> mix(kFoaChannels, std::vector<double>(n, 0.0));
  std::vector<char> active(n, 0);
  std::vector<double> direct_w(n, 0.0);

  for (const auto& ev : spec.events) {
    const std::uint64_t source_seed = master.uniform_int(0, INT64_MAX);
    const std::uint64_t reverb_seed = master.uniform_int(0, INT64_MAX);
    const auto on = static_cast<std::size_t>(std::llround(ev.onset_s * spec.sample_rate));
    const auto off = std::min(n, static_cast<std::size_t>(std::llround(ev.offset_s * spec.sample_rate)));
    if (off <= on) continue;
    const auto mono = make_source(ev, off - on, spec.sample_rate, source_seed);
    const auto g = encoding_gains(ev.direction);
    for (std::size_t i = 0; i < mono.size(); ++i) {
      for (std::size_t c = 0; c < kFoaChannels; ++c) mix[c][on + i] += g[c] * mono[i];
      direct_w[on + i] += mono[i];
      active[on + i] = 1;
    }

    if (spec.reverb) {
      Rng rng(reverb_seed);
      const auto taps = static_cast<std::size_t>(std::ceil(spec.reverb->rt60_s * spec.sample_rate));
      const double direct_power = mean_square(mono);
      double scale = 0.0;
      for (std::size_t c = 0; c < kFoaChannels; ++c) {
        std::vector<double> tail(taps);
        for (std::size_t i = 0; i < taps; ++i) {
          tail[i] = rng.normal() *
                    std::exp(-kDecay60 * static_cast<double>(i) / (spec.reverb->rt60_s * spec.sample_rate));
        }
        auto wet = convolve(mono, tail);
        if (c == 0) {
          // W-channel reverb power over the event's own span sets the level.
          const double wet_power = mean_square(std::span<const double>(wet).first(mono.size()));
          scale = wet_power > 0.0
                      ? std::sqrt(direct_power / wet_power * std::pow(10.0, -spec.reverb->drr_db / 10.0))
                      : 0.0;
        }
        const double k = scale * kDiffuseWeights[c];
        for (std::size_t i = 0; i < wet.size() && on + i < n; ++i) mix[c][on + i] += k * wet[i];
      }
    }
  }

  if (spec.snr_db) {
    // Direct W power over active samples sets the diffuse noise level; a
    // scene without events uses the nominal source power instead.
    double p = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      p += direct_w[i] * direct_w[i];
      ++count;
    }
    p = count > 0 ? p / static_cast<double>(count) : kNominalRms * kNominalRms;
    const double sigma = std::sqrt(p * std::pow(10.0, -*spec.snr_db / 10.0));
    Rng rng(master.uniform_int(0, INT64_MAX));
    for (std::size_t c = 0; c < kFoaChannels; ++c) {
      const double k = sigma * kDiffuseWeights[c];
      for (std::size_t i = 0; i < n; ++i) mix[c][i] += k * rng.normal();
    }
  }

  Scene scene;
  scene.audio = AudioClip(std::move(mix), spec.sample_rate);
  std::vector<EventRow> rows;
  for (const auto& ev : spec.events) rows.push_back({ev.class_id, ev.onset_s, ev.offset_s, ev.direction});
  const double hop_s = static_cast<double>(stft_config.hop_length) / spec.sample_rate;
  scene.truth = GroundTruth::from_events(std::move(rows), stft_frame_count(n, stft_config), hop_s);
  return scene;
}

SceneSpec parse_scene_spec(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("scene spec: ") + e.what());
  }
  if (!j.is_object()) throw Error("scene spec: top level must be an object");
  require_keys(j, {"duration_s", "sample_rate", "events", "snr_db", "reverb", "seed"}, "scene");
  SceneSpec s;
  try {
    s.duration_s = j.at("duration_s").get<double>();
    s.sample_rate = j.value("sample_rate", 48000.0);
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("snr_db") && !j["snr_db"].is_null()) s.snr_db = j["snr_db"].get<double>();
    if (j.contains("reverb") && !j["reverb"].is_null()) {
      const auto& r = j["reverb"];
      require_keys(r, {"rt60_s", "drr_db"}, "reverb");
      s.reverb = ReverbSpec{r.value("rt60_s", 0.4), r.value("drr_db", 0.0)};
    }
    for (const auto& e : j.value("events", nlohmann::json::array())) {
      require_keys(e, {"class_id", "kind", "onset_s", "offset_s", "azimuth_deg", "elevation_deg",
                       "level_db", "frequency_hz", "end_frequency_hz", "file"},
                   "event");
      EventSpec ev;
      ev.class_id = e.at("class_id").get<int>();
      ev.kind = parse_source_kind(e.value("kind", std::string("noise-burst")));
      ev.onset_s = e.at("onset_s").get<double>();
      ev.offset_s = e.at("offset_s").get<double>();
      const double az = e.at("azimuth_deg").get<double>();
      const double el = e.at("elevation_deg").get<double>();
      if (az < -180.0 || az > 180.0) throw Error("scene spec: azimuth outside [-180, 180]");
      ev.direction = SphericalDirection(az, el);
      ev.level_db = e.value("level_db", 0.0);
      ev.frequency_hz = e.value("frequency_hz", 1000.0);
      ev.end_frequency_hz = e.value("end_frequency_hz", 4000.0);
      ev.file = e.value("file", std::string());
      s.events.push_back(std::move(ev));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("scene spec: ") + e.what());
  }
  s.validate();
  return s;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  SceneSpec s = parse_scene_spec(ss.str());
  // Relative source files resolve against the spec's directory.
  for (auto& ev : s.events) {
    if (ev.kind == SourceKind::kFile && std::filesystem::path(ev.file).is_relative()) {
      ev.file = (path.parent_path() / ev.file).string();
    }
  }
  return s;
}

std::string scene_spec_to_json(const SceneSpec& s) {
  nlohmann::ordered_json j;
  j["duration_s"] = s.duration_s;
  j["sample_rate"] = s.sample_rate;
  j["seed"] = s.seed;
  if (s.snr_db) j["snr_db"] = *s.snr_db;
  if (s.reverb) j["reverb"] = {{"rt60_s", s.reverb->rt60_s}, {"drr_db", s.reverb->drr_db}};
  j["events"] = nlohmann::ordered_json::array();
  for (const auto& ev : s.events) {
    nlohmann::ordered_json e;
    e["class_id"] = ev.class_id;
    e["kind"] = std::string(to_string(ev.kind));
    e["onset_s"] = ev.onset_s;
    e["offset_s"] = ev.offset_s;
    e["azimuth_deg"] = ev.direction.azimuth();
    e["elevation_deg"] = ev.direction.elevation();
    e["level_db"] = ev.level_db;
    if (ev.kind == SourceKind::kTone || ev.kind == SourceKind::kChirp) e["frequency_hz"] = ev.frequency_hz;
    if (ev.kind == SourceKind::kChirp) e["end_frequency_hz"] = ev.end_frequency_hz;
    if (ev.kind == SourceKind::kFile) e["file"] = ev.file;
    j["events"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace seld

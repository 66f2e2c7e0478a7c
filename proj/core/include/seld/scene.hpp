#pragma once

// Synthetic FOA scenes with ground truth.
//
// Each event's mono signal is plane-wave encoded at its direction. Optional
// diffuse noise (independent per channel, SN3D diffuse-field weights
// 1, 1/sqrt3, 1/sqrt3, 1/sqrt3) is scaled so the W-channel direct-to-noise
// power over active samples equals snr_db. Optional reverb adds, per event,
// the event convolved with exponentially decaying noise that is independent
// per channel, at the requested direct-to-reverb ratio.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seld/dsp.hpp"
#include "seld/foa.hpp"

namespace seld {

struct EventRow {
  int class_id = 0;
  double onset_s = 0.0;
  double offset_s = 0.0;
  SphericalDirection direction;
  friend bool operator==(const EventRow&, const EventRow&) = default;
};

struct FrameLabel {
  int class_id = 0;
  SphericalDirection direction;
  friend bool operator==(const FrameLabel&, const FrameLabel&) = default;
};

// Event rows plus their frame-level expansion. Frame t sits at time
// t * hop_seconds; an event is active on frames [round(onset / hop),
// round(offset / hop)).
struct GroundTruth {
  std::vector<EventRow> events;
  std::size_t frame_count = 0;
  double hop_seconds = 0.02;
  std::vector<std::vector<FrameLabel>> frames;

  std::pair<std::size_t, std::size_t> frame_span(const EventRow& ev) const;

  // Builds `frames` from `events`. Labels within a frame are ordered by class
  // id, then azimuth.
  static GroundTruth from_events(std::vector<EventRow> events, std::size_t frame_count,
                                 double hop_seconds);
};

// CSV with header class_id,onset_s,offset_s,azimuth_deg,elevation_deg,
// preceded by a "# frame_count=N hop_s=H" comment. Values use %.17g so a
// write/read cycle is exact.
void write_gt(const GroundTruth& gt, std::ostream& out);
void write_gt(const GroundTruth& gt, const std::filesystem::path& path);

// Frame count and hop come from the comment line when present, else from
// the arguments; a missing frame count defaults to ceil(last offset / hop).
// Throws on malformed rows or angles outside azimuth [-180, 180], elevation
// [-90, 90].
GroundTruth read_gt(std::istream& in, double hop_seconds = 0.02,
                    std::optional<std::size_t> frame_count = {});
GroundTruth read_gt(const std::filesystem::path& path, double hop_seconds = 0.02,
                    std::optional<std::size_t> frame_count = {});

enum class SourceKind { kTone, kChirp, kNoiseBurst, kFile };

std::string_view to_string(SourceKind kind);
SourceKind parse_source_kind(std::string_view name);

struct EventSpec {
  int class_id = 0;
  SourceKind kind = SourceKind::kNoiseBurst;
  double onset_s = 0.0;
  double offset_s = 0.0;
  SphericalDirection direction;
  // RMS relative to the nominal 0.1 (-20 dBFS).
  double level_db = 0.0;
  double frequency_hz = 1000.0;      // tone, chirp start
  double end_frequency_hz = 4000.0;  // chirp end
  std::string file;                  // mono (first channel) source for kFile
};

struct ReverbSpec {
  double rt60_s = 0.4;
  double drr_db = 0.0;
};

struct SceneSpec {
  double duration_s = 10.0;
  double sample_rate = 48000.0;
  std::vector<EventSpec> events;
  std::optional<double> snr_db;  // no diffuse noise when absent
  std::optional<ReverbSpec> reverb;
  std::uint64_t seed = 0;

  // Throws when an event lies outside the clip, has onset >= offset, a class
  // id outside 0..10, or more than two events overlap.
  void validate() const;
};

struct Scene {
  AudioClip audio;
  GroundTruth truth;
};

// Deterministic given the spec (including its seed).
Scene synthesize(const SceneSpec& spec, const StftConfig& stft_config = {});

// Noise-burst source: Gaussian noise whose spectrum is gated in 375 Hz bands,
// each band kept with probability 1/2 and otherwise attenuated by 40 dB, then
// scaled to `rms`. Gating gives concurrent bursts the spectral sparsity real
// sound events have.
std::vector<double> sparse_noise_burst(std::size_t length, double sample_rate, double rms,
                                       std::uint64_t seed);

SceneSpec parse_scene_spec(std::string_view json);
SceneSpec load_scene_spec(const std::filesystem::path& path);
std::string scene_spec_to_json(const SceneSpec& spec);

}  // namespace seld

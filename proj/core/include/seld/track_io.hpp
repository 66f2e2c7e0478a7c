#pragma once

// Text formats exchanged between pipeline stages. Every file may start with
// "#" comment lines of space-separated key=value pairs; writers emit one with
// frame_count and hop_s (plus caller-supplied provenance) so readers can
// recover the track length even when trailing frames carry no rows.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seld/fusion.hpp"
#include "seld/ssl.hpp"

namespace seld {

using Provenance = std::vector<std::pair<std::string, std::string>>;

std::vector<std::string> split_csv(std::string_view line);
// Strict full-string parse; `what` names the field in the error message.
double parse_number(std::string_view text, std::string_view what);
// "# a=1 b=x" -> {a: "1", b: "x"}; tokens without '=' are ignored.
std::map<std::string, std::string> parse_comment_fields(std::string_view line);

struct TrackMeta {
  std::size_t frame_count = 0;
  double hop_seconds = 0.02;
};

// frame_index,azimuth_deg,elevation_deg,score
void write_doa_csv(const DoaTrack& track, double hop_seconds, const Provenance& provenance,
                   std::ostream& out);
struct DoaCsv {
  TrackMeta meta;
  std::vector<std::vector<SphericalDirection>> frames;
  std::vector<std::vector<double>> scores;
  // Estimates with grid-free cells (cell = 0); scores preserved.
  DoaTrack as_track() const;
};
DoaCsv read_doa_csv(std::istream& in);
DoaCsv read_doa_csv(const std::filesystem::path& path);

// frame_index,class_id,azimuth_deg,elevation_deg
void write_fused_csv(const std::vector<EventFrame>& frames, double hop_seconds,
                     const Provenance& provenance, std::ostream& out);
struct FusedCsv {
  TrackMeta meta;
  std::vector<EventFrame> frames;
};
FusedCsv read_fused_csv(std::istream& in);
FusedCsv read_fused_csv(const std::filesystem::path& path);

// frame_index,class_id,probability (absent rows mean probability 0)
void write_detections_csv(const std::vector<DetectionFrame>& detections, double hop_seconds,
                          std::ostream& out);
std::vector<DetectionFrame> read_detections_csv(std::istream& in,
                                                std::size_t class_count = kDefaultClassCount);
std::vector<DetectionFrame> read_detections_csv(const std::filesystem::path& path,
                                                std::size_t class_count = kDefaultClassCount);

}  // namespace seld

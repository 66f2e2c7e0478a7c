#include "seld/track_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "seld/error.hpp"

namespace seld {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_comment(std::ostream& out, std::size_t frames, double hop, const Provenance& prov) {
  out << '#';
  for (const auto& [k, v] : prov) out << ' ' << k << '=' << v;
  out << " frame_count=" << frames << " hop_s=" << fmt(hop) << '\n';
}

// Reads comment metadata and the header, then hands each data row to `row`.
template <typename RowFn>
TrackMeta scan_table(std::istream& in, std::string_view header, std::size_t fields, RowFn row) {
  TrackMeta meta;
  bool have_count = false;
  bool header_seen = false;
  std::size_t max_frame_plus_one = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto m = parse_comment_fields(line);
      if (auto it = m.find("frame_count"); it != m.end()) {
        meta.frame_count = static_cast<std::size_t>(parse_number(it->second, "frame_count"));
        have_count = true;
      }
      if (auto it = m.find("hop_s"); it != m.end()) meta.hop_seconds = parse_number(it->second, "hop_s");
      continue;
    }
    if (!header_seen) {
      if (line != header) {
        throw Error("unexpected header '" + line + "', wanted '" + std::string(header) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != fields) {
      throw Error("line " + std::to_string(line_no) + ": expected " + std::to_string(fields) +
                  " fields, got " + std::to_string(f.size()));
    }
    const double frame = parse_number(f[0], "frame_index");
    if (frame < 0 || frame != std::floor(frame)) {
      throw Error("line " + std::to_string(line_no) + ": bad frame index");
    }
    const auto t = static_cast<std::size_t>(frame);
    max_frame_plus_one = std::max(max_frame_plus_one, t + 1);
    row(t, f, line_no);
  }
  if (!header_seen) throw Error("missing header '" + std::string(header) + "'");
  if (!have_count) meta.frame_count = max_frame_plus_one;
  if (max_frame_plus_one > meta.frame_count) throw Error("row frame index beyond frame_count");
  return meta;
}

SphericalDirection parse_direction(const std::vector<std::string>& f, std::size_t az_i,
                                   std::size_t line_no) {
  const double az = parse_number(f[az_i], "azimuth_deg");
  const double el = parse_number(f[az_i + 1], "elevation_deg");
  if (az < -180.0 || az > 180.0 || el < -90.0 || el > 90.0) {
    throw Error("line " + std::to_string(line_no) + ": angle out of range");
  }
  return {az, el};
}

template <typename T>
T open_and(const std::filesystem::path& path, T (*reader)(std::istream&)) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return reader(in);
}

}  // namespace

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    auto field = line.substr(start, pos == std::string_view::npos ? line.size() - start : pos - start);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    out.emplace_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw Error("bad " + std::string(what) + " value '" + std::string(text) + "'");
  }
  return v;
}

std::map<std::string, std::string> parse_comment_fields(std::string_view line) {
  std::map<std::string, std::string> out;
  if (!line.empty() && line.front() == '#') line.remove_prefix(1);
  std::istringstream ss{std::string(line)};
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) continue;
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

void write_doa_csv(const DoaTrack& track, double hop_seconds, const Provenance& provenance,
                   std::ostream& out) {
  write_comment(out, track.size(), hop_seconds, provenance);
  out << "frame_index,azimuth_deg,elevation_deg,score\n";
  for (std::size_t t = 0; t < track.size(); ++t) {
    for (const auto& e : track[t]) {
      out << t << ',' << fmt(e.direction.azimuth()) << ',' << fmt(e.direction.elevation()) << ','
          << fmt(e.score) << '\n';
    }
  }
}

DoaTrack DoaCsv::as_track() const {
  DoaTrack track(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (std::size_t i = 0; i < frames[t].size(); ++i) {
      track[t].push_back({frames[t][i], 0, scores[t][i]});
    }
  }
  return track;
}

DoaCsv read_doa_csv(std::istream& in) {
  std::vector<std::tuple<std::size_t, SphericalDirection, double>> rows;
  DoaCsv out;
  out.meta = scan_table(in, "frame_index,azimuth_deg,elevation_deg,score", 4,
                        [&](std::size_t t, const std::vector<std::string>& f, std::size_t line) {
                          rows.emplace_back(t, parse_direction(f, 1, line), parse_number(f[3], "score"));
                        });
  out.frames.resize(out.meta.frame_count);
  out.scores.resize(out.meta.frame_count);
  for (const auto& [t, d, s] : rows) {
    out.frames[t].push_back(d);
    out.scores[t].push_back(s);
  }
  return out;
}

DoaCsv read_doa_csv(const std::filesystem::path& path) {
  return open_and<DoaCsv>(path, &read_doa_csv);
}

void write_fused_csv(const std::vector<EventFrame>& frames, double hop_seconds,
                     const Provenance& provenance, std::ostream& out) {
  write_comment(out, frames.size(), hop_seconds, provenance);
  out << "frame_index,class_id,azimuth_deg,elevation_deg\n";
  for (const auto& f : frames) {
    for (const auto& p : f.pairs) {
      out << f.frame << ',' << p.class_id << ',' << fmt(p.direction.azimuth()) << ','
          << fmt(p.direction.elevation()) << '\n';
    }
  }
}

FusedCsv read_fused_csv(std::istream& in) {
  std::vector<std::pair<std::size_t, EventPair>> rows;
  FusedCsv out;
  out.meta = scan_table(in, "frame_index,class_id,azimuth_deg,elevation_deg", 4,
                        [&](std::size_t t, const std::vector<std::string>& f, std::size_t line) {
                          const double c = parse_number(f[1], "class_id");
                          if (c < 0 || c != std::floor(c)) {
                            throw Error("line " + std::to_string(line) + ": bad class id");
                          }
                          rows.push_back({t, {static_cast<int>(c), parse_direction(f, 2, line)}});
                        });
  out.frames.resize(out.meta.frame_count);
  for (std::size_t t = 0; t < out.frames.size(); ++t) out.frames[t].frame = t;
  for (const auto& [t, p] : rows) out.frames[t].pairs.push_back(p);
  return out;
}

FusedCsv read_fused_csv(const std::filesystem::path& path) {
  return open_and<FusedCsv>(path, &read_fused_csv);
}

void write_detections_csv(const std::vector<DetectionFrame>& detections, double hop_seconds,
                          std::ostream& out) {
  write_comment(out, detections.size(), hop_seconds, {});
  out << "frame_index,class_id,probability\n";
  for (std::size_t t = 0; t < detections.size(); ++t) {
    const auto& p = detections[t].probabilities;
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (p[c] > 0.0) out << t << ',' << c << ',' << fmt(p[c]) << '\n';
    }
  }
}

std::vector<DetectionFrame> read_detections_csv(std::istream& in, std::size_t class_count) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> rows;
  const TrackMeta meta = scan_table(
      in, "frame_index,class_id,probability", 3,
      [&](std::size_t t, const std::vector<std::string>& f, std::size_t line) {
        const double c = parse_number(f[1], "class_id");
        const double p = parse_number(f[2], "probability");
        if (c < 0 || c != std::floor(c) || c >= static_cast<double>(class_count)) {
          throw Error("line " + std::to_string(line) + ": class id outside the class set");
        }
        if (p < 0.0 || p > 1.0) throw Error("line " + std::to_string(line) + ": probability outside [0, 1]");
        rows.emplace_back(t, static_cast<std::size_t>(c), p);
      });
  std::vector<DetectionFrame> out(meta.frame_count);
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t].frame = t;
    out[t].probabilities.assign(class_count, 0.0);
  }
  for (const auto& [t, c, p] : rows) out[t].probabilities[c] = p;
  return out;
}

std::vector<DetectionFrame> read_detections_csv(const std::filesystem::path& path,
                                                std::size_t class_count) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_detections_csv(in, class_count);
}

}  // namespace seld

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "seld/error.hpp"
#include "seld/scene.hpp"
#include "seld/track_io.hpp"

namespace seld {
namespace {

constexpr const char* kGtHeader = "class_id,onset_s,offset_s,azimuth_deg,elevation_deg";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::pair<std::size_t, std::size_t> GroundTruth::frame_span(const EventRow& ev) const {
  const auto to_frame = [&](double s) {
    const double f = std::round(s / hop_seconds);
    return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(frame_count)));
  };
  return {to_frame(ev.onset_s), to_frame(ev.offset_s)};
}

GroundTruth GroundTruth::from_events(std::vector<EventRow> events, std::size_t frame_count,
                                     double hop_seconds) {
  if (!(hop_seconds > 0.0)) throw Error("ground truth hop must be positive");
  GroundTruth gt;
  gt.events = std::move(events);
  gt.frame_count = frame_count;
  gt.hop_seconds = hop_seconds;
  gt.frames.assign(frame_count, {});
  for (const auto& ev : gt.events) {
    const auto [on, off] = gt.frame_span(ev);
    for (std::size_t t = on; t < off; ++t) gt.frames[t].push_back({ev.class_id, ev.direction});
  }
  for (auto& f : gt.frames) {
    std::sort(f.begin(), f.end(), [](const FrameLabel& a, const FrameLabel& b) {
      if (a.class_id != b.class_id) return a.class_id < b.class_id;
      if (a.direction.azimuth() != b.direction.azimuth()) {
        return a.direction.azimuth() < b.direction.azimuth();
      }
      return a.direction.elevation() < b.direction.elevation();
    });
  }
  return gt;
}

void write_gt(const GroundTruth& gt, std::ostream& out) {
  out << "# frame_count=" << gt.frame_count << " hop_s=" << fmt(gt.hop_seconds) << '\n';
  out << kGtHeader << '\n';
  for (const auto& ev : gt.events) {
    out << ev.class_id << ',' << fmt(ev.onset_s) << ',' << fmt(ev.offset_s) << ','
        << fmt(ev.direction.azimuth()) << ',' << fmt(ev.direction.elevation()) << '\n';
  }
}

void write_gt(const GroundTruth& gt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot create " + path.string());
  write_gt(gt, out);
}

GroundTruth read_gt(std::istream& in, double hop_seconds,
                    std::optional<std::size_t> frame_count) {
  std::vector<EventRow> events;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto meta = parse_comment_fields(line);
      if (auto it = meta.find("frame_count"); it != meta.end()) {
        frame_count = static_cast<std::size_t>(parse_number(it->second, "frame_count"));
      }
      if (auto it = meta.find("hop_s"); it != meta.end()) {
        hop_seconds = parse_number(it->second, "hop_s");
      }
      continue;
    }
    if (!header_seen) {
      if (line != kGtHeader) throw Error("ground truth: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 5) {
      throw Error("ground truth line " + std::to_string(line_no) + ": expected 5 fields");
    }
    const double cls = parse_number(fields[0], "class_id");
    const double on = parse_number(fields[1], "onset_s");
    const double off = parse_number(fields[2], "offset_s");
    const double az = parse_number(fields[3], "azimuth_deg");
    const double el = parse_number(fields[4], "elevation_deg");
    if (cls < 0 || cls != std::floor(cls)) {
      throw Error("ground truth line " + std::to_string(line_no) + ": bad class id");
    }
    if (az < -180.0 || az > 180.0 || el < -90.0 || el > 90.0) {
      throw Error("ground truth line " + std::to_string(line_no) + ": angle out of range");
    }
    if (!(on >= 0.0) || !(off > on)) {
      throw Error("ground truth line " + std::to_string(line_no) + ": need 0 <= onset < offset");
    }
    events.push_back({static_cast<int>(cls), on, off, SphericalDirection(az, el)});
  }
  if (!header_seen) throw Error("ground truth: missing header");
  if (!(hop_seconds > 0.0)) throw Error("ground truth: hop must be positive");
  if (!frame_count) {
    double last = 0.0;
    for (const auto& ev : events) last = std::max(last, ev.offset_s);
    frame_count = static_cast<std::size_t>(std::ceil(last / hop_seconds - 1e-9));
  }
  return GroundTruth::from_events(std::move(events), *frame_count, hop_seconds);
}

GroundTruth read_gt(const std::filesystem::path& path, double hop_seconds,
                    std::optional<std::size_t> frame_count) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_gt(in, hop_seconds, frame_count);
}

}  // namespace seld

#include "seld/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <limits>
#include <numeric>
#include <ostream>

#include "seld/error.hpp"
#include "seld/scene.hpp"

namespace seld {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Minimum total distance over one-to-one matchings of the smaller list into
// the larger. Lists hold at most a handful of entries.
double best_matching(const DirectionList& a, const DirectionList& b) {
  const DirectionList& small = a.size() <= b.size() ? a : b;
  const DirectionList& large = a.size() <= b.size() ? b : a;
  std::vector<std::size_t> perm(large.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < small.size(); ++i) cost += angular_distance(small[i], large[perm[i]]);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

LabelTrack LabelTrack::from_ground_truth(const GroundTruth& gt) {
  LabelTrack t;
  t.classes.resize(gt.frame_count);
  t.doas.resize(gt.frame_count);
  for (std::size_t f = 0; f < gt.frame_count; ++f) {
    for (const auto& l : gt.frames[f]) {
      t.classes[f].insert(l.class_id);
      t.doas[f].push_back(l.direction);
    }
  }
  return t;
}

LabelTrack LabelTrack::from_fused(std::span<const EventFrame> frames) {
  LabelTrack t;
  t.classes.resize(frames.size());
  t.doas.resize(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const auto& p : frames[f].pairs) {
      t.classes[f].insert(p.class_id);
      t.doas[f].push_back(p.direction);
    }
  }
  return t;
}

LabelTrack LabelTrack::from_doa_track(const DoaTrack& track) {
  LabelTrack t;
  t.classes.resize(track.size());
  t.doas.resize(track.size());
  for (std::size_t f = 0; f < track.size(); ++f) {
    for (const auto& e : track[f]) t.doas[f].push_back(e.direction);
  }
  return t;
}

double angular_distance(const SphericalDirection& a, const SphericalDirection& b) {
  // Vincenty form: well conditioned for nearly equal and nearly opposite points.
  const double ea = a.elevation() * kDeg, eb = b.elevation() * kDeg;
  const double dl = (a.azimuth() - b.azimuth()) * kDeg;
  const double x = std::cos(eb) * std::sin(dl);
  const double y = std::cos(ea) * std::sin(eb) - std::sin(ea) * std::cos(eb) * std::cos(dl);
  const double c = std::sin(ea) * std::sin(eb) + std::cos(ea) * std::cos(eb) * std::cos(dl);
  return std::clamp(std::atan2(std::hypot(x, y), c) / kDeg, 0.0, 180.0);
}

double DoaErrorStats::mean() const {
  if (matched_pairs == 0) return reference_has_doa ? 180.0 : 0.0;
  return total_degrees / static_cast<double>(matched_pairs);
}

DoaErrorStats doa_error_stats(std::span<const DirectionList> est, std::span<const DirectionList> ref) {
  if (est.size() != ref.size()) throw Error("DOA tracks differ in length");
  DoaErrorStats s;
  for (std::size_t t = 0; t < est.size(); ++t) {
    if (!ref[t].empty()) s.reference_has_doa = true;
    if (est[t].empty() || ref[t].empty()) continue;
    s.total_degrees += best_matching(est[t], ref[t]);
    s.matched_pairs += std::min(est[t].size(), ref[t].size());
  }
  return s;
}

double doa_error(std::span<const DirectionList> est, std::span<const DirectionList> ref) {
  return doa_error_stats(est, ref).mean();
}

double frame_recall(std::span<const DirectionList> est, std::span<const DirectionList> ref) {
  if (est.size() != ref.size()) throw Error("DOA tracks differ in length");
  std::size_t active = 0, hits = 0;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    if (ref[t].empty()) continue;
    ++active;
    if (est[t].size() == ref[t].size()) ++hits;
  }
  return active == 0 ? 100.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(active);
}

std::size_t frames_per_segment(double segment_seconds, double hop_seconds) {
  if (!(segment_seconds > 0.0) || !(hop_seconds > 0.0)) throw Error("segment and hop must be positive");
  const auto n = static_cast<std::size_t>(std::llround(segment_seconds / hop_seconds));
  return std::max<std::size_t>(n, 1);
}

SegmentScores segment_metrics(std::span<const std::set<int>> est, std::span<const std::set<int>> ref,
                              std::size_t frames_per_seg) {
  if (est.size() != ref.size()) throw Error("label tracks differ in duration");
  if (frames_per_seg == 0) throw Error("segment length must be positive");
  SegmentScores out;
  auto& n = out.counts;
  for (std::size_t start = 0; start < ref.size(); start += frames_per_seg) {
    const std::size_t stop = std::min(start + frames_per_seg, ref.size());
    std::set<int> e, r;
    for (std::size_t t = start; t < stop; ++t) {
      e.insert(est[t].begin(), est[t].end());
      r.insert(ref[t].begin(), ref[t].end());
    }
    std::size_t tp = 0;
    for (int c : e) tp += r.count(c);
    const std::size_t fp = e.size() - tp;
    const std::size_t fn = r.size() - tp;
    n.true_positives += tp;
    n.false_positives += fp;
    n.false_negatives += fn;
    n.substitutions += std::min(fn, fp);
    n.deletions += fn > fp ? fn - fp : 0;
    n.insertions += fp > fn ? fp - fn : 0;
    n.reference_active += r.size();
  }
  const double errors = static_cast<double>(n.substitutions + n.deletions + n.insertions);
  out.error_rate = n.reference_active == 0 ? errors : errors / static_cast<double>(n.reference_active);
  const double denom = static_cast<double>(2 * n.true_positives + n.false_positives + n.false_negatives);
  out.f1 = denom == 0.0 ? 100.0 : 100.0 * 2.0 * static_cast<double>(n.true_positives) / denom;
  return out;
}

SeldScores evaluate(const LabelTrack& est, const LabelTrack& ref, std::size_t frames_per_seg) {
  if (est.frame_count() != ref.frame_count()) {
    throw Error("estimate covers " + std::to_string(est.frame_count()) + " frames, reference " +
                std::to_string(ref.frame_count()));
  }
  const auto seg = segment_metrics(est.classes, ref.classes, frames_per_seg);
  SeldScores s;
  s.sed_error_rate = seg.error_rate;
  s.sed_f1 = seg.f1;
  s.doa_error = doa_error(est.doas, ref.doas);
  s.frame_recall = frame_recall(est.doas, ref.doas);
  return s;
}

void write_scores_json(const SeldScores& s, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "{\"sed_error_rate\": %.17g, \"sed_f1\": %.17g, \"doa_error\": %.17g, "
                "\"frame_recall\": %.17g}\n",
                s.sed_error_rate, s.sed_f1, s.doa_error, s.frame_recall);
  out << buf;
}

void write_scores_csv(const SeldScores& s, std::ostream& out) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.sed_error_rate, s.sed_f1,
                s.doa_error, s.frame_recall);
  out << "sed_error_rate,sed_f1,doa_error,frame_recall\n" << buf;
}

}  // namespace seld

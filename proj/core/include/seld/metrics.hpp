#pragma once

// SELD evaluation: segment-based SED error rate and F1, DOA angular error,
// and DOA frame recall.
//
// Conventions:
//  - DOA error averages great-circle distances over matched pairs only. Each
//    frame where both sides are nonempty contributes the minimum-cost
//    one-to-one matching of min(|est|, |ref|) pairs. With no matched pair at
//    all the error is 180 if the reference has any DOA, else 0.
//  - Frame recall counts frames with |est| == |ref| among frames whose
//    reference is nonempty (100 when there are none).
//  - A class is active in a segment if it is active in any of its frames.

#include <cstddef>
#include <iosfwd>
#include <set>
#include <span>
#include <vector>

#include "seld/foa.hpp"
#include "seld/fusion.hpp"

namespace seld {

struct GroundTruth;

using DirectionList = std::vector<SphericalDirection>;

struct LabelTrack {
  std::vector<std::set<int>> classes;
  std::vector<DirectionList> doas;

  std::size_t frame_count() const { return classes.size(); }

  static LabelTrack from_ground_truth(const GroundTruth& gt);
  static LabelTrack from_fused(std::span<const EventFrame> frames);
  static LabelTrack from_doa_track(const DoaTrack& track);
};

struct SeldScores {
  double sed_error_rate = 0.0;
  double sed_f1 = 0.0;       // percent
  double doa_error = 0.0;    // degrees
  double frame_recall = 0.0; // percent
};

// Great-circle distance in degrees, clamped to [0, 180].
double angular_distance(const SphericalDirection& a, const SphericalDirection& b);

struct DoaErrorStats {
  double total_degrees = 0.0;
  std::size_t matched_pairs = 0;
  bool reference_has_doa = false;
  double mean() const;
};

DoaErrorStats doa_error_stats(std::span<const DirectionList> est, std::span<const DirectionList> ref);
double doa_error(std::span<const DirectionList> est, std::span<const DirectionList> ref);
double frame_recall(std::span<const DirectionList> est, std::span<const DirectionList> ref);

struct SegmentCounts {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_active = 0;
};

struct SegmentScores {
  double error_rate = 0.0;
  double f1 = 0.0;  // percent
  SegmentCounts counts;
};

// ER = sum(S + D + I) / sum(N_ref), F1 = 2 TP / (2 TP + FP + FN). With no
// reference activity ER is the raw error count; F1 is 100 when there is
// nothing to detect and nothing detected.
SegmentScores segment_metrics(std::span<const std::set<int>> est, std::span<const std::set<int>> ref,
                              std::size_t frames_per_segment);

// Frames per segment = round(segment_seconds / hop_seconds).
std::size_t frames_per_segment(double segment_seconds, double hop_seconds);

SeldScores evaluate(const LabelTrack& est, const LabelTrack& ref, std::size_t frames_per_segment);

// {"sed_error_rate": ..., "sed_f1": ..., "doa_error": ..., "frame_recall": ...}
void write_scores_json(const SeldScores& s, std::ostream& out);
// Header line with the field names, then one row.
void write_scores_csv(const SeldScores& s, std::ostream& out);

}  // namespace seld

#pragma once

// Rule-based combination of detected sound events with DOA estimates, one
// frame at a time. Detection takes precedence over localization:
//
//   n_sed == 0        -> nothing
//   n_sed <  n_doa    -> every DOA goes to the single event
//   n_sed == n_doa    -> one DOA per event
//   n_sed >  n_doa    -> borrow DOAs from neighbouring frames; if still short,
//                        drop the surplus events
//
// Pairings that would otherwise be arbitrary are deterministic: events sorted
// by class id meet DOAs sorted by histogram score (then neighbour order), and
// surplus events are dropped lowest probability first.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seld/foa.hpp"
#include "seld/ssl.hpp"

namespace seld {

inline constexpr std::size_t kDefaultClassCount = 11;
inline constexpr std::size_t kMaxOverlap = 2;
inline constexpr std::size_t kDefaultNeighborhood = 10;

struct DetectionFrame {
  std::size_t frame = 0;
  std::vector<double> probabilities;  // one per class, in [0, 1]
};

struct ActiveEvent {
  int class_id = 0;
  double probability = 0.0;
};

// Classes with probability strictly above tau, at most `cap`, highest
// probability first (lower class id on ties).
std::vector<ActiveEvent> threshold_detections(const DetectionFrame& frame, double tau = 0.5,
                                              std::size_t cap = kMaxOverlap);

struct EventPair {
  int class_id = 0;
  SphericalDirection direction;
  friend bool operator==(const EventPair&, const EventPair&) = default;
};

struct EventFrame {
  std::size_t frame = 0;
  std::vector<EventPair> pairs;
};

// Estimates of a frame at signed distance `offset` from the frame being fused.
struct NeighborDoas {
  long offset = 0;
  std::span<const DoaEstimate> doas;
};

// One frame of the combination rules. Neighbours are searched nearest first,
// earlier frame first at equal distance; a neighbour DOA is taken only if its
// direction is not already used in this frame.
EventFrame fuse_frame(std::size_t frame, std::span<const ActiveEvent> active,
                      std::span<const DoaEstimate> doas,
                      std::span<const NeighborDoas> neighborhood);

// Applies fuse_frame to every frame, offering DOAs from frames within
// +-neighborhood. Frames are coupled through the neighbourhood, so a track is
// processed sequentially; parallelize across clips instead.
std::vector<EventFrame> fuse_track(std::span<const DetectionFrame> detections,
                                   const DoaTrack& doa_track,
                                   std::size_t neighborhood = kDefaultNeighborhood,
                                   double tau = 0.5);

struct GroundTruth;

struct DetectionNoise {
  double dropout = 0.0;          // probability of zeroing an active (frame, class)
  std::size_t jitter_frames = 0; // event boundaries shifted by up to +-jitter
  std::uint64_t seed = 0;
};

// Stand-in detector: probability 1 for ground-truth active classes, else 0,
// with optional seeded perturbation.
std::vector<DetectionFrame> oracle_detections(const GroundTruth& gt,
                                              const DetectionNoise& noise = {},
                                              std::size_t class_count = kDefaultClassCount);

}  // namespace seld

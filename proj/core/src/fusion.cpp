#include "seld/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "seld/error.hpp"
#include "seld/random.hpp"
#include "seld/scene.hpp"

namespace seld {

std::vector<ActiveEvent> threshold_detections(const DetectionFrame& frame, double tau,
                                              std::size_t cap) {
  std::vector<ActiveEvent> active;
  for (std::size_t c = 0; c < frame.probabilities.size(); ++c) {
    const double p = frame.probabilities[c];
    if (p < 0.0 || p > 1.0 || std::isnan(p)) throw Error("detection probability outside [0, 1]");
    if (p > tau) active.push_back({static_cast<int>(c), p});
  }
  std::stable_sort(active.begin(), active.end(), [](const ActiveEvent& a, const ActiveEvent& b) {
    return a.probability > b.probability;
  });
  if (active.size() > cap) active.resize(cap);
  return active;
}

EventFrame fuse_frame(std::size_t frame, std::span<const ActiveEvent> active,
                      std::span<const DoaEstimate> doas,
                      std::span<const NeighborDoas> neighborhood) {
  EventFrame out{frame, {}};
  if (active.empty()) return out;

  std::vector<ActiveEvent> events(active.begin(), active.end());
  std::vector<DoaEstimate> pool(doas.begin(), doas.end());
  std::stable_sort(pool.begin(), pool.end(), [](const DoaEstimate& a, const DoaEstimate& b) {
    return a.score > b.score;
  });

  if (events.size() < pool.size()) {
    for (const auto& d : pool) out.pairs.push_back({events.front().class_id, d.direction});
    return out;
  }

  if (events.size() > pool.size()) {
    std::vector<NeighborDoas> order(neighborhood.begin(), neighborhood.end());
    std::stable_sort(order.begin(), order.end(), [](const NeighborDoas& a, const NeighborDoas& b) {
      const long da = std::labs(a.offset), db = std::labs(b.offset);
      return da != db ? da < db : a.offset < b.offset;
    });
    for (const auto& n : order) {
      if (pool.size() == events.size()) break;
      std::vector<DoaEstimate> cands(n.doas.begin(), n.doas.end());
      std::stable_sort(cands.begin(), cands.end(), [](const DoaEstimate& a, const DoaEstimate& b) {
        return a.score > b.score;
      });
      for (const auto& d : cands) {
        if (pool.size() == events.size()) break;
        const bool claimed = std::any_of(pool.begin(), pool.end(),
                                         [&](const DoaEstimate& p) { return p.direction == d.direction; });
        if (!claimed) pool.push_back(d);
      }
    }
    if (events.size() > pool.size()) {
      // Keep the most probable events; ties keep the lower class id.
      std::stable_sort(events.begin(), events.end(), [](const ActiveEvent& a, const ActiveEvent& b) {
        return a.probability != b.probability ? a.probability > b.probability
                                              : a.class_id < b.class_id;
      });
      events.resize(pool.size());
    }
  }

  std::sort(events.begin(), events.end(),
            [](const ActiveEvent& a, const ActiveEvent& b) { return a.class_id < b.class_id; });
  for (std::size_t i = 0; i < events.size(); ++i) {
    out.pairs.push_back({events[i].class_id, pool[i].direction});
  }
  return out;
}

std::vector<EventFrame> fuse_track(std::span<const DetectionFrame> detections,
                                   const DoaTrack& doa_track, std::size_t neighborhood,
                                   double tau) {
  if (detections.size() != doa_track.size()) {
    throw Error("detection and DOA tracks differ in length (" +
                std::to_string(detections.size()) + " vs " + std::to_string(doa_track.size()) +
                " frames)");
  }
  const auto frames = static_cast<long>(doa_track.size());
  const auto n = static_cast<long>(neighborhood);
  std::vector<EventFrame> out;
  out.reserve(doa_track.size());
  std::vector<NeighborDoas> neigh;
  for (long t = 0; t < frames; ++t) {
    const auto active = threshold_detections(detections[static_cast<std::size_t>(t)], tau);
    neigh.clear();
    if (active.size() > doa_track[static_cast<std::size_t>(t)].size()) {
      for (long o = -n; o <= n; ++o) {
        if (o == 0 || t + o < 0 || t + o >= frames) continue;
        neigh.push_back({o, doa_track[static_cast<std::size_t>(t + o)]});
      }
    }
    out.push_back(fuse_frame(static_cast<std::size_t>(t), active,
                             doa_track[static_cast<std::size_t>(t)], neigh));
  }
  return out;
}

std::vector<DetectionFrame> oracle_detections(const GroundTruth& gt, const DetectionNoise& noise,
                                              std::size_t class_count) {
  if (noise.dropout < 0.0 || noise.dropout > 1.0) throw Error("dropout must lie in [0, 1]");
  std::vector<DetectionFrame> out(gt.frame_count);
  for (std::size_t t = 0; t < gt.frame_count; ++t) {
    out[t].frame = t;
    out[t].probabilities.assign(class_count, 0.0);
  }
  Rng rng(noise.seed);
  const auto j = static_cast<std::int64_t>(noise.jitter_frames);
  for (const auto& ev : gt.events) {
    if (ev.class_id < 0 || static_cast<std::size_t>(ev.class_id) >= class_count) {
      throw Error("ground-truth class id outside the class set");
    }
    auto [on, off] = gt.frame_span(ev);
    auto lo = static_cast<std::int64_t>(on);
    auto hi = static_cast<std::int64_t>(off);
    if (j > 0) {
      lo += rng.uniform_int(-j, j);
      hi += rng.uniform_int(-j, j);
    }
    lo = std::clamp<std::int64_t>(lo, 0, static_cast<std::int64_t>(gt.frame_count));
    hi = std::clamp<std::int64_t>(hi, 0, static_cast<std::int64_t>(gt.frame_count));
    for (auto t = lo; t < hi; ++t) {
      const bool keep = noise.dropout <= 0.0 || !rng.bernoulli(noise.dropout);
      if (keep) out[static_cast<std::size_t>(t)].probabilities[static_cast<std::size_t>(ev.class_id)] = 1.0;
    }
  }
  return out;
}

}  // namespace seld

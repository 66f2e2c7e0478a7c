#include <algorithm>
#include <string>

#include "seld/error.hpp"
#include "seld/ssl.hpp"

namespace seld {

void SslConfig::validate(std::size_t channel_count, std::size_t bin_count) const {
  if (bins.lo >= bins.hi || bins.hi >= bin_count) {
    throw Error("bin range [" + std::to_string(bins.lo) + ", " + std::to_string(bins.hi) +
                "] invalid for " + std::to_string(bin_count) + " bins");
  }
  if (!(coherence_rho > 1.0 / static_cast<double>(channel_count)) || coherence_rho > 1.0) {
    throw Error("coherence rho must lie in (1/channels, 1]");
  }
  if (!(magnitude_gamma >= 0.0)) throw Error("magnitude gamma must be non-negative");
  if (floor_window == 0) throw Error("noise floor window must be positive");
  if (onset_enabled && (!(onset_alpha > 0.0) || onset_smoothing < 0.0 || onset_smoothing >= 1.0)) {
    throw Error("onset alpha must be positive and smoothing in [0, 1)");
  }
  if (!(smooth_sigma_az > 0.0) || !(smooth_sigma_el > 0.0)) {
    throw Error("smoothing sigmas must be positive");
  }
  if (peak_threshold_ratio < 0.0 || peak_threshold_min < 0.0) {
    throw Error("peak thresholds must be non-negative");
  }
  if (max_peaks == 0) throw Error("max_peaks must be at least 1");
}

DoaTrack estimate_doa_track(const TimeFreqTensor& tensor, const DoaGrid& grid,
                            const SslConfig& cfg, const HistogramObserver& observer) {
  const SingleSourceBins ss = single_source_bins(tensor, grid, cfg);
  const std::size_t frames = tensor.frame_count();

  // Per-frame vote lists, then a sliding window sum over them.
  std::vector<std::vector<std::size_t>> votes(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    for (Eigen::Index k = 0; k < ss.cells.cols(); ++k) {
      const int c = ss.cells(static_cast<Eigen::Index>(t), k);
      if (c >= 0) votes[t].push_back(static_cast<std::size_t>(c));
    }
  }

  DoaTrack track(frames);
  Histogram2D raw(grid);
  const std::size_t L = cfg.frame_window;
  const std::size_t first_hi = std::min(L, frames - 1);
  for (std::size_t t = 0; t <= first_hi; ++t) {
    for (auto c : votes[t]) raw[c] += 1.0;
  }
  for (std::size_t t = 0; t < frames; ++t) {
    if (t > 0) {
      if (t + L < frames) {
        for (auto c : votes[t + L]) raw[c] += 1.0;
      }
      if (t >= L + 1) {
        for (auto c : votes[t - L - 1]) raw[c] -= 1.0;
      }
    }
    const double total = raw.total();
    if (total > 0.0) {
      const Histogram2D smoothed = smooth_histogram(raw, cfg.smooth_sigma_az, cfg.smooth_sigma_el,
                                                   grid.azimuth_circular());
      const double threshold = std::max(cfg.peak_threshold_ratio * total, cfg.peak_threshold_min);
      track[t] = pick_peaks(smoothed, grid, threshold, cfg.max_peaks);
      if (observer) observer(t, raw, smoothed);
    } else if (observer) {
      observer(t, raw, raw);
    }
  }
  return track;
}

}  // namespace seld

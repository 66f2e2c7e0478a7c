#include <algorithm>
#include <deque>

#include "seld/error.hpp"
#include "seld/ssl.hpp"

namespace seld {
namespace {

constexpr double kFloorMeanFraction = 1e-3;

void check_range(BinRange range, Eigen::Index bins) {
  if (range.lo > range.hi || static_cast<Eigen::Index>(range.hi) >= bins) {
    throw Error("bin range outside the spectrum");
  }
}

}  // namespace

MagnitudeMap mean_magnitude(const TimeFreqTensor& tensor) {
  const auto frames = static_cast<Eigen::Index>(tensor.frame_count());
  const auto bins = static_cast<Eigen::Index>(tensor.bin_count());
  MagnitudeMap m(frames, bins);
  const double inv = 1.0 / static_cast<double>(tensor.channel_count());
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index k = 0; k < bins; ++k) {
      double sum = 0.0;
      for (const auto& x : tensor.snapshot(static_cast<std::size_t>(t),
                                           static_cast<std::size_t>(k))) {
        sum += std::abs(x);
      }
      m(t, k) = sum * inv;
    }
  }
  return m;
}

NoiseFloor noise_floor(const MagnitudeMap& magnitude, std::size_t window) {
  if (window == 0) throw Error("noise floor window must be positive");
  const Eigen::Index frames = magnitude.rows();
  const Eigen::Index bins = magnitude.cols();

  // 3x3 local mean, clipped at the edges.
  MagnitudeMap smooth(frames, bins);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const Eigen::Index t0 = std::max<Eigen::Index>(t - 1, 0);
    const Eigen::Index t1 = std::min<Eigen::Index>(t + 1, frames - 1);
    for (Eigen::Index k = 0; k < bins; ++k) {
      const Eigen::Index k0 = std::max<Eigen::Index>(k - 1, 0);
      const Eigen::Index k1 = std::min<Eigen::Index>(k + 1, bins - 1);
      smooth(t, k) = magnitude.block(t0, k0, t1 - t0 + 1, k1 - k0 + 1).mean();
    }
  }

  const auto w = static_cast<Eigen::Index>(window);
  NoiseFloor floor(frames, bins);
  std::deque<Eigen::Index> candidates;
  for (Eigen::Index k = 0; k < bins; ++k) {
    candidates.clear();
    double sum = 0.0;
    for (Eigen::Index t = 0; t < frames; ++t) {
      const double v = smooth(t, k);
      while (!candidates.empty() && smooth(candidates.back(), k) >= v) {
        candidates.pop_back();
      }
      candidates.push_back(t);
      if (candidates.front() <= t - w) candidates.pop_front();
      sum += v;
      if (t >= w) sum -= smooth(t - w, k);
      const double mean = std::max(sum, 0.0) / static_cast<double>(std::min(t + 1, w));
      floor(t, k) = std::max(smooth(candidates.front(), k), kFloorMeanFraction * mean);
    }
  }
  return floor;
}

NoiseFloor noise_floor(const TimeFreqTensor& tensor, std::size_t window) {
  if (tensor.empty()) throw Error("noise floor of an empty tensor");
  return noise_floor(mean_magnitude(tensor), window);
}

SingleSourceMask magnitude_test(const MagnitudeMap& magnitude, const NoiseFloor& floor,
                                double gamma, BinRange range) {
  if (magnitude.rows() != floor.rows() || magnitude.cols() != floor.cols()) {
    throw Error("noise floor shape does not match the magnitudes");
  }
  check_range(range, magnitude.cols());
  SingleSourceMask mask = SingleSourceMask::Constant(magnitude.rows(), magnitude.cols(), false);
  const auto lo = static_cast<Eigen::Index>(range.lo);
  const auto n = static_cast<Eigen::Index>(range.hi - range.lo + 1);
  mask.middleCols(lo, n) =
      magnitude.middleCols(lo, n) > gamma * floor.middleCols(lo, n);
  return mask;
}

SingleSourceMask onset_test(const MagnitudeMap& magnitude, double alpha,
                            double smoothing, BinRange range) {
  if (magnitude.rows() < 2) throw Error("onset test needs at least two frames");
  check_range(range, magnitude.cols());
  SingleSourceMask mask = SingleSourceMask::Constant(magnitude.rows(), magnitude.cols(), false);
  for (auto k = static_cast<Eigen::Index>(range.lo);
       k <= static_cast<Eigen::Index>(range.hi); ++k) {
    mask(0, k) = magnitude(0, k) > 0.0;
    double running = magnitude(0, k);
    for (Eigen::Index t = 1; t < magnitude.rows(); ++t) {
      mask(t, k) = magnitude(t, k) > alpha * running;
      running = smoothing * running + (1.0 - smoothing) * magnitude(t, k);
    }
  }
  return mask;
}

}  // namespace seld

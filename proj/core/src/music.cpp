#include "seld/music.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "seld/error.hpp"

namespace seld {
namespace {

constexpr double kMinDenominator = 1e-12;

void check_sources(std::size_t n_sources) {
  if (n_sources == 0 || n_sources >= kFoaChannels) {
    throw Error("MUSIC needs between 1 and 3 sources for a 4-channel array");
  }
}

// Sum of x x^H over bins for every frame.
std::vector<Covariance> frame_covariances(const TimeFreqTensor& tensor, BinRange bins) {
  if (tensor.channel_count() != kFoaChannels) throw Error("MUSIC needs a 4-channel tensor");
  if (bins.lo > bins.hi || bins.hi >= tensor.bin_count()) throw Error("bin range outside the spectrum");
  std::vector<Covariance> out(tensor.frame_count(), Covariance::Zero());
  for (std::size_t t = 0; t < tensor.frame_count(); ++t) {
    for (std::size_t k = bins.lo; k <= bins.hi; ++k) {
      const Eigen::Map<const Snapshot> x(tensor.snapshot(t, k).data());
      out[t].noalias() += x * x.adjoint();
    }
  }
  return out;
}

Covariance window_mean(const std::vector<Covariance>& per_frame, std::size_t frame,
                       std::size_t half_window, std::size_t bins_per_frame) {
  const std::size_t t0 = frame >= half_window ? frame - half_window : 0;
  const std::size_t t1 = std::min(frame + half_window, per_frame.size() - 1);
  Covariance cov = Covariance::Zero();
  for (std::size_t t = t0; t <= t1; ++t) cov += per_frame[t];
  return cov / static_cast<double>((t1 - t0 + 1) * bins_per_frame);
}

}  // namespace

Histogram2D music_spectrum(const Covariance& cov, const DoaGrid& grid,
                           std::size_t n_sources) {
  check_sources(n_sources);
  Eigen::SelfAdjointEigenSolver<Covariance> es(cov);
  // Eigenvalues ascend, so the noise subspace is the leading columns.
  const auto noise = es.eigenvectors().leftCols(
      static_cast<Eigen::Index>(kFoaChannels - n_sources));
  Histogram2D spectrum(grid);
  for (std::size_t g = 0; g < grid.cell_count(); ++g) {
    const auto& s = grid.steering(g).gains;
    const Eigen::Vector4cd sv(s[0], s[1], s[2], s[3]);
    const double denom = (noise.adjoint() * sv).squaredNorm();
    spectrum[g] = 1.0 / std::max(denom, kMinDenominator);
  }
  return spectrum;
}

MusicResult music_spectrum(const TimeFreqTensor& tensor, const DoaGrid& grid,
                           std::size_t frame, std::size_t half_window,
                           std::size_t n_sources, BinRange bins) {
  check_sources(n_sources);
  if (frame >= tensor.frame_count()) throw Error("frame outside the tensor");
  const auto per_frame = frame_covariances(tensor, bins);
  const Covariance cov = window_mean(per_frame, frame, half_window, bins.hi - bins.lo + 1);
  MusicResult out{music_spectrum(cov, grid, n_sources), {}};
  out.peaks = pick_peaks(out.spectrum, grid, 0.0, n_sources);
  return out;
}

DoaTrack music_track(const TimeFreqTensor& tensor, const DoaGrid& grid,
                     std::span<const std::size_t> source_counts,
                     std::size_t half_window, BinRange bins) {
  if (source_counts.size() != tensor.frame_count()) {
    throw Error("source count list does not match the frame count");
  }
  const auto per_frame = frame_covariances(tensor, bins);
  DoaTrack track(tensor.frame_count());
  for (std::size_t t = 0; t < tensor.frame_count(); ++t) {
    const std::size_t n = std::min<std::size_t>(source_counts[t], kFoaChannels - 1);
    if (n == 0) continue;
    const Covariance cov = window_mean(per_frame, t, half_window, bins.hi - bins.lo + 1);
    if (!(cov.trace().real() > 0.0)) continue;
    track[t] = pick_peaks(music_spectrum(cov, grid, n), grid, 0.0, n);
  }
  return track;
}

}  // namespace seld

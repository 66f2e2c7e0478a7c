#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seld/ssl.hpp"

namespace seld {

struct MusicResult {
  Histogram2D spectrum;
  std::vector<DoaEstimate> peaks;
};

// Wideband MUSIC over frames [frame-L, frame+L] and all bins in `bins`. The
// spatial covariance is the plain average of x x^H; the noise subspace holds
// the 4 - n_sources weakest eigenvectors and the spectrum at cell g is
// 1 / ||E_n^H s_g||^2. Peaks use pick_peaks with a zero threshold and at
// most n_sources results.
MusicResult music_spectrum(const TimeFreqTensor& tensor, const DoaGrid& grid,
                           std::size_t frame, std::size_t half_window,
                           std::size_t n_sources, BinRange bins = {});

// Spectrum of a given covariance.
Histogram2D music_spectrum(const Covariance& cov, const DoaGrid& grid,
                           std::size_t n_sources);

// MUSIC estimates for every frame; source_counts[t] selects how many peaks
// frame t reports (0 skips the frame, values are capped at 3).
DoaTrack music_track(const TimeFreqTensor& tensor, const DoaGrid& grid,
                     std::span<const std::size_t> source_counts,
                     std::size_t half_window, BinRange bins = {});

}  // namespace seld

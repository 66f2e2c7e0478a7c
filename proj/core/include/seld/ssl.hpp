#pragma once

// Single-source histogram DOA estimation.
//
// Per TF bin in [bin_lo, bin_hi] three tests select bins dominated by one
// source: a magnitude test against a minimum-statistics noise floor, an
// optional onset test, and a coherence test asking the local 4x4 spatial
// covariance to be close to rank 1. Each surviving bin votes for the grid
// cell whose steering vector best matches the covariance's principal
// eigenvector. Votes from frames [t-L, t+L] form the histogram for frame t,
// which is Gaussian-smoothed (wider in elevation) and peak-picked.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "seld/dsp.hpp"
#include "seld/foa.hpp"

namespace seld {

// Inclusive STFT bin range.
struct BinRange {
  std::size_t lo = 2;
  std::size_t hi = 384;
};

// Every estimator knob in one place. Defaults are the tuned values used by the
// CLI; each one can be overridden from a config file or flag.
struct SslConfig {
  // 2..384 at 48 kHz / 2048 points is 47 Hz .. 9 kHz, the band where the FOA
  // steering model holds.
  BinRange bins{2, 384};

  // Magnitude test: channel-mean magnitude > gamma * floor.
  double magnitude_gamma = 2.0;
  // Running-minimum window of the noise floor, in frames (2 s at 20 ms hop).
  std::size_t floor_window = 100;

  // Coherence test: lambda_max / trace >= rho over a (2f+1) x (2b+1)
  // neighborhood of snapshots.
  double coherence_rho = 0.9;
  std::size_t coherence_half_frames = 1;
  std::size_t coherence_half_bins = 1;

  // Onset test, off by default.
  bool onset_enabled = false;
  double onset_alpha = 1.5;
  double onset_smoothing = 0.8;

  // Histogram for frame t aggregates frames [t-L, t+L].
  std::size_t frame_window = 7;

  // Gaussian kernel widths in grid cells; truncated at 3 sigma.
  double smooth_sigma_az = 1.0;
  double smooth_sigma_el = 1.5;

  // Peaks must reach max(ratio * votes in the window, minimum).
  double peak_threshold_ratio = 0.01;
  double peak_threshold_min = 2.0;
  std::size_t max_peaks = 2;

  // Throws seld::Error when a field violates its invariant for the given
  // tensor shape.
  void validate(std::size_t channel_count, std::size_t bin_count) const;
};

// Rows are frames, columns are bins.
using MagnitudeMap = Eigen::ArrayXXd;
using NoiseFloor = Eigen::ArrayXXd;
using SingleSourceMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
// Grid cell voted by each single-source bin, -1 elsewhere.
using BinDoaMap = Eigen::ArrayXXi;

using Covariance = Eigen::Matrix4cd;
using Snapshot = Eigen::Vector4cd;

// Mean over channels of |X(c, t, k)|.
MagnitudeMap mean_magnitude(const TimeFreqTensor& tensor);

// Minimum-statistics floor. The channel-mean magnitude is first averaged over
// a 3x3 (frame, bin) neighborhood, then the floor at (t, k) is the minimum of
// that smoothed value over frames [t - window + 1, t]. A small fraction
// (1e-3) of the window mean keeps the floor positive whenever the window holds
// any energy at that bin.
NoiseFloor noise_floor(const MagnitudeMap& magnitude, std::size_t window);
NoiseFloor noise_floor(const TimeFreqTensor& tensor, std::size_t window);

SingleSourceMask magnitude_test(const MagnitudeMap& magnitude, const NoiseFloor& floor,
                                double gamma, BinRange range);

// Passes (t, k) when magnitude exceeds alpha times a running average of the
// preceding frames: r(1) = m(0), r(t) = s r(t-1) + (1 - s) m(t-1). Frame 0
// has no history and passes whenever it carries energy.
SingleSourceMask onset_test(const MagnitudeMap& magnitude, double alpha,
                            double smoothing, BinRange range);

// Mean of x x^H over frames [t-hf, t+hf] x bins [k-hb, k+hb], clipped to the
// tensor. Requires a 4-channel tensor.
Covariance local_covariance(const TimeFreqTensor& tensor, std::size_t frame,
                            std::size_t bin, std::size_t half_frames = 1,
                            std::size_t half_bins = 1);

// lambda_max / trace, or 0 for a zero-trace matrix.
double rank_one_ratio(const Covariance& cov);

bool coherence_test(const Covariance& cov, double rho);

// Unit principal eigenvector, phase fixed so its largest-magnitude component
// is real and positive.
Snapshot principal_eigenvector(const Covariance& cov);

// Grid cell maximizing |v^H s_g| for the principal eigenvector v; lowest cell
// wins ties. Throws on a zero matrix.
std::size_t bin_doa(const Covariance& cov, const DoaGrid& grid);

struct SingleSourceBins {
  SingleSourceMask mask;
  BinDoaMap cells;
};

// Runs all enabled tests and assigns a grid cell to every single-source bin.
SingleSourceBins single_source_bins(const TimeFreqTensor& tensor, const DoaGrid& grid,
                                    const SslConfig& cfg);

// Vote accumulator over a DoaGrid; indexed like the grid's cells.
class Histogram2D {
 public:
  Histogram2D() = default;
  Histogram2D(std::size_t azimuth_count, std::size_t elevation_count);
  explicit Histogram2D(const DoaGrid& grid)
      : Histogram2D(grid.azimuth_count(), grid.elevation_count()) {}

  std::size_t azimuth_count() const { return az_; }
  std::size_t elevation_count() const { return el_; }
  std::size_t cell_count() const { return counts_.size(); }

  double& at(std::size_t az_index, std::size_t el_index) {
    return counts_[el_index * az_ + az_index];
  }
  double at(std::size_t az_index, std::size_t el_index) const {
    return counts_[el_index * az_ + az_index];
  }
  double& operator[](std::size_t cell) { return counts_[cell]; }
  double operator[](std::size_t cell) const { return counts_[cell]; }

  std::span<const double> counts() const { return counts_; }
  double total() const;
  double max() const;

 private:
  std::size_t az_ = 0;
  std::size_t el_ = 0;
  std::vector<double> counts_;
};

// Votes of frames [frame - L, frame + L] (clipped) from a precomputed map.
Histogram2D frame_histogram(const BinDoaMap& cells, const DoaGrid& grid,
                            std::size_t frame, std::size_t half_window);

// Same, computing covariances and bin DOAs for the masked bins on the fly.
Histogram2D frame_histogram(const TimeFreqTensor& tensor, const SingleSourceMask& mask,
                            const DoaGrid& grid, std::size_t frame,
                            std::size_t half_window, const SslConfig& cfg = {});

// Separable Gaussian smoothing (kernel truncated at 3 sigma), circular in
// azimuth. Along elevation each cell's kernel is clipped at the grid edge and
// renormalized, so total mass is preserved and a single cell's bump peaks on
// that cell. Constants are preserved along azimuth; near the elevation edges
// a uniform histogram is slightly reshaped.
Histogram2D smooth_histogram(const Histogram2D& h, double sigma_az, double sigma_el,
                             bool azimuth_circular = true);

struct DoaEstimate {
  SphericalDirection direction;
  std::size_t cell = 0;
  double score = 0.0;
};

// Positive cells not exceeded by any 8-neighbor (azimuth wraps on circular
// grids) and at least `threshold`. Equal neighbors are broken toward the
// lower cell index. Sorted by score descending, then cell index.
std::vector<DoaEstimate> pick_peaks(const Histogram2D& h, const DoaGrid& grid,
                                    double threshold, std::size_t max_peaks);

using DoaTrack = std::vector<std::vector<DoaEstimate>>;

// Receives the raw and smoothed histogram of each frame.
using HistogramObserver =
    std::function<void(std::size_t frame, const Histogram2D& raw, const Histogram2D& smoothed)>;

// mask -> per-bin DOA -> per-frame histogram -> smoothing -> peaks, for every
// frame of the tensor.
DoaTrack estimate_doa_track(const TimeFreqTensor& tensor, const DoaGrid& grid,
                            const SslConfig& cfg = {},
                            const HistogramObserver& observer = {});

}  // namespace seld

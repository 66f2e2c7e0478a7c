#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "seld/error.hpp"
#include "seld/ssl.hpp"

namespace seld {
namespace {

void require_foa(const TimeFreqTensor& tensor) {
  if (tensor.channel_count() != kFoaChannels) {
    throw Error("spatial covariance needs a 4-channel FOA tensor");
  }
}

struct Eigen1 {
  double ratio = 0.0;
  Snapshot vector = Snapshot::Zero();
};

Snapshot fix_phase(Snapshot v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  const auto a = v(arg);
  if (std::abs(a) > 0.0) v *= std::conj(a) / std::abs(a);
  return v;
}

Eigen1 decompose(const Covariance& cov) {
  Eigen1 out;
  const double trace = cov.trace().real();
  if (!(trace > 0.0)) return out;
  Eigen::SelfAdjointEigenSolver<Covariance> es(cov);
  out.ratio = es.eigenvalues()(3) / trace;
  out.vector = fix_phase(es.eigenvectors().col(3));
  return out;
}

std::size_t best_cell(const Snapshot& v, const DoaGrid& grid) {
  // Steering gains are real, so |v^H s|^2 = (Re v . s)^2 + (Im v . s)^2.
  const std::array<double, 4> re{v(0).real(), v(1).real(), v(2).real(), v(3).real()};
  const std::array<double, 4> im{v(0).imag(), v(1).imag(), v(2).imag(), v(3).imag()};
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t g = 0; g < grid.cell_count(); ++g) {
    const auto& s = grid.steering(g).gains;
    const double a = re[0] * s[0] + re[1] * s[1] + re[2] * s[2] + re[3] * s[3];
    const double b = im[0] * s[0] + im[1] * s[1] + im[2] * s[2] + im[3] * s[3];
    const double score = a * a + b * b;
    if (score > best_score) {
      best_score = score;
      best = g;
    }
  }
  return best;
}

}  // namespace

Covariance local_covariance(const TimeFreqTensor& tensor, std::size_t frame,
                            std::size_t bin, std::size_t half_frames,
                            std::size_t half_bins) {
  require_foa(tensor);
  if (frame >= tensor.frame_count() || bin >= tensor.bin_count()) {
    throw Error("covariance center outside the tensor");
  }
  const std::size_t t0 = frame >= half_frames ? frame - half_frames : 0;
  const std::size_t t1 = std::min(frame + half_frames, tensor.frame_count() - 1);
  const std::size_t k0 = bin >= half_bins ? bin - half_bins : 0;
  const std::size_t k1 = std::min(bin + half_bins, tensor.bin_count() - 1);

  Covariance cov = Covariance::Zero();
  for (std::size_t t = t0; t <= t1; ++t) {
    for (std::size_t k = k0; k <= k1; ++k) {
      const Eigen::Map<const Snapshot> x(tensor.snapshot(t, k).data());
      cov.noalias() += x * x.adjoint();
    }
  }
  cov /= static_cast<double>((t1 - t0 + 1) * (k1 - k0 + 1));
  return cov;
}

double rank_one_ratio(const Covariance& cov) { return decompose(cov).ratio; }

bool coherence_test(const Covariance& cov, double rho) {
  return decompose(cov).ratio >= rho && cov.trace().real() > 0.0;
}

Snapshot principal_eigenvector(const Covariance& cov) {
  if (!(cov.trace().real() > 0.0)) throw Error("principal eigenvector of a zero matrix");
  return decompose(cov).vector;
}

std::size_t bin_doa(const Covariance& cov, const DoaGrid& grid) {
  return best_cell(principal_eigenvector(cov), grid);
}

SingleSourceBins single_source_bins(const TimeFreqTensor& tensor, const DoaGrid& grid,
                                    const SslConfig& cfg) {
  require_foa(tensor);
  cfg.validate(tensor.channel_count(), tensor.bin_count());

  const MagnitudeMap magnitude = mean_magnitude(tensor);
  const NoiseFloor floor = noise_floor(magnitude, cfg.floor_window);
  SingleSourceMask candidates = magnitude_test(magnitude, floor, cfg.magnitude_gamma, cfg.bins);
  if (cfg.onset_enabled && tensor.frame_count() >= 2) {
    candidates = candidates &&
                 onset_test(magnitude, cfg.onset_alpha, cfg.onset_smoothing, cfg.bins);
  }

  SingleSourceBins out;
  out.mask = SingleSourceMask::Constant(candidates.rows(), candidates.cols(), false);
  out.cells = BinDoaMap::Constant(candidates.rows(), candidates.cols(), -1);
  for (Eigen::Index t = 0; t < candidates.rows(); ++t) {
    for (auto k = static_cast<Eigen::Index>(cfg.bins.lo);
         k <= static_cast<Eigen::Index>(cfg.bins.hi); ++k) {
      if (!candidates(t, k)) continue;
      const Covariance cov =
          local_covariance(tensor, static_cast<std::size_t>(t), static_cast<std::size_t>(k),
                           cfg.coherence_half_frames, cfg.coherence_half_bins);
      const Eigen1 e = decompose(cov);
      if (e.ratio < cfg.coherence_rho || e.ratio <= 0.0) continue;
      out.mask(t, k) = true;
      out.cells(t, k) = static_cast<int>(best_cell(e.vector, grid));
    }
  }
  return out;
}

Histogram2D frame_histogram(const TimeFreqTensor& tensor, const SingleSourceMask& mask,
                            const DoaGrid& grid, std::size_t frame,
                            std::size_t half_window, const SslConfig& cfg) {
  if (frame >= tensor.frame_count()) throw Error("frame outside the tensor");
  if (mask.rows() != static_cast<Eigen::Index>(tensor.frame_count()) ||
      mask.cols() != static_cast<Eigen::Index>(tensor.bin_count())) {
    throw Error("mask shape does not match the tensor");
  }
  Histogram2D h(grid);
  const std::size_t t0 = frame >= half_window ? frame - half_window : 0;
  const std::size_t t1 = std::min(frame + half_window, tensor.frame_count() - 1);
  for (std::size_t t = t0; t <= t1; ++t) {
    for (std::size_t k = 0; k < tensor.bin_count(); ++k) {
      if (!mask(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k))) continue;
      const Covariance cov = local_covariance(tensor, t, k, cfg.coherence_half_frames,
                                              cfg.coherence_half_bins);
      if (!(cov.trace().real() > 0.0)) continue;
      h[bin_doa(cov, grid)] += 1.0;
    }
  }
  return h;
}

}  // namespace seld

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seld/error.hpp"
#include "seld/ssl.hpp"

namespace seld {
namespace {

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw Error("smoothing sigma must be positive");
  const auto radius = static_cast<int>(std::floor(3.0 * sigma));
  std::vector<double> w(2 * static_cast<std::size_t>(radius) + 1);
  for (int o = -radius; o <= radius; ++o) {
    w[static_cast<std::size_t>(o + radius)] = std::exp(-0.5 * (o * o) / (sigma * sigma));
  }
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= sum;
  return w;
}

std::size_t wrap_index(long i, long n) {
  long m = i % n;
  if (m < 0) m += n;
  return static_cast<std::size_t>(m);
}

// n x n smoothing operator, m[src * n + dst]. Circular axes use the wrapped
// kernel. On bounded axes each source cell's kernel is truncated to the axis
// and renormalized, so every source keeps its full mass and a single cell's
// bump stays centered on it.
std::vector<double> axis_operator(std::size_t n, double sigma, bool circular) {
  const auto w = gaussian_kernel(sigma);
  const long r = static_cast<long>(w.size() / 2);
  const long ln = static_cast<long>(n);
  std::vector<double> m(n * n, 0.0);
  for (long src = 0; src < ln; ++src) {
    double z = 0.0;
    for (long o = -r; o <= r; ++o) {
      const long dst = src + o;
      const double k = w[static_cast<std::size_t>(o + r)];
      if (circular) {
        m[static_cast<std::size_t>(src) * n + wrap_index(dst, ln)] += k;
      } else if (dst >= 0 && dst < ln) {
        m[static_cast<std::size_t>(src) * n + static_cast<std::size_t>(dst)] = k;
        z += k;
      }
    }
    if (!circular) {
      for (std::size_t dst = 0; dst < n; ++dst) m[static_cast<std::size_t>(src) * n + dst] /= z;
    }
  }
  return m;
}

}  // namespace

Histogram2D::Histogram2D(std::size_t azimuth_count, std::size_t elevation_count)
    : az_(azimuth_count), el_(elevation_count), counts_(azimuth_count * elevation_count, 0.0) {}

double Histogram2D::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0.0);
}

double Histogram2D::max() const {
  return counts_.empty() ? 0.0 : *std::max_element(counts_.begin(), counts_.end());
}

Histogram2D frame_histogram(const BinDoaMap& cells, const DoaGrid& grid,
                            std::size_t frame, std::size_t half_window) {
  const auto frames = static_cast<std::size_t>(cells.rows());
  if (frame >= frames) throw Error("frame outside the bin DOA map");
  Histogram2D h(grid);
  const std::size_t t0 = frame >= half_window ? frame - half_window : 0;
  const std::size_t t1 = std::min(frame + half_window, frames - 1);
  for (std::size_t t = t0; t <= t1; ++t) {
    for (Eigen::Index k = 0; k < cells.cols(); ++k) {
      const int c = cells(static_cast<Eigen::Index>(t), k);
      if (c >= 0) h[static_cast<std::size_t>(c)] += 1.0;
    }
  }
  return h;
}

Histogram2D smooth_histogram(const Histogram2D& h, double sigma_az, double sigma_el,
                             bool azimuth_circular) {
  const std::size_t n_az = h.azimuth_count();
  const std::size_t n_el = h.elevation_count();
  const auto maz = axis_operator(n_az, sigma_az, azimuth_circular);
  const auto mel = axis_operator(n_el, sigma_el, false);

  Histogram2D tmp(n_az, n_el);
  for (std::size_t e = 0; e < n_el; ++e) {
    for (std::size_t a = 0; a < n_az; ++a) {
      const double v = h.at(a, e);
      if (v == 0.0) continue;
      for (std::size_t b = 0; b < n_az; ++b) tmp.at(b, e) += maz[a * n_az + b] * v;
    }
  }
  Histogram2D out(n_az, n_el);
  for (std::size_t e = 0; e < n_el; ++e) {
    for (std::size_t a = 0; a < n_az; ++a) {
      const double v = tmp.at(a, e);
      if (v == 0.0) continue;
      for (std::size_t f = 0; f < n_el; ++f) out.at(a, f) += mel[e * n_el + f] * v;
    }
  }
  return out;
}

std::vector<DoaEstimate> pick_peaks(const Histogram2D& h, const DoaGrid& grid,
                                    double threshold, std::size_t max_peaks) {
  if (h.azimuth_count() != grid.azimuth_count() ||
      h.elevation_count() != grid.elevation_count()) {
    throw Error("histogram shape does not match the grid");
  }
  const long n_az = static_cast<long>(h.azimuth_count());
  const long n_el = static_cast<long>(h.elevation_count());
  std::vector<DoaEstimate> peaks;
  for (long e = 0; e < n_el; ++e) {
    for (long a = 0; a < n_az; ++a) {
      const std::size_t cell = grid.cell(static_cast<std::size_t>(a), static_cast<std::size_t>(e));
      const double v = h[cell];
      if (!(v > 0.0) || v < threshold) continue;
      bool is_peak = true;
      for (long de = -1; de <= 1 && is_peak; ++de) {
        const long ne = e + de;
        if (ne < 0 || ne >= n_el) continue;
        for (long da = -1; da <= 1; ++da) {
          if (da == 0 && de == 0) continue;
          long na = a + da;
          if (grid.azimuth_circular()) {
            na = static_cast<long>(wrap_index(na, n_az));
          } else if (na < 0 || na >= n_az) {
            continue;
          }
          const std::size_t other =
              grid.cell(static_cast<std::size_t>(na), static_cast<std::size_t>(ne));
          if (other == cell) continue;
          const double w = h[other];
          if (w > v || (w == v && other < cell)) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) peaks.push_back({grid.direction(cell), cell, v});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const DoaEstimate& x, const DoaEstimate& y) {
    return x.score != y.score ? x.score > y.score : x.cell < y.cell;
  });
  if (peaks.size() > max_peaks) peaks.resize(max_peaks);
  return peaks;
}

}  // namespace seld

#include "seld/histogram_dump.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "seld/error.hpp"

namespace seld {

void write_histogram_csv(const Histogram2D& h, std::ostream& out) {
  char buf[32];
  for (std::size_t e = 0; e < h.elevation_count(); ++e) {
    for (std::size_t a = 0; a < h.azimuth_count(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", h.at(a, e));
      if (a) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

void write_histogram_csv(const Histogram2D& h, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot create " + path.string());
  write_histogram_csv(h, out);
}

void write_histogram_pgm(const Histogram2D& h, std::ostream& out) {
  out << "P5\n" << h.azimuth_count() << ' ' << h.elevation_count() << "\n255\n";
  const double peak = h.max();
  for (std::size_t e = 0; e < h.elevation_count(); ++e) {
    for (std::size_t a = 0; a < h.azimuth_count(); ++a) {
      const double v = peak > 0.0 ? h.at(a, e) / peak : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)))));
    }
  }
}

void write_histogram_pgm(const Histogram2D& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot create " + path.string());
  write_histogram_pgm(h, out);
}

}  // namespace seld

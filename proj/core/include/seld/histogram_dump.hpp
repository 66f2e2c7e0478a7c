#pragma once

#include <filesystem>
#include <iosfwd>

#include "seld/ssl.hpp"

namespace seld {

// One row per elevation cell (lowest elevation first), one column per azimuth
// cell, comma separated, %.17g.
void write_histogram_csv(const Histogram2D& h, std::ostream& out);
void write_histogram_csv(const Histogram2D& h, const std::filesystem::path& path);

// Binary 8-bit PGM heatmap, same orientation as the CSV, scaled to the maximum.
void write_histogram_pgm(const Histogram2D& h, std::ostream& out);
void write_histogram_pgm(const Histogram2D& h, const std::filesystem::path& path);

}  // namespace seld

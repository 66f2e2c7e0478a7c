#include "seld/foa.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "seld/error.hpp"

namespace seld {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double wrap_azimuth(double az) {
  double a = std::fmod(az + 180.0, 360.0);
  if (a < 0.0) a += 360.0;
  a -= 180.0;
  // fmod can land exactly on +180 after rounding.
  if (a >= 180.0) a -= 360.0;
  return a;
}

std::vector<double> enumerate(double lo, double hi, double res, bool half_open,
                              const char* what) {
  if (!(res > 0.0)) throw Error("grid resolution must be positive");
  if (hi < lo) throw Error(std::string(what) + " range is reversed");
  const double steps = (hi - lo) / res;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
    throw Error(std::string("resolution does not divide the ") + what + " range");
  }
  const auto count = static_cast<std::size_t>(rounded) + (half_open ? 0 : 1);
  std::vector<double> out(std::max<std::size_t>(count, 1));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lo + static_cast<double>(i) * res;
  return out;
}

}  // namespace

SphericalDirection::SphericalDirection(double azimuth_deg, double elevation_deg) {
  if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg)) {
    throw Error("direction angles must be finite");
  }
  if (elevation_deg < -90.0 || elevation_deg > 90.0) {
    throw Error("elevation " + std::to_string(elevation_deg) + " outside [-90, 90]");
  }
  azimuth_ = wrap_azimuth(azimuth_deg);
  elevation_ = elevation_deg;
}

std::array<double, 3> SphericalDirection::unit_vector() const {
  const double az = azimuth_ * kDeg;
  const double el = elevation_ * kDeg;
  return {std::cos(az) * std::cos(el), std::sin(az) * std::cos(el), std::sin(el)};
}

std::array<double, kFoaChannels> encoding_gains(const SphericalDirection& d) {
  const auto u = d.unit_vector();
  return {1.0, u[1], u[2], u[0]};
}

SteeringVector steering_vector(const SphericalDirection& d) {
  auto g = encoding_gains(d);
  double norm = 0.0;
  for (double v : g) norm += v * v;
  norm = std::sqrt(norm);
  SteeringVector s;
  for (std::size_t i = 0; i < kFoaChannels; ++i) s.gains[i] = g[i] / norm;
  return s;
}

DoaGrid::DoaGrid(std::vector<double> azimuths, std::vector<double> elevations,
                 double resolution, bool azimuth_circular)
    : azimuths_(std::move(azimuths)),
      elevations_(std::move(elevations)),
      resolution_(resolution),
      azimuth_circular_(azimuth_circular) {
  if (azimuths_.empty() || elevations_.empty()) throw Error("empty direction grid");
  steering_.reserve(azimuths_.size() * elevations_.size());
  for (double el : elevations_) {
    for (double az : azimuths_) steering_.push_back(steering_vector({az, el}));
  }
}

SphericalDirection DoaGrid::direction(std::size_t cell) const {
  if (cell >= cell_count()) throw Error("grid cell out of range");
  return {azimuths_[azimuth_index(cell)], elevations_[elevation_index(cell)]};
}

std::optional<std::size_t> DoaGrid::find(const SphericalDirection& d) const {
  constexpr double kTol = 1e-6;
  std::optional<std::size_t> az_i, el_i;
  for (std::size_t i = 0; i < azimuths_.size(); ++i) {
    double diff = std::abs(wrap_azimuth(azimuths_[i] - d.azimuth()));
    if (diff < kTol) az_i = i;
  }
  for (std::size_t i = 0; i < elevations_.size(); ++i) {
    if (std::abs(elevations_[i] - d.elevation()) < kTol) el_i = i;
  }
  if (!az_i || !el_i) return std::nullopt;
  return cell(*az_i, *el_i);
}

std::size_t DoaGrid::nearest(const SphericalDirection& d) const {
  const auto s = steering_vector(d);
  std::size_t best = 0;
  double best_dot = -2.0;
  for (std::size_t g = 0; g < steering_.size(); ++g) {
    double dot = 0.0;
    for (std::size_t c = 0; c < kFoaChannels; ++c) dot += s.gains[c] * steering_[g].gains[c];
    if (dot > best_dot) {
      best_dot = dot;
      best = g;
    }
  }
  return best;
}

DoaGrid build_grid(AngleRange azimuth, AngleRange elevation, double resolution) {
  if (azimuth.hi - azimuth.lo > 360.0) throw Error("azimuth range exceeds 360 degrees");
  if (elevation.lo < -90.0 || elevation.hi > 90.0) {
    throw Error("elevation range outside [-90, 90]");
  }
  const bool circular = std::abs(azimuth.hi - azimuth.lo - 360.0) < 1e-9;
  auto az = enumerate(azimuth.lo, azimuth.hi, resolution, circular, "azimuth");
  for (double& a : az) a = wrap_azimuth(a);
  auto el = enumerate(elevation.lo, elevation.hi, resolution, false, "elevation");
  return DoaGrid(std::move(az), std::move(el), resolution, circular);
}

DoaGrid default_task_grid() {
  return build_grid({-180.0, 180.0}, {-40.0, 40.0}, 10.0);
}

AudioClip encode_foa(std::span<const double> mono, const SphericalDirection& d,
                     double sample_rate) {
  const auto g = encoding_gains(d);
  std::vector<std::vector<double>> channels(kFoaChannels,
                                            std::vector<double>(mono.size()));
  for (std::size_t i = 0; i < mono.size(); ++i) {
    channels[0][i] = mono[i];
    for (std::size_t c = 1; c < kFoaChannels; ++c) channels[c][i] = g[c] * mono[i];
  }
  return AudioClip(std::move(channels), sample_rate);
}

}  // namespace seld

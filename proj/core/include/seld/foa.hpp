#pragma once

// First-order ambisonics direction model.
//
// Convention: ACN channel order (W, Y, Z, X) with SN3D real gains. A plane
// wave from azimuth az, elevation el (degrees, azimuth counter-clockwise from
// the front, elevation up from the horizon) is encoded with gains
//
//   W = 1, Y = sin(az) cos(el), Z = sin(el), X = cos(az) cos(el).
//
// The same gains serve as the array's theoretical steering vector, so the
// simulator and the estimators agree by construction. Steering vectors are
// frequency independent.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "seld/dsp.hpp"

namespace seld {

inline constexpr std::size_t kFoaChannels = 4;

// Azimuth normalized into [-180, 180), elevation in [-90, 90], degrees.
class SphericalDirection {
 public:
  SphericalDirection() = default;
  // Throws seld::Error on non-finite input or elevation outside [-90, 90].
  SphericalDirection(double azimuth_deg, double elevation_deg);

  double azimuth() const { return azimuth_; }
  double elevation() const { return elevation_; }

  // Unit vector (x, y, z) in the convention above.
  std::array<double, 3> unit_vector() const;

  friend bool operator==(const SphericalDirection&, const SphericalDirection&) = default;

 private:
  double azimuth_ = 0.0;
  double elevation_ = 0.0;
};

// Unit-norm real steering vector, components ordered (W, Y, Z, X).
struct SteeringVector {
  std::array<double, kFoaChannels> gains{};
};

// Un-normalized encoding gains; W is exactly 1.
std::array<double, kFoaChannels> encoding_gains(const SphericalDirection& d);

SteeringVector steering_vector(const SphericalDirection& d);

struct AngleRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Discretized direction set. Cell index = elevation_index * azimuth_count +
// azimuth_index; steering vectors are stored in that order.
class DoaGrid {
 public:
  DoaGrid(std::vector<double> azimuths, std::vector<double> elevations,
          double resolution, bool azimuth_circular);

  std::size_t azimuth_count() const { return azimuths_.size(); }
  std::size_t elevation_count() const { return elevations_.size(); }
  std::size_t cell_count() const { return steering_.size(); }
  double resolution() const { return resolution_; }
  bool azimuth_circular() const { return azimuth_circular_; }

  std::span<const double> azimuths() const { return azimuths_; }
  std::span<const double> elevations() const { return elevations_; }

  std::size_t cell(std::size_t az_index, std::size_t el_index) const {
    return el_index * azimuths_.size() + az_index;
  }
  std::size_t azimuth_index(std::size_t cell) const { return cell % azimuths_.size(); }
  std::size_t elevation_index(std::size_t cell) const { return cell / azimuths_.size(); }

  SphericalDirection direction(std::size_t cell) const;
  const SteeringVector& steering(std::size_t cell) const { return steering_.at(cell); }

  // Exact lookup for on-grid directions (within 1e-6 degrees).
  std::optional<std::size_t> find(const SphericalDirection& d) const;
  // Cell whose steering vector best matches the direction.
  std::size_t nearest(const SphericalDirection& d) const;

 private:
  std::vector<double> azimuths_;
  std::vector<double> elevations_;
  double resolution_;
  bool azimuth_circular_;
  std::vector<SteeringVector> steering_;
};

// Grid cells at every multiple of resolution. An azimuth range spanning a full
// 360 degrees is treated as half-open and circular ([-180, 180) gives 36 cells
// at 10 degrees); otherwise both ranges are inclusive. Throws when resolution
// does not divide a range.
DoaGrid build_grid(AngleRange azimuth, AngleRange elevation, double resolution);

// Azimuth [-180, 180), elevation [-40, 40], 10 degree cells: 36 x 9 = 324.
DoaGrid default_task_grid();

// Plane-wave encoding of a mono signal: channel c = mono * encoding gain c.
AudioClip encode_foa(std::span<const double> mono, const SphericalDirection& d,
                     double sample_rate);

}  // namespace seld

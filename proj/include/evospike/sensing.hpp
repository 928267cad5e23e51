#pragma once

#include <array>
#include <cmath>

#include "evospike/errors.hpp"

namespace evospike {

constexpr int kNumRays = 7;
constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Seven equidistant vision rays spanning 36 degrees, centers at
// -18,-12,...,18 degrees, each with a triangular receptive field of
// half-width 6 degrees so adjacent fields overlap at the edges.
struct RayConfig {
  double spacing_deg = 6.0;
  double half_width_deg = 6.0;

  double center_rad(int ray) const {
    return deg_to_rad((ray - (kNumRays - 1) / 2) * spacing_deg);
  }
  double half_width_rad() const { return deg_to_rad(half_width_deg); }

  void validate() const {
    if (!(spacing_deg > 0.0) || !(half_width_deg > 0.0)) {
      throw ConfigError("rays: spacing and half-width must be positive");
    }
  }
};

// Ray activations for pole angle theta (radians). Piecewise linear in
// theta, maximal (1.0) exactly at a ray center, zero beyond the receptive
// half-width; all zeros once the pole leaves the sensory range.
inline std::array<double, kNumRays> sense(double theta, const RayConfig& rc) {
  std::array<double, kNumRays> activations{};
  const double w = rc.half_width_rad();
  for (int j = 0; j < kNumRays; ++j) {
    const double dist = std::abs(theta - rc.center_rad(j));
    activations[j] = dist >= w ? 0.0 : 1.0 - dist / w;
  }
  return activations;
}

}  // namespace evospike

#pragma once

#include <cmath>
#include <string>

#include "evospike/errors.hpp"

namespace evospike {

// Physical state of the agent with the pole attached to its center.
struct CartPoleState {
  double x = 0.0;      // agent position, length units
  double v = 0.0;      // agent velocity
  double theta = 0.0;  // pole angle from vertical, radians
  double omega = 0.0;  // pole angular velocity, radians per time unit

  bool finite() const {
    return std::isfinite(x) && std::isfinite(v) && std::isfinite(theta) &&
           std::isfinite(omega);
  }
};

// Benchmark constants: cart 1.0, pole 0.1, half-length 0.5, g 9.8, track
// friction 0.0005, pivot friction 2e-6, force limit 10, track length 45,
// Euler step 0.01.
struct PhysicsParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double gravity = 9.8;
  double cart_friction = 0.0005;
  double pivot_friction = 0.000002;
  double f_max = 10.0;
  double track_length = 45.0;
  double dt = 0.01;

  double total_mass() const { return cart_mass + pole_mass; }
  double half_track() const { return track_length / 2.0; }

  void validate() const {
    if (!(cart_mass > 0.0 && pole_mass > 0.0 && pole_half_length > 0.0)) {
      throw ConfigError("physics: masses and lengths must be positive");
    }
    if (!(dt > 0.0)) throw ConfigError("physics: dt must be positive");
    if (!(track_length > 0.0)) {
      throw ConfigError("physics: track length must be positive");
    }
  }
};

namespace detail {
inline double sign_of(double z) { return (z > 0.0) - (z < 0.0); }
}  // namespace detail

// One forward-Euler step of the cart-pole equations: the pole is a uniform
// rod pivoting on the agent (hence the 4/3 inertia factor), with Coulomb
// track friction and viscous pivot friction. Positions integrate with the
// incoming velocities.
inline CartPoleState physics_step(const CartPoleState& s, double force,
                                  const PhysicsParams& p) {
  const double sin_t = std::sin(s.theta);
  const double cos_t = std::cos(s.theta);
  const double m_total = p.total_mass();
  const double ml = p.pole_mass * p.pole_half_length;

  const double theta_acc =
      (p.gravity * sin_t +
       cos_t * ((-force - ml * s.omega * s.omega * sin_t +
                 p.cart_friction * detail::sign_of(s.v)) /
                m_total) -
       p.pivot_friction * s.omega / ml) /
      (p.pole_half_length *
       (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / m_total));

  const double x_acc = (force +
                        ml * (s.omega * s.omega * sin_t - theta_acc * cos_t) -
                        p.cart_friction * detail::sign_of(s.v)) /
                       m_total;

  CartPoleState out;
  out.x = s.x + p.dt * s.v;
  out.v = s.v + p.dt * x_acc;
  out.theta = s.theta + p.dt * s.omega;
  out.omega = s.omega + p.dt * theta_acc;
  if (!out.finite()) {
    throw NumericError("physics_step: state diverged (x=" +
                       std::to_string(out.x) + ", theta=" +
                       std::to_string(out.theta) + ")");
  }
  return out;
}

}  // namespace evospike

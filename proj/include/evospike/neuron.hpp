#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "evospike/errors.hpp"

namespace evospike {

// Membrane potential peak; reaching it triggers the reset.
constexpr double kSpikeThresholdMv = 30.0;

// Intrinsic parameters of the two-variable spiking neuron model:
//   v' = 0.04 v^2 + 5 v + 140 - u + I
//   u' = a (b v - u)
//   if v >= 30 mV: v <- c, u <- u + d
struct IzhikevichParams {
  double a = 0.02;  // recovery time scale
  double b = 0.2;   // recovery sensitivity
  double c = -65.0; // post-spike reset potential, mV
  double d = 8.0;   // post-spike recovery increment
  bool excitatory = true;

  double sign() const { return excitatory ? 1.0 : -1.0; }
};

struct NeuronState {
  double v = -65.0; // membrane potential, mV
  double u = -13.0; // recovery variable
  bool fired = false;
};

// Resting state for given intrinsic parameters: v = c, u = b*c. Used as the
// deterministic initial condition of every simulation.
inline NeuronState resting_state(const IzhikevichParams& p) {
  return NeuronState{p.c, p.b * p.c, false};
}

// One forward-Euler step. Both derivatives are evaluated at the incoming
// state; the threshold test applies to the advanced potential, so post-step
// v is always strictly below the peak.
inline NeuronState neuron_step(const NeuronState& s, const IzhikevichParams& p,
                               double input_current, double dt) {
  if (!std::isfinite(s.v) || !std::isfinite(s.u) ||
      !std::isfinite(input_current)) {
    throw NumericError("neuron_step: non-finite state or input (v=" +
                       std::to_string(s.v) + ", u=" + std::to_string(s.u) +
                       ", I=" + std::to_string(input_current) + ")");
  }
  NeuronState out;
  const double v = s.v;
  const double u = s.u;
  const double v_next = v + dt * (0.04 * v * v + 5.0 * v + 140.0 - u + input_current);
  const double u_next = u + dt * (p.a * (p.b * v - u));
  if (!std::isfinite(v_next) || !std::isfinite(u_next)) {
    throw NumericError("neuron_step: state diverged");
  }
  if (v_next >= kSpikeThresholdMv) {
    out.v = p.c;
    out.u = u_next + p.d;
    out.fired = true;
  } else {
    out.v = v_next;
    out.u = u_next;
    out.fired = false;
  }
  return out;
}

// Fixed-capacity circular record of the most recent binary spike outputs.
// Starts zero-filled, so the rate code reads 0 during warm-up.
class SpikeHistory {
 public:
  SpikeHistory() : SpikeHistory(1) {}
  explicit SpikeHistory(int capacity)
      : ring_(static_cast<std::size_t>(capacity > 0 ? capacity : 1), 0) {
    if (capacity < 1) throw ConfigError("SpikeHistory: capacity must be >= 1");
  }

  int capacity() const { return static_cast<int>(ring_.size()); }

  void push(bool fired) {
    const std::uint8_t bit = fired ? 1 : 0;
    sum_ += bit - ring_[pos_];
    ring_[pos_] = bit;
    pos_ = (pos_ + 1 == ring_.size()) ? 0 : pos_ + 1;
  }

  // Spike bit recorded `age` pushes ago (age 0 = most recent).
  bool at_age(int age) const {
    const std::size_t n = ring_.size();
    std::size_t idx = (pos_ + n - 1 - static_cast<std::size_t>(age) % n) % n;
    return ring_[idx] != 0;
  }

  // Sum over the whole window; exact (integer accumulator).
  long sum() const { return sum_; }

 private:
  std::vector<std::uint8_t> ring_;
  std::size_t pos_ = 0;
  long sum_ = 0;
};

// Moving-average rate code: mean of the most recent h spike indicators.
// O(1) for the full window, O(h) otherwise.
inline double rate_code(const SpikeHistory& history, int h) {
  if (h < 1) throw ConfigError("rate_code: window must be >= 1");
  if (h > history.capacity()) {
    throw ConfigError("rate_code: window " + std::to_string(h) +
                      " exceeds history capacity " +
                      std::to_string(history.capacity()));
  }
  if (h == history.capacity()) {
    return static_cast<double>(history.sum()) / h;
  }
  long s = 0;
  for (int age = 0; age < h; ++age) s += history.at_age(age) ? 1 : 0;
  return static_cast<double>(s) / h;
}

}  // namespace evospike

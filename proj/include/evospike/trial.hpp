#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evospike/cartpole.hpp"
#include "evospike/errors.hpp"
#include "evospike/network.hpp"
#include "evospike/sensing.hpp"

namespace evospike {

struct TrialConfig {
  double theta0 = 0.0;     // initial pole angle, radians
  double omega0 = 0.0;     // initial angular velocity, radians / time unit
  double duration = 500.0; // time units
  bool record = false;

  static TrialConfig from_degrees(double theta0_deg, double omega0,
                                  double duration = 500.0,
                                  bool record = false) {
    return TrialConfig{deg_to_rad(theta0_deg), omega0, duration, record};
  }
};

// Per-timestep recording of environment variables and every network
// element. Rows are aligned at sensing time: the environment columns hold
// the state the rays saw, the network columns hold the controller's
// response to it, and `force` is what was applied to reach the next state.
struct Trace {
  std::vector<std::string> channels;
  std::vector<std::vector<double>> data;  // data[channel][row]
  double theta0 = 0.0;
  double omega0 = 0.0;
  double duration = 0.0;
  double dt = 0.0;
  double fitness = 0.0;

  static std::vector<std::string> channel_names(int num_interneurons) {
    std::vector<std::string> names = {"theta", "omega", "x", "v"};
    for (int j = 1; j <= kNumRays; ++j) names.push_back("S" + std::to_string(j));
    for (int i = 1; i <= num_interneurons; ++i) names.push_back("V" + std::to_string(i));
    for (int i = 1; i <= num_interneurons; ++i) names.push_back("spike" + std::to_string(i));
    for (int i = 1; i <= num_interneurons; ++i) names.push_back("R" + std::to_string(i));
    names.push_back("M1");
    names.push_back("M2");
    names.push_back("force");
    return names;
  }

  std::size_t rows() const { return channels.empty() ? 0 : data[0].size(); }

  int channel_index(const std::string& name) const {
    for (std::size_t i = 0; i < channels.size(); ++i) {
      if (channels[i] == name) return static_cast<int>(i);
    }
    return -1;
  }

  const std::vector<double>& channel(const std::string& name) const {
    const int idx = channel_index(name);
    if (idx < 0) throw IoError("trace is missing channel '" + name + "'");
    return data[static_cast<std::size_t>(idx)];
  }
};

// Kahan-compensated mean of cos(theta) over a fixed nominal step count.
// Early termination forfeits the remaining reward because the divisor stays
// at the full count.
class FitnessAccumulator {
 public:
  explicit FitnessAccumulator(long total_steps) : total_steps_(total_steps) {}

  void add_angle(double theta) {
    const double term = std::cos(theta) - compensation_;
    const double next = sum_ + term;
    compensation_ = (next - sum_) - term;
    sum_ = next;
  }

  double value() const { return sum_ / static_cast<double>(total_steps_); }

 private:
  long total_steps_;
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct TrialResult {
  double fitness = 0.0;
  long steps_executed = 0;
  bool terminated_early = false;
  std::optional<Trace> trace;
};

// Runs one closed-loop trial: sense -> controller_step -> physics_step each
// step. Terminates early when the agent leaves the track (|x| > L/2) or the
// pole passes horizontal (|theta| >= 90 degrees).
inline TrialResult run_trial(const NetworkParams& np, const TrialConfig& tc,
                             const PhysicsParams& pp,
                             const RayConfig& rc = RayConfig{}) {
  pp.validate();
  rc.validate();
  if (!(tc.duration > 0.0)) throw ConfigError("trial: duration must be > 0");

  const long total_steps = std::lround(tc.duration / pp.dt);
  const double half_track = pp.half_track();
  const double theta_limit = kPi / 2.0;

  CartPoleState s;
  s.theta = tc.theta0;
  s.omega = tc.omega0;
  ControllerState cs = make_controller_state(np);
  FitnessAccumulator acc(total_steps);

  TrialResult result;
  if (tc.record) {
    Trace trace;
    trace.channels = Trace::channel_names(np.num_interneurons);
    trace.data.assign(trace.channels.size(), {});
    for (auto& col : trace.data) col.reserve(static_cast<std::size_t>(total_steps));
    trace.theta0 = tc.theta0;
    trace.omega0 = tc.omega0;
    trace.duration = tc.duration;
    trace.dt = pp.dt;
    result.trace = std::move(trace);
  }

  try {
    for (long step = 0; step < total_steps; ++step) {
      const std::array<double, kNumRays> sensors = sense(s.theta, rc);
      const double force = controller_step(cs, np, sensors, pp.f_max);

      if (result.trace) {
        Trace& tr = *result.trace;
        std::size_t col = 0;
        tr.data[col++].push_back(s.theta);
        tr.data[col++].push_back(s.omega);
        tr.data[col++].push_back(s.x);
        tr.data[col++].push_back(s.v);
        for (int j = 0; j < kNumRays; ++j) tr.data[col++].push_back(sensors[j]);
        for (int i = 0; i < np.num_interneurons; ++i)
          tr.data[col++].push_back(cs.neurons[i].v);
        for (int i = 0; i < np.num_interneurons; ++i)
          tr.data[col++].push_back(cs.neurons[i].fired ? 1.0 : 0.0);
        for (int i = 0; i < np.num_interneurons; ++i)
          tr.data[col++].push_back(cs.rates[i]);
        tr.data[col++].push_back(cs.motor[0]);
        tr.data[col++].push_back(cs.motor[1]);
        tr.data[col++].push_back(force);
      }

      s = physics_step(s, force, pp);
      acc.add_angle(s.theta);
      result.steps_executed = step + 1;
      if (std::abs(s.x) > half_track || std::abs(s.theta) >= theta_limit) {
        result.terminated_early = true;
        break;
      }
    }
  } catch (const NumericError& e) {
    throw NumericError("trial (theta0=" + std::to_string(rad_to_deg(tc.theta0)) +
                       " deg, omega0=" + std::to_string(tc.omega0) +
                       ", step " + std::to_string(result.steps_executed) +
                       "): " + e.what());
  }

  result.fitness = acc.value();
  if (result.trace) result.trace->fitness = result.fitness;
  return result;
}

// The 16 canonical evaluation conditions: theta0 in {+-3,+-6,+-9,+-12}
// degrees crossed with omega0 = +-0.001.
inline std::vector<TrialConfig> canonical_trials(double duration = 500.0,
                                                 bool record = false) {
  std::vector<TrialConfig> trials;
  for (double theta_deg : {-12.0, -9.0, -6.0, -3.0, 3.0, 6.0, 9.0, 12.0}) {
    for (double omega0 : {-0.001, 0.001}) {
      trials.push_back(TrialConfig::from_degrees(theta_deg, omega0, duration, record));
    }
  }
  return trials;
}

// Mean trial fitness over the canonical 16 conditions.
inline double evaluate_fitness(const NetworkParams& np, const PhysicsParams& pp,
                               const RayConfig& rc = RayConfig{},
                               double duration = 500.0) {
  const std::vector<TrialConfig> trials = canonical_trials(duration);
  double sum = 0.0;
  for (const TrialConfig& tc : trials) {
    sum += run_trial(np, tc, pp, rc).fitness;
  }
  return sum / static_cast<double>(trials.size());
}

struct GridSpec {
  double theta_min_deg = -45.0;
  double theta_max_deg = 45.0;
  int theta_resolution = 31;
  double omega_min = -0.01;
  double omega_max = 0.01;
  int omega_resolution = 21;

  void validate() const {
    if (theta_resolution < 2 || omega_resolution < 2) {
      throw ConfigError("grid: resolution must be >= 2 per axis");
    }
    if (!(theta_max_deg > theta_min_deg) || !(omega_max > omega_min)) {
      throw ConfigError("grid: axis ranges must be non-degenerate");
    }
  }
};

struct GridResult {
  std::vector<double> theta0_deg;
  std::vector<double> omega0;
  std::vector<double> fitness;  // row-major: [theta index][omega index]
  std::vector<bool> trained;    // cell coincides with a canonical condition

  double& at(int ti, int oi) {
    return fitness[static_cast<std::size_t>(ti) * omega0.size() + oi];
  }
  double at(int ti, int oi) const {
    return fitness[static_cast<std::size_t>(ti) * omega0.size() + oi];
  }
};

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  }
  return xs;
}

inline bool is_training_condition(double theta0_deg, double omega0) {
  for (double c : {-12.0, -9.0, -6.0, -3.0, 3.0, 6.0, 9.0, 12.0}) {
    if (std::abs(theta0_deg - c) <= 1e-9) {
      for (double w : {-0.001, 0.001}) {
        if (std::abs(omega0 - w) <= 1e-12) return true;
      }
    }
  }
  return false;
}

// Single-trial fitness over a grid of initial conditions (the broader,
// finer-grained sweep used post-optimization). Row-major over theta.
inline GridResult generalization_grid(const NetworkParams& np,
                                      const GridSpec& spec,
                                      const PhysicsParams& pp,
                                      const RayConfig& rc = RayConfig{},
                                      double duration = 500.0) {
  spec.validate();
  GridResult grid;
  grid.theta0_deg = linspace(spec.theta_min_deg, spec.theta_max_deg,
                             spec.theta_resolution);
  grid.omega0 = linspace(spec.omega_min, spec.omega_max, spec.omega_resolution);
  grid.fitness.assign(grid.theta0_deg.size() * grid.omega0.size(), 0.0);
  grid.trained.assign(grid.fitness.size(), false);
  for (std::size_t ti = 0; ti < grid.theta0_deg.size(); ++ti) {
    for (std::size_t oi = 0; oi < grid.omega0.size(); ++oi) {
      const TrialConfig tc = TrialConfig::from_degrees(
          grid.theta0_deg[ti], grid.omega0[oi], duration);
      grid.fitness[ti * grid.omega0.size() + oi] = run_trial(np, tc, pp, rc).fitness;
      grid.trained[ti * grid.omega0.size() + oi] =
          is_training_condition(grid.theta0_deg[ti], grid.omega0[oi]);
    }
  }
  return grid;
}

}  // namespace evospike

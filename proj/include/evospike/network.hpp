#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "evospike/errors.hpp"
#include "evospike/genotype.hpp"
#include "evospike/neuron.hpp"

namespace evospike {

// Parameter ranges used when decoding a genotype. The weight, bias and
// time-constant ranges are fixed by the task; the gain range and rate-window
// ceiling are implementation choices and stay configurable. The window
// ceiling is kept well below the pole's fall time (~25 control steps per
// e-fold) so every decodable controller can react within a fraction of it.
struct DecodeRanges {
  double weight_limit = 50.0;  // |w| <= 50 for all connections
  double tau_min = 1.0;
  double tau_max = 2.0;
  double bias_limit = 4.0;  // bias in [-4, 4]
  double gain_min = 1.0;
  double gain_max = 5.0;
  int rate_window_max = 10;  // h in [1, rate_window_max] control steps
};

// The controller's internal clock. The spiking model's coefficients are
// calibrated in the neuron's native time unit, which is far finer than the
// task's integration step: each control step advances every interneuron by
// kNeuronSubsteps Euler substeps of kNeuronSubstep native units with the
// synaptic drive held constant, and the step's spike output reports whether
// the neuron fired during any substep. Motor units integrate once per
// control step with a unit step, so their time constants are expressed in
// control steps. Keeping the neural clock this much faster than the body's
// is what lets a rate-coded readout steer a pole whose instability e-folds
// in ~25 control steps.
constexpr int kNeuronSubsteps = 4;
constexpr double kNeuronSubstep = 1.0;

struct MotorParams {
  double tau = 1.0;
  double bias = 0.0;
  double gain = 1.0;
};

// Decoded network parameters for a 7 -> N -> 2 controller.
struct NetworkParams {
  int num_interneurons = 2;
  // sensor_weights[i][j]: sensor j -> interneuron i
  std::vector<std::array<double, GenotypeLayout::num_sensors>> sensor_weights;
  // recurrent_weights[i][j]: interneuron j -> interneuron i (self loops allowed)
  std::vector<std::vector<double>> recurrent_weights;
  // motor_weights[m][j]: interneuron j -> motor unit m
  std::array<std::vector<double>, 2> motor_weights;
  std::vector<IzhikevichParams> neurons;
  std::vector<int> rate_windows;  // per-neuron moving-average length, steps
  std::array<MotorParams, 2> motors;
};

namespace detail {
inline double lerp_unit(double gene, double lo, double hi) {
  return lo + gene * (hi - lo);
}
}  // namespace detail

// Maps a normalized genotype onto network parameters. Total on [0,1]^len:
// every gene vector yields valid parameters. Outgoing weights of an
// interneuron take their magnitude from the weight gene and their sign from
// the neuron's polarity flag.
inline NetworkParams decode(const Genotype& g,
                            const DecodeRanges& ranges = DecodeRanges{}) {
  g.validate();
  const GenotypeLayout& lay = g.layout;
  const int n = lay.num_interneurons;
  NetworkParams p;
  p.num_interneurons = n;

  std::vector<bool> excitatory(n);
  for (int i = 0; i < n; ++i) {
    excitatory[i] = g.genes[lay.flag_gene(i)] >= 0.5;
  }

  p.sensor_weights.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < GenotypeLayout::num_sensors; ++j) {
      p.sensor_weights[i][j] =
          detail::lerp_unit(g.genes[lay.sensor_weight_gene(i, j)],
                            -ranges.weight_limit, ranges.weight_limit);
    }
  }

  p.recurrent_weights.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double raw =
          detail::lerp_unit(g.genes[lay.recurrent_weight_gene(i, j)],
                            -ranges.weight_limit, ranges.weight_limit);
      p.recurrent_weights[i][j] = (excitatory[j] ? 1.0 : -1.0) * std::abs(raw);
    }
  }

  for (int m = 0; m < GenotypeLayout::num_motors; ++m) {
    p.motor_weights[m].assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
      const double raw =
          detail::lerp_unit(g.genes[lay.motor_weight_gene(m, j)],
                            -ranges.weight_limit, ranges.weight_limit);
      p.motor_weights[m][j] = (excitatory[j] ? 1.0 : -1.0) * std::abs(raw);
    }
  }

  p.neurons.resize(n);
  for (int i = 0; i < n; ++i) {
    const double ra = g.genes[lay.intrinsic_gene(i, 0)];
    const double rb = g.genes[lay.intrinsic_gene(i, 1)];
    const double rc = g.genes[lay.intrinsic_gene(i, 2)];
    const double rd = g.genes[lay.intrinsic_gene(i, 3)];
    IzhikevichParams& np = p.neurons[i];
    np.excitatory = excitatory[i];
    if (excitatory[i]) {
      // regular spiking .. chattering family
      np.a = 0.02;
      np.b = 0.2;
      np.c = -65.0 + 15.0 * rc * rc;
      np.d = 8.0 - 6.0 * rd * rd;
    } else {
      // fast spiking .. low-threshold spiking family
      np.a = 0.02 + 0.08 * ra;
      np.b = 0.25 - 0.05 * rb;
      np.c = -65.0;
      np.d = 2.0;
    }
  }

  p.rate_windows.resize(n);
  for (int i = 0; i < n; ++i) {
    const double gene = g.genes[lay.window_gene(i)];
    const int h = 1 + static_cast<int>(std::lround(gene * (ranges.rate_window_max - 1)));
    p.rate_windows[i] = std::min(std::max(h, 1), ranges.rate_window_max);
  }

  for (int m = 0; m < GenotypeLayout::num_motors; ++m) {
    p.motors[m].tau = detail::lerp_unit(g.genes[lay.motor_gene(m, 0)],
                                        ranges.tau_min, ranges.tau_max);
    p.motors[m].bias = detail::lerp_unit(g.genes[lay.motor_gene(m, 1)],
                                         -ranges.bias_limit, ranges.bias_limit);
    p.motors[m].gain = detail::lerp_unit(g.genes[lay.motor_gene(m, 2)],
                                         ranges.gain_min, ranges.gain_max);
  }
  return p;
}

// Per-step dynamical state of a controller instance.
struct ControllerState {
  std::vector<NeuronState> neurons;
  std::vector<SpikeHistory> histories;
  std::vector<double> rates;         // last computed rate codes
  std::array<double, 2> motor{0.0, 0.0};
};

inline ControllerState make_controller_state(const NetworkParams& p) {
  ControllerState s;
  s.neurons.reserve(p.num_interneurons);
  s.histories.reserve(p.num_interneurons);
  for (int i = 0; i < p.num_interneurons; ++i) {
    s.neurons.push_back(resting_state(p.neurons[i]));
    s.histories.emplace_back(p.rate_windows[i]);
  }
  s.rates.assign(p.num_interneurons, 0.0);
  return s;
}

// Total synaptic drive into interneuron i: weighted sensory input plus the
// recurrent contribution of the previous step's spike outputs.
inline double sum_synaptic_input(
    const std::array<double, GenotypeLayout::num_sensors>& sensors,
    const std::vector<bool>& prev_spikes, const NetworkParams& p, int i) {
  double drive = 0.0;
  for (int j = 0; j < GenotypeLayout::num_sensors; ++j) {
    drive += p.sensor_weights[i][j] * sensors[j];
  }
  for (int j = 0; j < p.num_interneurons; ++j) {
    drive += p.recurrent_weights[i][j] * (prev_spikes[j] ? 1.0 : 0.0);
  }
  return drive;
}

// Euler step of the leaky motor unit: tau m' = -m + sum_j w_mj r_j.
inline double motor_step(double m, const std::vector<double>& rates,
                         const NetworkParams& p, int motor_index, double dt) {
  double drive = 0.0;
  for (int j = 0; j < p.num_interneurons; ++j) {
    drive += p.motor_weights[motor_index][j] * rates[j];
  }
  return m + dt * (-m + drive) / p.motors[motor_index].tau;
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Advances the whole controller by one control step and returns the net
// force: synaptic summation -> spiking substeps -> history push -> rate
// code -> motor integration -> sigmoidal motor outputs differenced and
// scaled by f_max. The recurrent term sees the previous step's spike
// outputs (synchronous update), so the result is independent of neuron
// iteration order.
inline double controller_step(
    ControllerState& state, const NetworkParams& p,
    const std::array<double, GenotypeLayout::num_sensors>& sensors,
    double f_max) {
  const int n = p.num_interneurons;

  double drives[2];
  std::vector<double> drives_dyn;
  double* drive = drives;
  if (n > 2) {
    drives_dyn.resize(static_cast<std::size_t>(n));
    drive = drives_dyn.data();
  }
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < GenotypeLayout::num_sensors; ++j) {
      acc += p.sensor_weights[i][j] * sensors[j];
    }
    for (int j = 0; j < n; ++j) {
      if (state.neurons[j].fired) acc += p.recurrent_weights[i][j];
    }
    drive[i] = acc;
  }

  for (int i = 0; i < n; ++i) {
    bool fired = false;
    for (int k = 0; k < kNeuronSubsteps; ++k) {
      state.neurons[i] =
          neuron_step(state.neurons[i], p.neurons[i], drive[i], kNeuronSubstep);
      fired = fired || state.neurons[i].fired;
    }
    state.neurons[i].fired = fired;
    state.histories[i].push(fired);
    state.rates[i] = static_cast<double>(state.histories[i].sum()) /
                     state.histories[i].capacity();
  }

  for (int m = 0; m < GenotypeLayout::num_motors; ++m) {
    state.motor[m] = motor_step(state.motor[m], state.rates, p, m, 1.0);
    if (!std::isfinite(state.motor[m])) {
      throw NumericError("controller_step: motor state diverged");
    }
  }

  const double out1 =
      logistic(p.motors[0].gain * (state.motor[0] + p.motors[0].bias));
  const double out2 =
      logistic(p.motors[1].gain * (state.motor[1] + p.motors[1].bias));
  return f_max * (out1 - out2);
}

}  // namespace evospike

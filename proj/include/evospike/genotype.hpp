#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "evospike/errors.hpp"

namespace evospike {

// Positional layout of the normalized genotype for a 7 -> N -> 2 network.
// All genes live in [0,1]; decoding maps them onto parameter ranges.
//
// Block order (N = interneuron count, 7 sensors, 2 motor units):
//   [0, 7N)            sensor->interneuron weights, neuron-major
//   [7N, 7N+N^2)       recurrent weights, destination-major (w from j to i)
//   [.., +2N)          interneuron->motor weights, motor-major
//   [.., +4N)          intrinsic genes, (r_a, r_b, r_c, r_d) per neuron
//   [.., +N)           rate-window genes
//   [.., +6)           motor genes, (tau, bias, gain) per motor unit
//   [.., +N)           excitatory/inhibitory flag genes (>= 0.5 = excitatory)
struct GenotypeLayout {
  int num_interneurons = 2;
  static constexpr int num_sensors = 7;
  static constexpr int num_motors = 2;

  int sensor_weights_offset() const { return 0; }
  int recurrent_weights_offset() const { return num_sensors * num_interneurons; }
  int motor_weights_offset() const {
    return recurrent_weights_offset() + num_interneurons * num_interneurons;
  }
  int intrinsic_offset() const {
    return motor_weights_offset() + num_motors * num_interneurons;
  }
  int window_offset() const { return intrinsic_offset() + 4 * num_interneurons; }
  int motor_genes_offset() const { return window_offset() + num_interneurons; }
  int flag_offset() const { return motor_genes_offset() + 3 * num_motors; }
  int size() const { return flag_offset() + num_interneurons; }

  int sensor_weight_gene(int neuron, int sensor) const {
    return sensor_weights_offset() + neuron * num_sensors + sensor;
  }
  int recurrent_weight_gene(int to, int from) const {
    return recurrent_weights_offset() + to * num_interneurons + from;
  }
  int motor_weight_gene(int motor, int from) const {
    return motor_weights_offset() + motor * num_interneurons + from;
  }
  int intrinsic_gene(int neuron, int which) const {
    return intrinsic_offset() + 4 * neuron + which;
  }
  int window_gene(int neuron) const { return window_offset() + neuron; }
  int motor_gene(int motor, int which) const {
    return motor_genes_offset() + 3 * motor + which;
  }
  int flag_gene(int neuron) const { return flag_offset() + neuron; }

  std::vector<int> flag_gene_indices() const {
    std::vector<int> idx;
    for (int i = 0; i < num_interneurons; ++i) idx.push_back(flag_gene(i));
    return idx;
  }
};

// Normalized real-valued genotype. Fixed length for a given layout; every
// gene is kept in [0,1].
struct Genotype {
  std::vector<double> genes;
  GenotypeLayout layout;

  Genotype() = default;
  explicit Genotype(GenotypeLayout lay)
      : genes(static_cast<std::size_t>(lay.size()), 0.0), layout(lay) {}
  Genotype(std::vector<double> g, GenotypeLayout lay)
      : genes(std::move(g)), layout(lay) {
    validate();
  }

  void validate() const {
    if (static_cast<int>(genes.size()) != layout.size()) {
      throw EncodingError("genotype has " + std::to_string(genes.size()) +
                          " genes; layout for N=" +
                          std::to_string(layout.num_interneurons) +
                          " requires " + std::to_string(layout.size()));
    }
    for (std::size_t i = 0; i < genes.size(); ++i) {
      const double g = genes[i];
      if (!(g >= 0.0 && g <= 1.0)) {
        throw EncodingError("gene " + std::to_string(i) +
                            " out of [0,1]: " + std::to_string(g));
      }
    }
  }
};

inline Genotype random_genotype(const GenotypeLayout& layout,
                                std::mt19937_64& rng) {
  Genotype g(layout);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& gene : g.genes) gene = unit(rng);
  return g;
}

}  // namespace evospike

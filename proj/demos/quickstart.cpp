// Minimal end-to-end walk through the library: evolve a small controller
// on short trials, re-evaluate the champion, and measure how much each
// network element knows about the pole angle.

#include <cstdio>

#include <evospike/evospike.hpp>

using namespace evospike;

int main() {
  // Short trials keep the demo quick; real experiments use duration 500.
  ExperimentConfig cfg;
  cfg.seed = 7;
  cfg.trial_duration = 10.0;
  cfg.ea.population_size = 40;
  cfg.ea.generations = 15;
  cfg.ea.target_fitness = 0.95;

  const FitnessFunction fitness = [&](const Genotype& g) {
    return evaluate_fitness(decode(g), cfg.physics, cfg.rays,
                            cfg.trial_duration);
  };

  EAConfig ea = cfg.ea;
  ea.master_seed = cfg.seed;
  const EvolutionResult result = run_evolution(
      ea, cfg.layout(), fitness,
      [](const GenerationStats& s, const Individual& best, const Population&) {
        std::printf("gen %3d  best %.4f  so-far %.4f  mean %+.4f\n",
                    s.generation, s.best, best.fitness, s.mean);
      });
  std::printf("champion fitness (10s trials): %.4f\n", result.best.fitness);

  // Record one trial and ask how much the membrane potentials, spikes, and
  // rates tell us about the pole angle.
  const NetworkParams np = decode(result.best.genotype);
  const TrialConfig tc = TrialConfig::from_degrees(6.0, 0.001, 10.0, true);
  const TrialResult trial = run_trial(np, tc, cfg.physics, cfg.rays);
  const Trace& trace = *trial.trace;

  const BinnedSeries theta = bin_series(trace.channel("theta"));
  for (const char* name : {"V1", "spike1", "R1", "M1"}) {
    const BinnedSeries elem = bin_series(trace.channel(name));
    std::printf("MI(%s; theta) = %.4f bits\n", name,
                mutual_information_bits(elem, theta));
  }
  return 0;
}

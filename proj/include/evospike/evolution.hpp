#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "evospike/errors.hpp"
#include "evospike/genotype.hpp"
#include "evospike/parallel.hpp"
#include "evospike/rng.hpp"

namespace evospike {

struct Individual {
  Genotype genotype;
  double fitness = 0.0;
  bool evaluated = false;
};

using Population = std::vector<Individual>;

struct EAConfig {
  int population_size = 100;
  int generations = 100;
  double elite_fraction = 0.1;
  int tournament_size = 3;
  double crossover_prob = 0.5;
  double mutation_stddev = 0.05;   // in normalized gene space
  double mutation_prob = 0.3;      // per continuous gene
  double flag_redraw_prob = 0.05;  // polarity flags re-draw instead of jitter
  // Stop once the best fitness reaches this value; +inf disables.
  double target_fitness = std::numeric_limits<double>::infinity();
  std::uint64_t master_seed = 1;
  int workers = 1;

  void validate() const {
    if (population_size < 2) throw ConfigError("ea: population must be >= 2");
    if (generations < 0) throw ConfigError("ea: generations must be >= 0");
    if (!(elite_fraction >= 0.0 && elite_fraction <= 1.0)) {
      throw ConfigError("ea: elite_fraction must be in [0,1]");
    }
    if (tournament_size < 1) throw ConfigError("ea: tournament size must be >= 1");
    if (!(mutation_stddev >= 0.0)) throw ConfigError("ea: mutation_stddev must be >= 0");
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) {
      throw ConfigError("ea: crossover_prob must be in [0,1]");
    }
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
      throw ConfigError("ea: mutation_prob must be in [0,1]");
    }
    if (!(flag_redraw_prob >= 0.0 && flag_redraw_prob <= 1.0)) {
      throw ConfigError("ea: flag_redraw_prob must be in [0,1]");
    }
  }
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  int evaluations = 0;  // fitness calls spent this generation
  int diverged = 0;     // individuals scored -1 after numerical divergence
};

using FitnessFunction = std::function<double(const Genotype&)>;

inline Population init_population(const EAConfig& cfg,
                                  const GenotypeLayout& layout) {
  cfg.validate();
  std::mt19937_64 rng =
      make_rng(cfg.master_seed, {rng_stream::init_population});
  Population pop;
  pop.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int i = 0; i < cfg.population_size; ++i) {
    pop.push_back(Individual{random_genotype(layout, rng), 0.0, false});
  }
  return pop;
}

namespace detail {

// Evaluates every unevaluated individual in parallel. Evaluation is pure,
// so slot-indexed writes keep the result independent of worker count.
// Divergent simulations are scored at the fitness floor instead of
// aborting the run.
inline void evaluate_population(Population& pop, const FitnessFunction& evaluate,
                                int workers, int& evaluations, int& diverged) {
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (!pop[i].evaluated) todo.push_back(i);
  }
  std::vector<int> diverged_flags(todo.size(), 0);
  parallel_for(todo.size(), workers, [&](std::size_t k) {
    Individual& ind = pop[todo[k]];
    try {
      ind.fitness = evaluate(ind.genotype);
    } catch (const NumericError&) {
      ind.fitness = -1.0;
      diverged_flags[k] = 1;
    }
    ind.evaluated = true;
  });
  evaluations = static_cast<int>(todo.size());
  diverged = std::accumulate(diverged_flags.begin(), diverged_flags.end(), 0);
}

// Indices sorted by fitness, best first; ties broken by index so the order
// never depends on the sort implementation.
inline std::vector<std::size_t> ranked_indices(const Population& pop) {
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pop[a].fitness != pop[b].fitness) return pop[a].fitness > pop[b].fitness;
    return a < b;
  });
  return order;
}

inline std::size_t tournament_pick(const Population& pop, int tournament_size,
                                   std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  std::size_t best = pick(rng);
  for (int k = 1; k < tournament_size; ++k) {
    const std::size_t challenger = pick(rng);
    if (pop[challenger].fitness > pop[best].fitness) best = challenger;
  }
  return best;
}

inline GenerationStats population_stats(const Population& pop, int generation,
                                        int evaluations, int diverged) {
  GenerationStats stats;
  stats.generation = generation;
  stats.evaluations = evaluations;
  stats.diverged = diverged;
  double best = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const Individual& ind : pop) {
    best = std::max(best, ind.fitness);
    sum += ind.fitness;
  }
  stats.best = best;
  stats.mean = sum / static_cast<double>(pop.size());
  double sq = 0.0;
  for (const Individual& ind : pop) {
    const double d = ind.fitness - stats.mean;
    sq += d * d;
  }
  stats.stddev = std::sqrt(sq / static_cast<double>(pop.size()));
  return stats;
}

}  // namespace detail

// Builds the next population from an evaluated one: the elite are copied
// unchanged (fitness kept), the rest come from tournament selection,
// optional uniform crossover, and per-gene Gaussian mutation clipped to
// [0,1]. Polarity flag genes re-draw uniformly with a small probability so
// a neuron can change sign at all. Each offspring slot draws from its own
// (master seed, generation, slot) stream.
inline Population next_generation(const Population& pop, const EAConfig& cfg,
                                  int generation) {
  const std::vector<std::size_t> order = detail::ranked_indices(pop);
  const std::size_t elite_count = std::min(
      pop.size(), static_cast<std::size_t>(
                      std::floor(cfg.elite_fraction * pop.size() + 1e-9)));

  const GenotypeLayout layout = pop.front().genotype.layout;
  std::vector<bool> is_flag(static_cast<std::size_t>(layout.size()), false);
  for (int idx : layout.flag_gene_indices()) {
    is_flag[static_cast<std::size_t>(idx)] = true;
  }

  Population next;
  next.reserve(pop.size());
  for (std::size_t e = 0; e < elite_count; ++e) next.push_back(pop[order[e]]);

  for (std::size_t slot = elite_count; slot < pop.size(); ++slot) {
    std::mt19937_64 rng = make_rng(
        cfg.master_seed,
        {rng_stream::variation, static_cast<std::uint64_t>(generation),
         static_cast<std::uint64_t>(slot)});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    const std::size_t parent_a =
        detail::tournament_pick(pop, cfg.tournament_size, rng);
    Genotype child = pop[parent_a].genotype;
    if (unit(rng) < cfg.crossover_prob) {
      const std::size_t parent_b =
          detail::tournament_pick(pop, cfg.tournament_size, rng);
      const Genotype& other = pop[parent_b].genotype;
      for (std::size_t g = 0; g < child.genes.size(); ++g) {
        if (unit(rng) < 0.5) child.genes[g] = other.genes[g];
      }
    }
    for (std::size_t g = 0; g < child.genes.size(); ++g) {
      if (is_flag[g]) {
        if (unit(rng) < cfg.flag_redraw_prob) child.genes[g] = unit(rng);
      } else if (unit(rng) < cfg.mutation_prob) {
        const double mutated =
            child.genes[g] + cfg.mutation_stddev * noise(rng);
        child.genes[g] = std::clamp(mutated, 0.0, 1.0);
      }
    }
    next.push_back(Individual{std::move(child), 0.0, false});
  }
  return next;
}

// Evaluates the population (unevaluated individuals only) and produces the
// following one, reporting stats of the current generation.
inline std::pair<Population, GenerationStats> step_generation(
    Population pop, const FitnessFunction& evaluate, const EAConfig& cfg,
    int generation) {
  cfg.validate();
  int evaluations = 0;
  int diverged = 0;
  detail::evaluate_population(pop, evaluate, cfg.workers, evaluations, diverged);
  const GenerationStats stats =
      detail::population_stats(pop, generation, evaluations, diverged);
  return {next_generation(pop, cfg, generation + 1), stats};
}

struct EvolutionState {
  Population population;
  int generation = 0;  // index of the generation `population` belongs to
};

struct EvolutionResult {
  Individual best;
  std::vector<GenerationStats> history;
  Population final_population;
};

// Called after each generation is evaluated; used for logging,
// checkpointing, and resume-state persistence.
using GenerationCallback = std::function<void(
    const GenerationStats&, const Individual& best, const Population&)>;

// Runs the full loop: generation 0 is the evaluated initial population,
// then `generations` rounds of selection and variation. Stops early once
// the best fitness reaches cfg.target_fitness. With elitism the
// best-so-far is monotone and always present in the final population.
inline EvolutionResult run_evolution(
    const EAConfig& cfg, const GenotypeLayout& layout,
    const FitnessFunction& evaluate,
    const GenerationCallback& on_generation = {},
    const std::optional<EvolutionState>& resume = std::nullopt) {
  cfg.validate();
  Population pop =
      resume ? resume->population : init_population(cfg, layout);
  int generation = resume ? resume->generation : 0;

  EvolutionResult result;
  result.best.fitness = -std::numeric_limits<double>::infinity();

  auto absorb = [&](const GenerationStats& stats) {
    result.history.push_back(stats);
    for (const Individual& ind : pop) {
      if (ind.evaluated && ind.fitness > result.best.fitness) result.best = ind;
    }
    if (on_generation) on_generation(stats, result.best, pop);
  };

  int evaluations = 0;
  int diverged = 0;
  detail::evaluate_population(pop, evaluate, cfg.workers, evaluations, diverged);
  absorb(detail::population_stats(pop, generation, evaluations, diverged));

  while (generation < cfg.generations &&
         result.best.fitness < cfg.target_fitness) {
    ++generation;
    pop = next_generation(pop, cfg, generation);
    detail::evaluate_population(pop, evaluate, cfg.workers, evaluations, diverged);
    absorb(detail::population_stats(pop, generation, evaluations, diverged));
  }

  result.final_population = std::move(pop);
  return result;
}

}  // namespace evospike

// Tests for the real-valued evolutionary algorithm.
//
// The oracle here is an analytic surrogate objective, independent of any
// simulation: f(g) = 1 - mean((g - 0.5)^2), maximized exactly at the
// all-0.5 genotype with value 1.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "evospike/errors.hpp"
#include "evospike/evolution.hpp"
#include "evospike/genotype.hpp"

namespace {

using evospike::EAConfig;
using evospike::Genotype;
using evospike::GenotypeLayout;

double surrogate(const Genotype& g) {
  double acc = 0.0;
  for (double gene : g.genes) acc += (gene - 0.5) * (gene - 0.5);
  return 1.0 - acc / static_cast<double>(g.genes.size());
}

EAConfig small_config() {
  EAConfig cfg;
  cfg.population_size = 40;
  cfg.generations = 20;
  cfg.master_seed = 11;
  return cfg;
}

std::multiset<std::vector<double>> gene_multiset(
    const evospike::Population& pop) {
  std::multiset<std::vector<double>> out;
  for (const auto& ind : pop) out.insert(ind.genotype.genes);
  return out;
}

}  // namespace

TEST_CASE("initial populations are reproducible and well-formed",
          "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig cfg;
  cfg.population_size = 100;
  cfg.master_seed = 12345;

  const auto a = evospike::init_population(cfg, layout);
  const auto b = evospike::init_population(cfg, layout);
  REQUIRE(a.size() == 100);
  REQUIRE(b.size() == 100);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].genotype.genes == b[i].genotype.genes);
    CHECK_FALSE(a[i].evaluated);
  }

  // 10^4 sampled genotypes stay inside the unit cube.
  int sampled = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EAConfig c = cfg;
    c.master_seed = seed;
    for (const auto& ind : evospike::init_population(c, layout)) {
      ++sampled;
      for (double gene : ind.genotype.genes) {
        REQUIRE(gene >= 0.0);
        REQUIRE(gene <= 1.0);
      }
    }
  }
  CHECK(sampled == 10000);

  // Different seeds give different populations.
  EAConfig other = cfg;
  other.master_seed = 54321;
  const auto c = evospike::init_population(other, layout);
  CHECK(a.front().genotype.genes != c.front().genotype.genes);
}

TEST_CASE("surrogate objective reaches 0.999 for at least 9 of 10 seeds",
          "[evolution]") {
  const GenotypeLayout layout{2};
  int successes = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EAConfig cfg;
    cfg.population_size = 100;
    cfg.generations = 200;
    cfg.master_seed = seed;
    cfg.target_fitness = 0.999;  // stop as soon as the bar is cleared
    const auto result = evospike::run_evolution(cfg, layout, surrogate);
    INFO("seed=" << seed << " best=" << result.best.fitness
                 << " generations=" << result.history.size() - 1);
    if (result.best.fitness >= 0.999) ++successes;
  }
  CHECK(successes >= 9);
}

TEST_CASE("identical master seeds give identical runs", "[evolution]") {
  const GenotypeLayout layout{2};
  const EAConfig cfg = small_config();
  const auto a = evospike::run_evolution(cfg, layout, surrogate);
  const auto b = evospike::run_evolution(cfg, layout, surrogate);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t k = 0; k < a.history.size(); ++k) {
    REQUIRE(a.history[k].best == b.history[k].best);
    REQUIRE(a.history[k].mean == b.history[k].mean);
    REQUIRE(a.history[k].stddev == b.history[k].stddev);
  }
  REQUIRE(a.best.genotype.genes == b.best.genotype.genes);
  REQUIRE(a.best.fitness == b.best.fitness);
}

TEST_CASE("results are independent of the worker count", "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig serial = small_config();
  serial.workers = 1;
  EAConfig parallel = small_config();
  parallel.workers = 4;

  const auto a = evospike::run_evolution(serial, layout, surrogate);
  const auto b = evospike::run_evolution(parallel, layout, surrogate);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t k = 0; k < a.history.size(); ++k) {
    REQUIRE(a.history[k].best == b.history[k].best);
    REQUIRE(a.history[k].mean == b.history[k].mean);
  }
  REQUIRE(a.best.genotype.genes == b.best.genotype.genes);
  REQUIRE(gene_multiset(a.final_population) ==
          gene_multiset(b.final_population));
}

TEST_CASE("best fitness is monotone non-decreasing with elitism",
          "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig cfg = small_config();
  cfg.generations = 40;
  cfg.elite_fraction = 0.1;
  const auto result = evospike::run_evolution(cfg, layout, surrogate);
  double prev = -1.0;
  for (const auto& stats : result.history) {
    REQUIRE(stats.best >= prev);
    prev = stats.best;
  }
  // The champion is still a member of the final population.
  bool found = false;
  for (const auto& ind : result.final_population) {
    if (ind.genotype.genes == result.best.genotype.genes) found = true;
  }
  CHECK(found);
}

TEST_CASE("full elitism with zero variation reproduces the population",
          "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig cfg = small_config();
  cfg.elite_fraction = 1.0;
  cfg.mutation_stddev = 0.0;
  cfg.mutation_prob = 0.0;
  cfg.crossover_prob = 0.0;
  cfg.flag_redraw_prob = 0.0;

  auto pop = evospike::init_population(cfg, layout);
  const auto [next, stats] =
      evospike::step_generation(pop, surrogate, cfg, 0);
  CHECK(stats.evaluations == cfg.population_size);
  REQUIRE(next.size() == pop.size());
  CHECK(gene_multiset(next) == gene_multiset(pop));
  // Elite keep their fitness: no re-evaluation next round.
  const auto [after, stats2] =
      evospike::step_generation(next, surrogate, cfg, 1);
  CHECK(stats2.evaluations == 0);
  (void)after;
}

TEST_CASE("zero variation without elitism copies parent genomes",
          "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig cfg = small_config();
  cfg.elite_fraction = 0.0;
  cfg.mutation_stddev = 0.0;
  cfg.mutation_prob = 0.0;
  cfg.crossover_prob = 0.0;
  cfg.flag_redraw_prob = 0.0;

  auto pop = evospike::init_population(cfg, layout);
  const auto parents = gene_multiset(pop);
  const auto [next, stats] = evospike::step_generation(pop, surrogate, cfg, 0);
  (void)stats;
  for (const auto& child : next) {
    CHECK(parents.count(child.genotype.genes) >= 1);
    CHECK_FALSE(child.evaluated);
  }
}

TEST_CASE("mutated genes are always clipped to [0,1]", "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig cfg = small_config();
  cfg.mutation_stddev = 5.0;  // nearly every mutation would escape the cube
  cfg.mutation_prob = 1.0;
  cfg.generations = 5;
  const auto result = evospike::run_evolution(cfg, layout, surrogate);
  for (const auto& ind : result.final_population) {
    for (double gene : ind.genotype.genes) {
      REQUIRE(gene >= 0.0);
      REQUIRE(gene <= 1.0);
    }
  }
}

TEST_CASE("divergent evaluations score -1 and the run continues",
          "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig cfg = small_config();
  cfg.generations = 10;
  // Genotypes in the upper half-space blow up; the rest behave.
  auto fragile = [](const Genotype& g) -> double {
    if (g.genes[0] >= 0.5) throw evospike::NumericError("boom");
    return surrogate(g);
  };
  const auto result = evospike::run_evolution(cfg, layout, fragile);
  CHECK(result.history.front().diverged > 0);
  CHECK(result.best.fitness > 0.0);
  CHECK(result.best.genotype.genes[0] < 0.5);

  // Divergent individuals are ranked at the floor, not removed.
  int floored = 0;
  for (const auto& ind : result.final_population) {
    if (ind.fitness == -1.0) ++floored;
  }
  CHECK(floored == result.history.back().diverged);
}

TEST_CASE("non-numeric evaluation errors propagate", "[evolution]") {
  const GenotypeLayout layout{2};
  const EAConfig cfg = small_config();
  auto broken = [](const Genotype&) -> double {
    throw evospike::ConfigError("bad evaluator");
  };
  CHECK_THROWS_AS(evospike::run_evolution(cfg, layout, broken),
                  evospike::ConfigError);
}

TEST_CASE("zero generations returns the best of the random draw",
          "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig cfg = small_config();
  cfg.generations = 0;
  const auto result = evospike::run_evolution(cfg, layout, surrogate);
  REQUIRE(result.history.size() == 1);
  CHECK(result.history[0].generation == 0);
  CHECK(result.history[0].evaluations == cfg.population_size);

  double best = -2.0;
  for (const auto& ind : result.final_population) {
    best = std::max(best, ind.fitness);
  }
  CHECK(result.best.fitness == best);
}

TEST_CASE("target fitness stops the run early", "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig cfg = small_config();
  cfg.generations = 500;
  cfg.target_fitness = 0.95;
  const auto result = evospike::run_evolution(cfg, layout, surrogate);
  CHECK(result.best.fitness >= 0.95);
  CHECK(result.history.size() < 501);
  // Every generation before the last was still below the bar.
  for (std::size_t k = 0; k + 1 < result.history.size(); ++k) {
    CHECK(result.history[k].best < 0.95);
  }
}

TEST_CASE("resuming from a mid-run state reproduces the tail",
          "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig cfg = small_config();
  cfg.generations = 12;

  const auto full = evospike::run_evolution(cfg, layout, surrogate);

  // Stop after generation 5, then resume with the evaluated population.
  EAConfig head_cfg = cfg;
  head_cfg.generations = 5;
  const auto head = evospike::run_evolution(head_cfg, layout, surrogate);
  evospike::EvolutionState state;
  state.population = head.final_population;
  state.generation = 5;
  const auto tail =
      evospike::run_evolution(cfg, layout, surrogate, {}, state);

  // The tail re-reports generation 5 and then matches the full run.
  REQUIRE(tail.history.size() == full.history.size() - 5);
  for (std::size_t k = 0; k < tail.history.size(); ++k) {
    const auto& got = tail.history[k];
    const auto& want = full.history[k + 5];
    REQUIRE(got.generation == want.generation);
    REQUIRE(got.best == want.best);
    REQUIRE(got.mean == want.mean);
    REQUIRE(got.stddev == want.stddev);
  }
  REQUIRE(tail.best.genotype.genes == full.best.genotype.genes);
  REQUIRE(gene_multiset(tail.final_population) ==
          gene_multiset(full.final_population));
}

TEST_CASE("per-generation evaluations never exceed the population size",
          "[evolution]") {
  const GenotypeLayout layout{2};
  EAConfig cfg = small_config();
  cfg.generations = 10;
  cfg.elite_fraction = 0.25;
  const auto result = evospike::run_evolution(cfg, layout, surrogate);
  REQUIRE(result.history[0].evaluations == cfg.population_size);
  const int elite = static_cast<int>(0.25 * cfg.population_size);
  for (std::size_t k = 1; k < result.history.size(); ++k) {
    CHECK(result.history[k].evaluations == cfg.population_size - elite);
  }
}

TEST_CASE("configuration validation rejects out-of-range settings",
          "[evolution]") {
  EAConfig cfg;
  cfg.population_size = 1;
  CHECK_THROWS_AS(cfg.validate(), evospike::ConfigError);
  cfg = EAConfig{};
  cfg.elite_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), evospike::ConfigError);
  cfg = EAConfig{};
  cfg.elite_fraction = -0.1;
  CHECK_THROWS_AS(cfg.validate(), evospike::ConfigError);
  cfg = EAConfig{};
  cfg.tournament_size = 0;
  CHECK_THROWS_AS(cfg.validate(), evospike::ConfigError);
  cfg = EAConfig{};
  cfg.mutation_stddev = -1.0;
  CHECK_THROWS_AS(cfg.validate(), evospike::ConfigError);
  cfg = EAConfig{};
  cfg.crossover_prob = 2.0;
  CHECK_THROWS_AS(cfg.validate(), evospike::ConfigError);
  cfg = EAConfig{};
  cfg.generations = -1;
  CHECK_THROWS_AS(cfg.validate(), evospike::ConfigError);
  CHECK_NOTHROW(EAConfig{}.validate());
}

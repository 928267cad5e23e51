// Tests for ray sensing, closed-loop trials, fitness scoring, the canonical
// 16-condition evaluation, and the generalization grid.
//
// The free-fall oracle transcribes the physics equations and the fitness
// summation independently of the library loop.

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "evospike/cartpole.hpp"
#include "evospike/errors.hpp"
#include "evospike/genotype.hpp"
#include "evospike/network.hpp"
#include "evospike/sensing.hpp"
#include "evospike/trial.hpp"

namespace {

using evospike::deg_to_rad;
using evospike::Genotype;
using evospike::GenotypeLayout;

// All genes 0.5: zero weights, zero biases, equal gains. The controller
// output is exactly zero at every step.
Genotype neutral_genotype(int n = 2) {
  Genotype g{GenotypeLayout{n}};
  for (double& gene : g.genes) gene = 0.5;
  return g;
}

// Independent zero-force trial: transcribed accelerations, Euler stepping,
// long-double fitness accumulation, fixed divisor, early termination.
double oracle_free_fall_fitness(double theta0, double omega0, double duration,
                                const evospike::PhysicsParams& p) {
  double x = 0.0, v = 0.0, theta = theta0, omega = omega0;
  const long total = std::lround(duration / p.dt);
  long double sum = 0.0L;
  for (long k = 0; k < total; ++k) {
    const double M = p.cart_mass + p.pole_mass;
    const double ml = p.pole_mass * p.pole_half_length;
    const double sgn_v = (v > 0.0) ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    const double theta_acc =
        (p.gravity * std::sin(theta) +
         std::cos(theta) *
             ((-0.0 - ml * omega * omega * std::sin(theta) +
               p.cart_friction * sgn_v) /
              M) -
         p.pivot_friction * omega / ml) /
        (p.pole_half_length *
         (4.0 / 3.0 - p.pole_mass * std::cos(theta) * std::cos(theta) / M));
    const double x_acc =
        (0.0 + ml * (omega * omega * std::sin(theta) -
                     theta_acc * std::cos(theta)) -
         p.cart_friction * sgn_v) /
        M;
    x += p.dt * v;
    v += p.dt * x_acc;
    theta += p.dt * omega;
    omega += p.dt * theta_acc;
    sum += std::cos(theta);
    if (std::fabs(x) > p.track_length / 2.0 ||
        std::fabs(theta) >= evospike::kPi / 2.0) {
      break;
    }
  }
  return static_cast<double>(sum / static_cast<long double>(total));
}

}  // namespace

TEST_CASE("ray activations match the kernel at the reference angles",
          "[trial]") {
  const evospike::RayConfig rc;

  // Vertical pole: only the center ray responds, and it saturates.
  const auto at_zero = evospike::sense(0.0, rc);
  for (int j = 0; j < 7; ++j) {
    if (j == 3) {
      CHECK(at_zero[j] == 1.0);
    } else {
      CHECK(at_zero[j] == 0.0);
    }
  }

  // Midpoint between two centers: both neighbors read one half.
  const auto at_mid = evospike::sense(deg_to_rad(3.0), rc);
  CHECK(at_mid[3] == Catch::Approx(0.5).margin(1e-12));
  CHECK(at_mid[4] == Catch::Approx(0.5).margin(1e-12));
  CHECK(at_mid[0] == 0.0);
  CHECK(at_mid[1] == 0.0);
  CHECK(at_mid[2] == 0.0);
  CHECK(at_mid[5] == 0.0);
  CHECK(at_mid[6] == 0.0);

  // Beyond the outermost receptive field the pole is invisible.
  const auto beyond = evospike::sense(deg_to_rad(25.0), rc);
  for (int j = 0; j < 7; ++j) CHECK(beyond[j] == 0.0);
  const auto beyond_neg = evospike::sense(deg_to_rad(-25.0), rc);
  for (int j = 0; j < 7; ++j) CHECK(beyond_neg[j] == 0.0);
}

TEST_CASE("ray centers sit at -18..18 degrees in 6-degree steps", "[trial]") {
  const evospike::RayConfig rc;
  for (int j = 0; j < 7; ++j) {
    CHECK(rc.center_rad(j) ==
          Catch::Approx(deg_to_rad(-18.0 + 6.0 * j)).margin(1e-15));
    // Each center saturates its own ray.
    CHECK(evospike::sense(rc.center_rad(j), rc)[j] == 1.0);
  }
}

TEST_CASE("ray activations stay in [0,1] and vary piecewise linearly",
          "[trial]") {
  const evospike::RayConfig rc;
  for (double deg = -30.0; deg <= 30.0; deg += 0.37) {
    const auto act = evospike::sense(deg_to_rad(deg), rc);
    for (double a : act) {
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
    }
  }
  // Linear falloff on one flank: activation at 2 degrees from center.
  const auto act = evospike::sense(deg_to_rad(2.0), rc);
  CHECK(act[3] == Catch::Approx(1.0 - 2.0 / 6.0).margin(1e-12));
}

TEST_CASE("a perfectly balanced trial scores exactly 1.0", "[trial]") {
  // Zero-force controller started exactly upright: theta stays 0 at every
  // step, and the mean of cos(0) over the fixed divisor is exactly one.
  const auto np = evospike::decode(neutral_genotype());
  const evospike::PhysicsParams pp;
  const auto result =
      evospike::run_trial(np, evospike::TrialConfig{0.0, 0.0, 100.0}, pp);
  CHECK(result.fitness == 1.0);
  CHECK_FALSE(result.terminated_early);
  CHECK(result.steps_executed == 10000);
}

TEST_CASE("a pole frozen at 12 degrees scores cos(12 degrees)", "[trial]") {
  // Feed the accumulator the frozen angle directly; the compensated sum
  // keeps the mean within 1e-12 of the analytic value over 50000 steps.
  const long steps = 50000;
  evospike::FitnessAccumulator acc(steps);
  const double theta = deg_to_rad(12.0);
  for (long k = 0; k < steps; ++k) acc.add_angle(theta);
  CHECK(std::fabs(acc.value() - std::cos(theta)) <= 1e-12);
}

TEST_CASE("zero-force free fall matches the independent oracle", "[trial]") {
  const auto np = evospike::decode(neutral_genotype());
  const evospike::PhysicsParams pp;
  for (double theta0_deg : {3.0, 6.0, 12.0}) {
    const auto tc = evospike::TrialConfig::from_degrees(theta0_deg, 0.001, 10.0);
    const auto result = evospike::run_trial(np, tc, pp);
    const double want =
        oracle_free_fall_fitness(tc.theta0, tc.omega0, tc.duration, pp);
    INFO("theta0=" << theta0_deg);
    CHECK(result.fitness == Catch::Approx(want).margin(1e-9));
    // The pole falls, so the trial must end early and score below a
    // vertical hold over the same horizon.
    CHECK(result.terminated_early);
    CHECK(result.fitness < 1.0);
  }
}

TEST_CASE("early termination forfeits the remaining reward", "[trial]") {
  const auto np = evospike::decode(neutral_genotype());
  const evospike::PhysicsParams pp;

  // Free fall from 12 degrees ends the same way regardless of the nominal
  // duration; doubling the duration halves the fitness because the divisor
  // stays at the full step count.
  const auto short_run = evospike::run_trial(
      np, evospike::TrialConfig::from_degrees(12.0, 0.0, 10.0), pp);
  const auto long_run = evospike::run_trial(
      np, evospike::TrialConfig::from_degrees(12.0, 0.0, 20.0), pp);
  REQUIRE(short_run.terminated_early);
  REQUIRE(long_run.terminated_early);
  CHECK(short_run.steps_executed == long_run.steps_executed);
  CHECK(long_run.fitness == Catch::Approx(short_run.fitness / 2.0).margin(1e-15));
}

TEST_CASE("leaving the track terminates the trial", "[trial]") {
  // Constant low thrust on a very short track: the agent rolls off before
  // the pole tips appreciably, so the track bound is what fires.
  const GenotypeLayout lay{2};
  Genotype g = neutral_genotype();
  g.genes[lay.motor_gene(0, 1)] = 1.0;  // bias +4
  g.genes[lay.motor_gene(1, 1)] = 0.0;  // bias -4
  const auto np = evospike::decode(g);

  evospike::PhysicsParams pp;
  pp.f_max = 0.1;
  pp.track_length = 0.02;

  evospike::TrialConfig tc{0.0, 0.0, 10.0, true};
  const auto result = evospike::run_trial(np, tc, pp);
  CHECK(result.terminated_early);
  CHECK(result.steps_executed < 1000);
  REQUIRE(result.trace.has_value());
  // The pole stayed near vertical the whole way: it was the position
  // bound, not the angle bound.
  for (double theta : result.trace->channel("theta")) {
    CHECK(std::fabs(theta) < 0.1);
  }
  const auto& xs = result.trace->channel("x");
  CHECK(std::fabs(xs.back()) <= 0.01);  // last recorded pre-step position
}

TEST_CASE("recorded traces align rows at sensing time", "[trial]") {
  const GenotypeLayout lay{2};
  std::mt19937_64 rng(42);
  const Genotype g = evospike::random_genotype(lay, rng);
  const auto np = evospike::decode(g);
  const evospike::PhysicsParams pp;
  const auto tc = evospike::TrialConfig::from_degrees(6.0, 0.001, 5.0, true);
  const auto result = evospike::run_trial(np, tc, pp);

  REQUIRE(result.trace.has_value());
  const auto& tr = *result.trace;
  CHECK(tr.channels == evospike::Trace::channel_names(2));
  CHECK(tr.rows() == static_cast<std::size_t>(result.steps_executed));
  CHECK(tr.theta0 == tc.theta0);
  CHECK(tr.omega0 == tc.omega0);
  CHECK(tr.dt == pp.dt);
  CHECK(tr.fitness == result.fitness);

  // Row 0 holds the untouched initial condition.
  CHECK(tr.channel("theta")[0] == tc.theta0);
  CHECK(tr.channel("omega")[0] == tc.omega0);
  CHECK(tr.channel("x")[0] == 0.0);
  CHECK(tr.channel("v")[0] == 0.0);

  // Sensor columns are the kernel applied to the theta column.
  const evospike::RayConfig rc;
  for (std::size_t row = 0; row < tr.rows(); row += 7) {
    const auto want = evospike::sense(tr.channel("theta")[row], rc);
    for (int j = 0; j < 7; ++j) {
      REQUIRE(tr.channel("S" + std::to_string(j + 1))[row] == want[j]);
    }
  }

  // Spikes are binary, rates live in [0,1], force respects the limit.
  for (std::size_t row = 0; row < tr.rows(); ++row) {
    for (int i = 1; i <= 2; ++i) {
      const double spike = tr.channel("spike" + std::to_string(i))[row];
      REQUIRE((spike == 0.0 || spike == 1.0));
      const double rate = tr.channel("R" + std::to_string(i))[row];
      REQUIRE(rate >= 0.0);
      REQUIRE(rate <= 1.0);
    }
    REQUIRE(std::fabs(tr.channel("force")[row]) <= pp.f_max);
  }

  // Unrecorded runs carry no trace but identical dynamics.
  auto quiet = tc;
  quiet.record = false;
  const auto unrecorded = evospike::run_trial(np, quiet, pp);
  CHECK_FALSE(unrecorded.trace.has_value());
  CHECK(unrecorded.fitness == result.fitness);
  CHECK(unrecorded.steps_executed == result.steps_executed);
}

TEST_CASE("canonical trials enumerate all 16 starting conditions", "[trial]") {
  const auto trials = evospike::canonical_trials();
  REQUIRE(trials.size() == 16);
  std::size_t k = 0;
  for (double theta_deg : {-12.0, -9.0, -6.0, -3.0, 3.0, 6.0, 9.0, 12.0}) {
    for (double omega0 : {-0.001, 0.001}) {
      CHECK(trials[k].theta0 == deg_to_rad(theta_deg));
      CHECK(trials[k].omega0 == omega0);
      CHECK(trials[k].duration == 500.0);
      ++k;
    }
  }
}

TEST_CASE("evaluate_fitness is the mean over the canonical conditions",
          "[trial]") {
  const GenotypeLayout lay{2};
  std::mt19937_64 rng(7);
  const auto np = evospike::decode(evospike::random_genotype(lay, rng));
  const evospike::PhysicsParams pp;
  const double duration = 5.0;

  double sum = 0.0;
  for (const auto& tc : evospike::canonical_trials(duration)) {
    sum += evospike::run_trial(np, tc, pp).fitness;
  }
  const double mean = sum / 16.0;
  CHECK(evospike::evaluate_fitness(np, pp, evospike::RayConfig{}, duration) ==
        Catch::Approx(mean).margin(1e-15));
}

TEST_CASE("zero-force fitness is identical across mirror pairs", "[trial]") {
  const auto np = evospike::decode(neutral_genotype());
  const evospike::PhysicsParams pp;
  for (double theta_deg : {3.0, 6.0, 9.0, 12.0}) {
    for (double omega0 : {-0.001, 0.001}) {
      const auto plus = evospike::run_trial(
          np, evospike::TrialConfig::from_degrees(theta_deg, omega0, 10.0), pp);
      const auto minus = evospike::run_trial(
          np, evospike::TrialConfig::from_degrees(-theta_deg, -omega0, 10.0), pp);
      // The dynamics are exactly odd and cos is even, so the scores agree
      // bit for bit.
      REQUIRE(plus.fitness == minus.fitness);
      REQUIRE(plus.steps_executed == minus.steps_executed);
    }
  }
}

TEST_CASE("generalization grid covers the axes and flags trained cells",
          "[trial]") {
  const auto np = evospike::decode(neutral_genotype());
  const evospike::PhysicsParams pp;
  evospike::GridSpec spec;
  spec.theta_min_deg = -12.0;
  spec.theta_max_deg = 12.0;
  spec.theta_resolution = 9;  // -12,-9,...,9,12
  spec.omega_min = -0.001;
  spec.omega_max = 0.001;
  spec.omega_resolution = 3;  // -0.001, 0, 0.001

  const auto grid = evospike::generalization_grid(np, spec, pp,
                                                  evospike::RayConfig{}, 5.0);
  REQUIRE(grid.theta0_deg.size() == 9);
  REQUIRE(grid.omega0.size() == 3);
  REQUIRE(grid.fitness.size() == 27);
  CHECK(grid.theta0_deg.front() == -12.0);
  CHECK(grid.theta0_deg.back() == 12.0);
  CHECK(grid.omega0[1] == 0.0);

  // Trained cells: theta in {+-3,+-6,+-9,+-12} x omega in {+-0.001}; the
  // theta = 0 row and the omega = 0 column are never trained.
  int trained_count = 0;
  for (std::size_t ti = 0; ti < grid.theta0_deg.size(); ++ti) {
    for (std::size_t oi = 0; oi < grid.omega0.size(); ++oi) {
      const bool trained = grid.trained[ti * 3 + oi];
      if (trained) ++trained_count;
      const bool theta_trained = std::fabs(grid.theta0_deg[ti]) >= 3.0 - 1e-9;
      const bool omega_trained = std::fabs(grid.omega0[oi]) > 1e-12;
      CHECK(trained == (theta_trained && omega_trained));
    }
  }
  CHECK(trained_count == 16);

  // Zero-force controller: the grid inherits the mirror symmetry exactly.
  for (int ti = 0; ti < 9; ++ti) {
    for (int oi = 0; oi < 3; ++oi) {
      REQUIRE(grid.at(ti, oi) == grid.at(8 - ti, 2 - oi));
    }
  }
}

TEST_CASE("grid validation rejects degenerate axes", "[trial]") {
  evospike::GridSpec spec;
  spec.theta_resolution = 1;
  CHECK_THROWS_AS(spec.validate(), evospike::ConfigError);
  spec = evospike::GridSpec{};
  spec.omega_resolution = 0;
  CHECK_THROWS_AS(spec.validate(), evospike::ConfigError);
  spec = evospike::GridSpec{};
  spec.theta_min_deg = spec.theta_max_deg;
  CHECK_THROWS_AS(spec.validate(), evospike::ConfigError);
  CHECK_NOTHROW(evospike::GridSpec{}.validate());
}

TEST_CASE("divergence inside a trial carries trial context", "[trial]") {
  auto np = evospike::decode(neutral_genotype());
  np.sensor_weights[0][3] = std::nan("");
  const evospike::PhysicsParams pp;
  using Catch::Matchers::ContainsSubstring;
  CHECK_THROWS_MATCHES(
      evospike::run_trial(
          np, evospike::TrialConfig::from_degrees(3.0, 0.001, 1.0), pp),
      evospike::NumericError,
      Catch::Matchers::MessageMatches(ContainsSubstring("trial")));
}

TEST_CASE("trial duration must be positive", "[trial]") {
  const auto np = evospike::decode(neutral_genotype());
  const evospike::PhysicsParams pp;
  CHECK_THROWS_AS(
      evospike::run_trial(np, evospike::TrialConfig{0.0, 0.0, 0.0}, pp),
      evospike::ConfigError);
}

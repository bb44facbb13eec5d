#include "fixtures.hpp"

#include "mlat/config.hpp"
#include "mlat/errors.hpp"
#include "mlat/protocols.hpp"
#include "mlat/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace mlat;
using mp::Value;

namespace {

const mp::Context kTruth(34);

double worst_point_error(const NetworkConfig& net, const ParameterVector& solved) {
  const NetworkEstimate est = unpack(solved, net);
  double worst = 0.0;
  for (size_t i = 0; i < net.points.size(); ++i) {
    for (size_t axis = 0; axis < 3; ++axis) {
      worst = std::max(worst, std::abs(kTruth.sub(est.points[i][axis], net.points[i].position[axis]).to_double()));
    }
  }
  return worst;
}

double mean_point_error(const NetworkConfig& net, const ParameterVector& solved) {
  const NetworkEstimate est = unpack(solved, net);
  double sum = 0.0;
  for (size_t i = 0; i < net.points.size(); ++i) sum += distance(est.points[i], net.points[i].position, kTruth).to_double();
  return sum / static_cast<double>(net.points.size());
}

ParameterVector setup_values(const NetworkConfig& net, std::uint64_t seed) {
  RngStream rng(seed);
  return randomize_setup(net, 1.0, rng, kTruth);
}

}  // namespace

TEST_CASE("options validation") {
  SolverOptions o;
  CHECK_NOTHROW(o.validate());
  o.max_iterations = 0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o = {};
  o.damping_increase = 1.0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o = {};
  o.damping_decrease = 1.0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o = {};
  o.initial_damping = 0.0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  o = {};
  o.convergence_tolerance = Value::parse("-1e-9");
  CHECK_THROWS_AS(o.validate(), ConfigError);
  CHECK(SolverOptions{}.tolerance_for(mp::Context(20)) == Value::parse("1e-18"));
}

TEST_CASE("truth start converges immediately") {
  const NetworkConfig net = table1_network();
  const std::vector<Observation> obs = nominal_observations(net, kTruth);
  const ParameterVector truth = pack(net, nominal_estimate(net));
  for (const int digits : {10, 15, 20, 30}) {
    const SolutionReport r = solve(net, obs, truth, mp::Context(digits));
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK(r.digits_used == digits);
    CHECK(r.residual_norm.to_double() <= std::pow(10.0, 2 - digits));
  }
}

TEST_CASE("exact data from a 1 mm setup is recovered on the compact network") {
  const NetworkConfig net = testing::compact_network();
  CHECK(degrees_of_freedom(5, 7) == 0);
  const std::vector<Observation> obs = nominal_observations(net, kTruth);
  for (const int digits : {15, 20}) {
    for (const std::uint64_t seed : {11u, 12u, 13u}) {
      const SolutionReport r = solve(net, obs, setup_values(net, seed), mp::Context(digits));
      CHECK(r.converged);
      CHECK(worst_point_error(net, r.solved) <= std::pow(10.0, 3 - digits));
    }
  }
}

TEST_CASE("table 1 recovery stays near the input-rounding floor") {
  // Oracle: least squares at 34 digits on lengths rounded to the working
  // precision, i.e. the error that input rounding alone leaves.
  const NetworkConfig net = table1_network();
  const std::vector<Observation> exact = nominal_observations(net, kTruth);
  SolverOptions tight;
  tight.convergence_tolerance = Value::parse("1e-30");
  for (const int digits : {15, 20}) {
    const mp::Context ctx(digits);
    std::vector<Observation> rounded = exact;
    for (auto& o : rounded) o.length = ctx.round(o.length);
    const ParameterVector setup = setup_values(net, 21);
    const double floor = worst_point_error(net, solve(net, rounded, setup, kTruth, tight).solved);
    const SolutionReport r = solve(net, exact, setup, ctx);
    CHECK(r.converged);
    CHECK(worst_point_error(net, r.solved) <= 5.0 * floor);
  }
}

TEST_CASE("fewer observations than unknowns is rejected") {
  const NetworkConfig net = table1_network();
  std::vector<Observation> obs = nominal_observations(net, kTruth);
  obs.resize(40);
  const ParameterVector truth = pack(net, nominal_estimate(net));
  CHECK_THROWS_WITH_AS(solve(net, obs, truth, mp::Context(20)), doctest::Contains("underdetermined"), ConfigError);

  const NetworkConfig teaching = teaching_network();
  const std::vector<Observation> teaching_obs = nominal_observations(teaching, kTruth);
  CHECK_THROWS_AS(solve(teaching, teaching_obs, setup_values(teaching, 1), mp::Context(20)), ConfigError);
}

TEST_CASE("mismatched initial vector is rejected") {
  const NetworkConfig net = table1_network();
  const std::vector<Observation> obs = nominal_observations(net, kTruth);
  const ParameterVector other = pack(testing::compact_network(), nominal_estimate(testing::compact_network()));
  CHECK_THROWS_AS(solve(net, obs, other, mp::Context(20)), StructuralError);
}

TEST_CASE("a parameter without observations is a rank deficiency") {
  NetworkConfig net = table1_network();
  net.points.clear();
  for (int k = 0; k < 30; ++k) {
    net.points.push_back({k + 1, testing::vec(std::to_string(k % 10 * 2).c_str(), k % 3 == 0 ? "1.5" : "-1.5",
                                              k % 2 == 0 ? "0.5" : "2.5")});
  }
  std::vector<Observation> obs;
  for (const auto& o : nominal_observations(net, kTruth)) {
    if (o.station_id != 5) obs.push_back(o);
  }
  CHECK(static_cast<int>(obs.size()) >= count_unknowns(5, 30));
  try {
    solve(net, obs, pack(net, nominal_estimate(net)), mp::Context(20));
    FAIL("expected RankDeficiencyError");
  } catch (const RankDeficiencyError& e) {
    CHECK(e.iteration() == 1);
    CHECK(std::string(e.what()).find("iteration 1") != std::string::npos);
  }
}

TEST_CASE("iteration limit is reported, not thrown") {
  const NetworkConfig net = table1_network();
  SolverOptions o;
  o.max_iterations = 2;
  const SolutionReport r = solve(net, nominal_observations(net, kTruth), setup_values(net, 5), mp::Context(20), o);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
}

TEST_CASE("accepted steps never increase the objective") {
  const NetworkConfig net = table1_network();
  const std::vector<Observation> obs = nominal_observations(net, kTruth);
  for (const int digits : {10, 20}) {
    const SolutionReport r = solve(net, obs, setup_values(net, 8), mp::Context(digits));
    REQUIRE(r.objective_history.size() >= 2);
    for (size_t k = 1; k < r.objective_history.size(); ++k) {
      CHECK(r.objective_history[k] < r.objective_history[k - 1]);
    }
    CHECK(r.final_relative_step <= SolverOptions{}.tolerance_for(mp::Context(digits)));
  }
}

TEST_CASE("solves are deterministic") {
  const NetworkConfig net = table1_network();
  const std::vector<Observation> obs = nominal_observations(net, kTruth);
  const ParameterVector setup = setup_values(net, 9);
  const SolutionReport a = solve(net, obs, setup, mp::Context(17));
  const SolutionReport b = solve(net, obs, setup, mp::Context(17));
  CHECK(a.solved == b.solved);
  CHECK(a.residual_norm == b.residual_norm);
  CHECK(a.iterations == b.iterations);
  CHECK(a.objective_history == b.objective_history);
  CHECK(a.final_relative_step == b.final_relative_step);
}

TEST_CASE("distances do not depend on the mirror image chosen by the setup") {
  // Reflecting every z (or every y) maps the gauge onto itself, so the
  // mirrored setup converges to the mirrored network.
  const NetworkConfig net = table1_network();
  const std::vector<Observation> obs = nominal_observations(net, kTruth);
  const mp::Context ctx(20);
  const ParameterVector setup = setup_values(net, 10);
  const SolutionReport direct = solve(net, obs, setup, ctx);
  REQUIRE(direct.converged);
  const NetworkEstimate a = unpack(direct.solved, net);
  const double tol = SolverOptions{}.tolerance_for(ctx).to_double();

  for (const size_t axis : {size_t{1}, size_t{2}}) {
    NetworkEstimate mirrored = unpack(setup, net);
    for (auto& s : mirrored.stations) s[axis] = -s[axis];
    for (auto& p : mirrored.points) p[axis] = -p[axis];
    const SolutionReport r = solve(net, obs, pack(net, mirrored), ctx);
    REQUIRE(r.converged);
    const NetworkEstimate b = unpack(r.solved, net);
    CHECK(b.points[0][axis].negative() != a.points[0][axis].negative());
    for (size_t i = 0; i < a.points.size(); ++i) {
      for (size_t k = i + 1; k < a.points.size(); ++k) {
        const Value da = distance(a.points[i], a.points[k], kTruth);
        const Value db = distance(b.points[i], b.points[k], kTruth);
        CHECK(std::abs(kTruth.sub(da, db).to_double()) <= 10.0 * tol * da.to_double());
      }
    }
  }
}

TEST_CASE("more digits give smaller deviations") {
  const NetworkConfig net = table1_network();
  const std::vector<Observation> obs = nominal_observations(net, kTruth);
  const ParameterVector setup = setup_values(net, 4);
  const double at10 = mean_point_error(net, solve(net, obs, setup, mp::Context(10)).solved);
  const double at20 = mean_point_error(net, solve(net, obs, setup, mp::Context(20)).solved);
  CHECK(at20 < at10);
}

#include "mlat/protocols.hpp"

#include "mlat/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

namespace mlat {

namespace {

// Stream tags for RngStream::derive.
constexpr std::uint64_t kProtocol1Setup = 1;
constexpr std::uint64_t kProtocol2Setup = 2;
constexpr std::uint64_t kProtocol2Measurement = 3;

double to_mm(const mp::Value& metres) { return metres.scaled(3).to_double(); }

}  // namespace

std::vector<Observation> nominal_observations(const NetworkConfig& config, const mp::Context& ctx) {
  std::vector<Observation> obs;
  obs.reserve(config.stations.size() * config.points.size());
  for (const auto& s : config.stations) {
    for (const auto& p : config.points) {
      obs.push_back({s.id, p.id, ctx.sub(distance(p.position, s.position, ctx), s.dead_zone)});
    }
  }
  return obs;
}

double coverage_interval(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw DomainError("coverage interval needs at least 2 samples, got " + std::to_string(samples.size()));
  }
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (const double x : samples) ss += (x - mean) * (x - mean);
  return 2.0 * std::sqrt(ss / (n - 1.0));
}

std::vector<double> distance_deviations(const NetworkEstimate& solved, const NetworkConfig& config) {
  if (solved.points.size() != config.points.size()) {
    throw StructuralError("solved point count " + std::to_string(solved.points.size()) +
                          " does not match the configuration's " + std::to_string(config.points.size()));
  }
  if (config.points.size() < 2) throw StructuralError("distance deviations need at least 2 points");
  const mp::Context hi(kTruthDigits);
  std::vector<double> out;
  for (size_t i = 1; i < config.points.size(); ++i) {
    const mp::Value solved_d = distance(solved.points[0], solved.points[i], hi);
    const mp::Value nominal_d = distance(config.points[0].position, config.points[i].position, hi);
    out.push_back(to_mm(hi.sub(solved_d, nominal_d)));
  }
  return out;
}

std::vector<double> distance_deviations(const SolutionReport& solution, const NetworkConfig& config) {
  return distance_deviations(unpack(solution.solved, config), config);
}

std::vector<double> nominal_distances(const NetworkConfig& config) {
  const mp::Context hi(kTruthDigits);
  std::vector<double> out;
  for (size_t i = 1; i < config.points.size(); ++i) {
    out.push_back(distance(config.points[0].position, config.points[i].position, hi).to_double());
  }
  return out;
}

// ---------------------------------------------------------------- protocol 1

Protocol1Report run_protocol1(const NetworkConfig& config, std::span<const int> digits, std::uint64_t seed,
                              const Protocol1Options& options) {
  config.validate();
  if (digits.empty()) throw ConfigError("protocol 1 needs at least one digit count");
  std::vector<int> sweep(digits.begin(), digits.end());
  std::sort(sweep.begin(), sweep.end());
  sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
  for (const int d : sweep) mp::make_context(d);

  const mp::Context hi(kTruthDigits);
  const std::vector<Observation> obs = nominal_observations(config, hi);
  RngStream rng = RngStream::derive(seed, {kProtocol1Setup});
  const ParameterVector setup = randomize_setup(config, options.setup_radius_mm, rng, hi);

  Protocol1Report report;
  report.seed = seed;
  report.setup_radius_mm = options.setup_radius_mm;
  for (const int d : sweep) {
    DigitsResult result;
    result.digits = d;
    result.mean_magnitude_mm = std::numeric_limits<double>::quiet_NaN();
    try {
      const SolutionReport sol = solve(config, obs, setup, mp::Context(d), options.solver);
      result.solved = true;
      result.converged = sol.converged;
      result.iterations = sol.iterations;
      result.residual_norm_m = sol.residual_norm.to_double();
      if (!sol.converged) result.failure = "no convergence within " + std::to_string(options.solver.max_iterations) + " iterations";

      const NetworkEstimate est = unpack(sol.solved, config);
      double sum = 0.0;
      for (size_t i = 0; i < config.points.size(); ++i) {
        PointDeviation dev;
        dev.point_id = config.points[i].id;
        dev.digits = d;
        mp::Value sq;
        std::array<double, 3> mm{};
        for (size_t axis = 0; axis < 3; ++axis) {
          const mp::Value delta = hi.sub(est.points[i][axis], config.points[i].position[axis]);
          sq = hi.add(sq, hi.mul(delta, delta));
          mm[axis] = to_mm(delta);
        }
        dev.dx_mm = mm[0];
        dev.dy_mm = mm[1];
        dev.dz_mm = mm[2];
        dev.magnitude_mm = to_mm(hi.sqrt(sq));
        sum += dev.magnitude_mm;
        report.deviations.push_back(dev);
      }
      result.mean_magnitude_mm = sum / static_cast<double>(config.points.size());
    } catch (const SolverError& e) {
      result.failure = e.what();
    } catch (const GeometryError& e) {
      result.failure = e.what();
    }
    report.per_digits.push_back(std::move(result));
  }
  return report;
}

// ---------------------------------------------------------------- protocol 2

void ExperimentSpec::validate() const {
  if (id.empty()) throw ConfigError("experiment id must not be empty");
  mp::make_context(digits);
  if (runs < 1) throw ConfigError("experiment " + id + ": runs must be >= 1");
  if (repeats_per_length < 1) throw ConfigError("experiment " + id + ": repeats per length must be >= 1");
}

std::vector<ExperimentSpec> default_experiments(int runs) {
  return {
      {"Exp1", 20, false, runs, 5},
      {"Exp2", 20, true, runs, 5},
      {"Exp3", 10, false, runs, 5},
      {"Exp4", 10, true, runs, 5},
  };
}

namespace {

struct RunTask {
  size_t experiment;
  int run;
};

RunRecord execute_run(const NetworkConfig& config, const UncertaintyBudget& budget,
                      const std::vector<Observation>& nominal, const ExperimentSpec& spec, size_t experiment_index,
                      int run, std::uint64_t seed, const Protocol2Options& options) {
  const mp::Context hi(kTruthDigits);
  const std::uint64_t index = static_cast<std::uint64_t>(run);
  const std::uint64_t salt = options.seeding == Seeding::independent ? experiment_index + 1 : 0;

  RunRecord record;
  record.run = run;
  try {
    std::vector<Observation> obs;
    if (spec.with_uncertainties) {
      RngStream measurement = RngStream::derive(seed, {kProtocol2Measurement, salt, index});
      obs.reserve(nominal.size());
      for (const auto& s : config.stations) {
        for (const auto& p : config.points) {
          obs.push_back({s.id, p.id, simulate_length(p, s, budget, spec.repeats_per_length, measurement, hi)});
        }
      }
    } else {
      obs = nominal;
    }
    RngStream setup_rng = RngStream::derive(seed, {kProtocol2Setup, salt, index});
    const ParameterVector setup = randomize_setup(config, budget.setup_radius_mm, setup_rng, hi);

    const SolutionReport sol = solve(config, obs, setup, mp::Context(spec.digits), options.solver);
    record.iterations = sol.iterations;
    if (!sol.converged) {
      record.failure = "no convergence within " + std::to_string(options.solver.max_iterations) + " iterations";
      return record;
    }
    record.deviations_mm = distance_deviations(sol, config);
    record.ok = true;
  } catch (const SolverError& e) {
    record.failure = e.what();
  } catch (const GeometryError& e) {
    record.failure = e.what();
  }
  return record;
}

void summarize(ExperimentResult& result, size_t distances) {
  result.failed_runs = static_cast<int>(
      std::count_if(result.runs.begin(), result.runs.end(), [](const RunRecord& r) { return !r.ok; }));
  result.coverage_mm.assign(distances, std::nullopt);
  result.coverage_errors.assign(distances, std::string());
  bool all_computed = true;
  for (size_t k = 0; k < distances; ++k) {
    std::vector<double> samples;
    for (const auto& r : result.runs) {
      if (r.ok) samples.push_back(r.deviations_mm[k]);
    }
    try {
      result.coverage_mm[k] = coverage_interval(samples);
    } catch (const DomainError& e) {
      result.coverage_errors[k] = e.what();
      all_computed = false;
    }
  }
  if (all_computed && distances > 0) {
    double largest = 0.0;
    double sum = 0.0;
    for (const auto& c : result.coverage_mm) {
      largest = std::max(largest, *c);
      sum += *c;
    }
    result.largest_coverage_mm = largest;
    result.mean_coverage_mm = sum / static_cast<double>(distances);
  }
  result.valid = all_computed && result.failed_runs * 10 <= result.spec.runs;
}

}  // namespace

Protocol2Report run_protocol2(const NetworkConfig& config, const UncertaintyBudget& budget,
                              std::span<const ExperimentSpec> experiments, std::uint64_t seed,
                              const Protocol2Options& options) {
  config.validate();
  budget.validate();
  options.solver.validate();
  if (experiments.empty()) throw ConfigError("protocol 2 needs at least one experiment");
  for (const auto& e : experiments) e.validate();
  if (config.point_count() < 2) throw ConfigError("protocol 2 needs at least 2 target points");

  const mp::Context hi(kTruthDigits);
  const std::vector<Observation> nominal = nominal_observations(config, hi);

  Protocol2Report report;
  report.seed = seed;
  report.seeding = options.seeding;
  report.setup_radius_mm = budget.setup_radius_mm;
  report.smr_position_um = budget.smr_position_um();
  report.edlen_um_per_m = budget.edlen_um_per_m();
  report.nominal_distances_m = nominal_distances(config);

  std::vector<RunTask> tasks;
  for (size_t e = 0; e < experiments.size(); ++e) {
    ExperimentResult result;
    result.spec = experiments[e];
    result.runs.resize(static_cast<size_t>(experiments[e].runs));
    report.experiments.push_back(std::move(result));
    for (int r = 0; r < experiments[e].runs; ++r) tasks.push_back({e, r});
  }

  // Each task writes only its own slot; results are merged by index.
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (;;) {
      const size_t t = next.fetch_add(1);
      if (t >= tasks.size() || failed.load()) return;
      const RunTask& task = tasks[t];
      try {
        report.experiments[task.experiment].runs[static_cast<size_t>(task.run)] =
            execute_run(config, budget, nominal, experiments[task.experiment], task.experiment, task.run, seed, options);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  for (auto& result : report.experiments) summarize(result, report.nominal_distances_m.size());
  return report;
}

}  // namespace mlat

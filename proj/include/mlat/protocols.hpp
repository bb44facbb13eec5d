#pragma once

// Simulation protocols.
//
// Protocol 1 solves one noise-free network at a sweep of precisions from one
// shared set of setup values and records how far the solved points land from
// the nominal ones. Protocol 2 repeats full simulated measurements (with or
// without the uncertainty budget) many times per experiment and reports ±2σ
// coverage intervals of the distances M1-Mi.

#include "mlat/metrology.hpp"
#include "mlat/model.hpp"
#include "mlat/solver.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mlat {

/// Precision used for ground-truth lengths and for reporting differences.
inline constexpr int kTruthDigits = 34;

/// All POS x PTS noise-free lengths, station-major, computed in ctx.
std::vector<Observation> nominal_observations(const NetworkConfig& config, const mp::Context& ctx);

/// 2 x sample standard deviation (n - 1). Throws DomainError for fewer than 2 samples.
double coverage_interval(std::span<const double> samples);

/// |Ms1 - Msi| - |M1 - Mi| for i = 2..PTS, in mm, evaluated at kTruthDigits.
std::vector<double> distance_deviations(const SolutionReport& solution, const NetworkConfig& config);
std::vector<double> distance_deviations(const NetworkEstimate& solved, const NetworkConfig& config);

/// |M1 - Mi| for i = 2..PTS, metres.
std::vector<double> nominal_distances(const NetworkConfig& config);

// ---------------------------------------------------------------- protocol 1

struct PointDeviation {
  int point_id = 0;
  int digits = 0;
  double dx_mm = 0.0;
  double dy_mm = 0.0;
  double dz_mm = 0.0;
  double magnitude_mm = 0.0;
};

struct DigitsResult {
  int digits = 0;
  bool solved = false;      // the solver returned (converged or not)
  bool converged = false;
  int iterations = 0;
  double residual_norm_m = 0.0;
  double mean_magnitude_mm = 0.0;  // NaN when not solved
  std::string failure;
};

struct Protocol1Report {
  std::uint64_t seed = 0;
  double setup_radius_mm = 0.0;
  std::vector<DigitsResult> per_digits;    // ascending digits
  std::vector<PointDeviation> deviations;  // digits-major, then point id
};

struct Protocol1Options {
  double setup_radius_mm = 1.0;
  SolverOptions solver{};
};

/// Digits are sorted ascending and de-duplicated. Throws ConfigError on an
/// empty list. Solver failures are recorded per digit count.
Protocol1Report run_protocol1(const NetworkConfig& config, std::span<const int> digits, std::uint64_t seed,
                              const Protocol1Options& options = {});

// ---------------------------------------------------------------- protocol 2

struct ExperimentSpec {
  std::string id;
  int digits = 20;
  bool with_uncertainties = false;
  int runs = 55;
  int repeats_per_length = 5;

  void validate() const;
};

/// Exp1..Exp4: (20, without), (20, with), (10, without), (10, with).
std::vector<ExperimentSpec> default_experiments(int runs = 55);

/// How per-run random streams are keyed.
enum class Seeding {
  /// Streams depend on (root seed, run index) only: every experiment sees the
  /// same setup values in run k, and every experiment with uncertainties the
  /// same simulated readings, so experiments differ only in what they vary.
  paired,
  /// Streams also depend on the experiment index.
  independent,
};

struct RunRecord {
  int run = 0;
  bool ok = false;
  int iterations = 0;
  std::string failure;
  std::vector<double> deviations_mm;  // empty unless ok
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<RunRecord> runs;
  std::vector<std::optional<double>> coverage_mm;  // per distance
  std::vector<std::string> coverage_errors;        // per distance, empty when computed
  std::optional<double> largest_coverage_mm;
  std::optional<double> mean_coverage_mm;
  int failed_runs = 0;
  bool valid = false;  // failures <= 10 % of runs and every coverage interval computed
};

struct Protocol2Report {
  std::uint64_t seed = 0;
  Seeding seeding = Seeding::paired;
  double setup_radius_mm = 0.0;
  double smr_position_um = 0.0;
  double edlen_um_per_m = 0.0;
  std::vector<double> nominal_distances_m;
  std::vector<ExperimentResult> experiments;
};

struct Protocol2Options {
  Seeding seeding = Seeding::paired;
  SolverOptions solver{};
  unsigned threads = 0;  // 0: hardware concurrency
};

Protocol2Report run_protocol2(const NetworkConfig& config, const UncertaintyBudget& budget,
                              std::span<const ExperimentSpec> experiments, std::uint64_t seed,
                              const Protocol2Options& options = {});

}  // namespace mlat

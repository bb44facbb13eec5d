#pragma once

#include "mlat/model.hpp"
#include "mlat/precision.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mlat {

struct SolverOptions {
  int max_iterations = 200;
  /// Relative step norm |dx| / |x| below which the iteration stops.
  /// Defaults to 10^(2 - digits) of the active context.
  std::optional<mp::Value> convergence_tolerance;
  double initial_damping = 1e-3;
  double damping_increase = 10.0;
  double damping_decrease = 0.5;

  void validate() const;
  mp::Value tolerance_for(const mp::Context& ctx) const;
};

struct SolutionReport {
  ParameterVector solved;
  mp::Value residual_norm;  // sqrt of the sum of squared residuals, metres
  int iterations = 0;       // damped trial steps taken
  bool converged = false;
  int digits_used = 0;
  mp::Value final_relative_step;
  /// Sum of squared residuals at the start and after each accepted step.
  std::vector<mp::Value> objective_history;
};

/// Levenberg-Marquardt on the gauge-fixed network. Each trial solves
/// (JᵀJ + λ·diag(JᵀJ)) δ = -Jᵀr by Cholesky factorization; every arithmetic
/// operation, including the factorization, is rounded in ctx. Initial values
/// and observed lengths are rounded into ctx once on entry.
///
/// Running out of iterations is reported through `converged`; a normal matrix
/// that is not positive definite throws RankDeficiencyError.
SolutionReport solve(const NetworkConfig& config, std::span<const Observation> observations,
                     const ParameterVector& initial, const mp::Context& ctx, const SolverOptions& options = {});

/// Sum of squared residuals at params, in ctx.
mp::Value sum_of_squares(const ParameterVector& params, std::span<const Observation> observations,
                         const mp::Context& ctx);

}  // namespace mlat

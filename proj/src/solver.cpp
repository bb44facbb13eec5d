#include "mlat/solver.hpp"

#include "mlat/errors.hpp"

#include <string>
#include <utility>

namespace mlat {

void SolverOptions::validate() const {
  if (max_iterations < 1) throw ConfigError("solver max_iterations must be >= 1");
  if (convergence_tolerance && (convergence_tolerance->negative() || convergence_tolerance->is_zero())) {
    throw ConfigError("solver convergence tolerance must be > 0");
  }
  if (!(initial_damping > 0.0)) throw ConfigError("solver initial damping must be > 0");
  if (!(damping_increase > 1.0)) throw ConfigError("solver damping increase factor must be > 1");
  if (!(damping_decrease > 0.0 && damping_decrease < 1.0)) {
    throw ConfigError("solver damping decrease factor must lie in (0, 1)");
  }
}

mp::Value SolverOptions::tolerance_for(const mp::Context& ctx) const {
  if (convergence_tolerance) return ctx.round(*convergence_tolerance);
  return mp::Value::power_of_ten(2 - ctx.digits());
}

mp::Value sum_of_squares(const ParameterVector& params, std::span<const Observation> observations,
                         const mp::Context& ctx) {
  mp::Value ssr;
  for (const auto& o : observations) {
    const mp::Value r = residual(params, o, ctx);
    ssr = ctx.add(ssr, ctx.mul(r, r));
  }
  return ssr;
}

namespace {

// Dense symmetric matrix; only the lower triangle is referenced.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(int n) : n_(n), data_(static_cast<size_t>(n) * static_cast<size_t>(n)) {}

  int size() const { return n_; }
  mp::Value& at(int i, int j) { return data_[static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j)]; }
  const mp::Value& at(int i, int j) const {
    return data_[static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j)];
  }

 private:
  int n_;
  std::vector<mp::Value> data_;
};

struct NormalEquations {
  SymmetricMatrix jtj;
  std::vector<mp::Value> jtr;
};

NormalEquations assemble(const ParameterVector& x, std::span<const Observation> observations, const mp::Context& ctx) {
  const int n = x.size();
  NormalEquations ne{SymmetricMatrix(n), std::vector<mp::Value>(static_cast<size_t>(n))};
  for (const auto& o : observations) {
    const LinearizedObservation lin = linearize(x, o, ctx);
    for (int a = 0; a < lin.count; ++a) {
      const int ia = lin.index[static_cast<size_t>(a)];
      const mp::Value& pa = lin.partial[static_cast<size_t>(a)];
      mp::Value& g = ne.jtr[static_cast<size_t>(ia)];
      g = ctx.add(g, ctx.mul(pa, lin.residual));
      for (int b = 0; b < lin.count; ++b) {
        const int ib = lin.index[static_cast<size_t>(b)];
        if (ib > ia) continue;
        mp::Value& cell = ne.jtj.at(ia, ib);
        cell = ctx.add(cell, ctx.mul(pa, lin.partial[static_cast<size_t>(b)]));
      }
    }
  }
  return ne;
}

// Solves (A + λ diag A) δ = -g. Returns false, with the failing pivot, when the
// damped matrix is not positive definite.
bool damped_step(const NormalEquations& ne, const mp::Value& lambda, const mp::Context& ctx,
                 std::vector<mp::Value>& step, int& failed_pivot) {
  const int n = ne.jtj.size();
  SymmetricMatrix l(n);
  for (int j = 0; j < n; ++j) {
    const mp::Value& ajj = ne.jtj.at(j, j);
    mp::Value s = ctx.add(ajj, ctx.mul(lambda, ajj));
    for (int k = 0; k < j; ++k) s = ctx.sub(s, ctx.mul(l.at(j, k), l.at(j, k)));
    if (s.negative() || s.is_zero()) {
      failed_pivot = j;
      return false;
    }
    const mp::Value ljj = ctx.sqrt(s);
    l.at(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      mp::Value t = ne.jtj.at(i, j);
      for (int k = 0; k < j; ++k) t = ctx.sub(t, ctx.mul(l.at(i, k), l.at(j, k)));
      l.at(i, j) = ctx.div(t, ljj);
    }
  }

  // L y = -g
  std::vector<mp::Value> y(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    mp::Value t = -ne.jtr[static_cast<size_t>(i)];
    for (int k = 0; k < i; ++k) t = ctx.sub(t, ctx.mul(l.at(i, k), y[static_cast<size_t>(k)]));
    y[static_cast<size_t>(i)] = ctx.div(t, l.at(i, i));
  }
  // Lᵀ δ = y
  step.assign(static_cast<size_t>(n), mp::Value());
  for (int i = n - 1; i >= 0; --i) {
    mp::Value t = y[static_cast<size_t>(i)];
    for (int k = i + 1; k < n; ++k) t = ctx.sub(t, ctx.mul(l.at(k, i), step[static_cast<size_t>(k)]));
    step[static_cast<size_t>(i)] = ctx.div(t, l.at(i, i));
  }
  return true;
}

mp::Value squared_norm(std::span<const mp::Value> v, const mp::Context& ctx) {
  mp::Value s;
  for (const auto& x : v) s = ctx.add(s, ctx.mul(x, x));
  return s;
}

}  // namespace

SolutionReport solve(const NetworkConfig& config, std::span<const Observation> observations,
                     const ParameterVector& initial, const mp::Context& ctx, const SolverOptions& options) {
  options.validate();
  config.validate();
  const ParameterLayout layout(config.station_count(), config.point_count());
  if (!(initial.layout() == layout)) {
    throw StructuralError("initial parameter vector does not match the network layout");
  }
  if (static_cast<int>(observations.size()) < layout.size()) {
    throw ConfigError("underdetermined: " + std::to_string(observations.size()) + " observations for " +
                      std::to_string(layout.size()) + " unknowns");
  }
  validate_observations(layout, observations);

  std::vector<Observation> obs(observations.begin(), observations.end());
  for (auto& o : obs) o.length = ctx.round(o.length);

  const mp::Value tolerance = options.tolerance_for(ctx);
  const mp::Value tolerance_sq = ctx.mul(tolerance, tolerance);
  const mp::Value increase = ctx.round(mp::Value::from_double(options.damping_increase));
  const mp::Value decrease = ctx.round(mp::Value::from_double(options.damping_decrease));
  mp::Value lambda = ctx.round(mp::Value::from_double(options.initial_damping));

  ParameterVector x = initial.rounded(ctx);
  mp::Value ssr = sum_of_squares(x, obs, ctx);

  SolutionReport report{x, {}, 0, false, ctx.digits(), {}, {ssr}};
  if (ssr.is_zero()) {
    report.converged = true;
    return report;
  }

  std::optional<NormalEquations> ne;
  std::vector<mp::Value> step;
  for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
    report.iterations = iteration;
    if (!ne) ne = assemble(x, obs, ctx);

    int pivot = -1;
    if (!damped_step(*ne, lambda, ctx, step, pivot)) {
      throw RankDeficiencyError(iteration, "singular normal matrix at iteration " + std::to_string(iteration) +
                                               " (pivot " + std::to_string(pivot) + ")");
    }

    std::vector<mp::Value> trial(x.values().begin(), x.values().end());
    for (size_t i = 0; i < trial.size(); ++i) trial[i] = ctx.add(trial[i], step[i]);
    ParameterVector candidate(layout, std::move(trial));
    const mp::Value ssr_new = sum_of_squares(candidate, obs, ctx);

    const mp::Value step_sq = squared_norm(step, ctx);
    const mp::Value x_sq = squared_norm(x.values(), ctx);
    const bool small_step = step_sq <= ctx.mul(tolerance_sq, x_sq);

    if (ssr_new < ssr) {
      x = std::move(candidate);
      ssr = ssr_new;
      report.objective_history.push_back(ssr);
      lambda = ctx.mul(lambda, decrease);
      ne.reset();
    } else {
      lambda = ctx.mul(lambda, increase);
    }

    report.final_relative_step = x_sq.is_zero() ? ctx.sqrt(step_sq) : ctx.sqrt(ctx.div(step_sq, x_sq));
    if (small_step) {
      report.converged = true;
      break;
    }
  }

  report.solved = std::move(x);
  report.residual_norm = ctx.sqrt(ssr);
  return report;
}

}  // namespace mlat

#include <cmath>

#include "hessavg/solver.hpp"

namespace hessavg {

void SolverConfig::validate() const {
  require(beta > 0.0 && beta < 0.5, "SolverConfig: beta must lie in (0, 1/2)");
  require(rho_backtrack > 0.0 && rho_backtrack < 1.0, "SolverConfig: rho must lie in (0, 1)");
  require(max_iter >= 0, "SolverConfig: max_iter must be >= 0");
  require(tol_hstar > 0.0, "SolverConfig: tol must be positive");
  hessavg::validate(oracle);
}

namespace {

IterationRecord initial_record(double f, const Vector& g, const Vector& x, const ReferenceSolution& ref) {
  IterationRecord rec;
  rec.f_value = f;
  rec.grad_norm = g.norm();
  rec.hstar_error = hstar_error(x, ref);
  return rec;
}

bool finite_state(double f, const Vector& x) { return std::isfinite(f) && x.allFinite(); }

}  // namespace

RunResult run(const Objective& obj, const Vector& x0, const SolverConfig& config, const ReferenceSolution& ref,
              const RunObserver& observer) {
  config.validate();
  require(static_cast<std::size_t>(x0.size()) == obj.dimension(), "run: x0 has the wrong dimension");

  RunResult result;
  Vector x = x0;
  double f = obj.value(x);
  Vector g = obj.gradient(x);
  result.records.push_back(initial_record(f, g, x, ref));
  if (result.records.back().hstar_error <= config.tol_hstar) {
    result.converged = true;
    result.iterations_to_tol = 0;
  }

  AveragingState state;
  for (int t = 0; t < config.max_iter && !result.converged; ++t) {
    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(t));
    const HessianEstimate est = estimate(config.oracle, obj, x, rng, static_cast<std::uint64_t>(t));
    state = update(std::move(state), config.weights, est.matrix);

    IterationRecord rec;
    rec.t = t + 1;
    const auto p = newton_direction(state.h_tilde, g);
    if (!p) {
      rec.skipped = true;
    } else {
      const LineSearchResult ls = line_search(obj, x, f, g, *p, config.beta, config.rho_backtrack);
      rec.backtracks = ls.backtracks;
      if (ls.success) {
        x += ls.stepsize * *p;
        f = ls.f_new;
        g = obj.gradient(x);
        rec.stepsize = ls.stepsize;
      } else {
        rec.skipped = true;
      }
    }

    rec.f_value = f;
    rec.grad_norm = g.norm();
    rec.hstar_error = hstar_error(x, ref);
    result.records.push_back(rec);
    if (observer) observer(rec, state);

    if (!finite_state(f, x)) {
      result.abort_reason = "non-finite objective or iterate at iteration " + std::to_string(t + 1);
      break;
    }
    if (rec.hstar_error <= config.tol_hstar) {
      result.converged = true;
      result.iterations_to_tol = t + 1;
    }
  }
  result.final_x = x;
  return result;
}

RunResult bfgs_run(const Objective& obj, const Vector& x0, double beta, double rho_backtrack, int max_iter,
                   double tol, const ReferenceSolution& ref) {
  require(beta > 0.0 && beta < 0.5, "bfgs_run: beta must lie in (0, 1/2)");
  require(rho_backtrack > 0.0 && rho_backtrack < 1.0, "bfgs_run: rho must lie in (0, 1)");
  require(static_cast<std::size_t>(x0.size()) == obj.dimension(), "bfgs_run: x0 has the wrong dimension");

  const auto d = x0.size();
  RunResult result;
  Vector x = x0;
  double f = obj.value(x);
  Vector g = obj.gradient(x);
  Matrix Hinv = Matrix::Identity(d, d);
  result.records.push_back(initial_record(f, g, x, ref));
  if (result.records.back().hstar_error <= tol) {
    result.converged = true;
    result.iterations_to_tol = 0;
  }

  for (int t = 0; t < max_iter && !result.converged; ++t) {
    IterationRecord rec;
    rec.t = t + 1;
    Vector p = -(Hinv * g);
    if (!(g.dot(p) < 0.0)) {
      // Curvature safeguards keep Hinv SPD, so this only triggers on round-off;
      // restart from the steepest-descent model.
      Hinv.setIdentity();
      p = -g;
    }
    if (g.squaredNorm() == 0.0) {
      rec.skipped = true;
    } else {
      const LineSearchResult ls = line_search(obj, x, f, g, p, beta, rho_backtrack);
      rec.backtracks = ls.backtracks;
      if (ls.success) {
        const Vector s = ls.stepsize * p;
        x += s;
        f = ls.f_new;
        const Vector g_new = obj.gradient(x);
        const Vector y = g_new - g;
        g = g_new;
        rec.stepsize = ls.stepsize;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
          const double r = 1.0 / sy;
          const Vector Hy = Hinv * y;
          const double yHy = y.dot(Hy);
          // (I - r s y^T) Hinv (I - r y s^T) + r s s^T, expanded.
          Hinv.noalias() -= r * (s * Hy.transpose() + Hy * s.transpose());
          Hinv.noalias() += (r * r * yHy + r) * (s * s.transpose());
        }
      } else {
        rec.skipped = true;
      }
    }
    rec.f_value = f;
    rec.grad_norm = g.norm();
    rec.hstar_error = hstar_error(x, ref);
    result.records.push_back(rec);
    if (!finite_state(f, x)) {
      result.abort_reason = "non-finite objective or iterate at iteration " + std::to_string(t + 1);
      break;
    }
    if (rec.hstar_error <= tol) {
      result.converged = true;
      result.iterations_to_tol = t + 1;
    }
  }
  result.final_x = x;
  return result;
}

std::vector<double> ratio_diagnostics(const std::vector<double>& errors) {
  std::vector<double> ratios;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i] == 0.0) continue;
    ratios.push_back(errors[i + 1] / errors[i]);
  }
  return ratios;
}

std::vector<double> ratio_diagnostics(const RunResult& result) {
  std::vector<double> errors;
  errors.reserve(result.records.size());
  for (const auto& r : result.records) errors.push_back(r.hstar_error);
  return ratio_diagnostics(errors);
}

}  // namespace hessavg

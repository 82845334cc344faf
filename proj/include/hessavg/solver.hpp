#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hessavg/averaging.hpp"
#include "hessavg/oracles.hpp"
#include "hessavg/problem.hpp"
#include "hessavg/step.hpp"

namespace hessavg {

struct SolverConfig {
  double beta = 0.1;
  double rho_backtrack = 0.5;
  int max_iter = 999;
  double tol_hstar = 1e-6;
  OracleKind oracle = oracle::Exact{};
  WeightSequence weights = weights::Uniform{};
  std::uint64_t seed = 0;

  void validate() const;
};

// Record t = 0 describes x_0; record t >= 1 describes the iterate after
// iteration t - 1 of the loop.
struct IterationRecord {
  int t = 0;
  double f_value = 0.0;
  double grad_norm = 0.0;
  double hstar_error = 0.0;
  double stepsize = 0.0;  // 0 when skipped
  bool skipped = false;
  int backtracks = 0;
};

struct RunResult {
  std::vector<IterationRecord> records;
  bool converged = false;
  std::optional<int> iterations_to_tol;
  Vector final_x;
  std::string abort_reason;  // empty unless the run hit a non-finite value
};

// Called after every iteration with the freshly appended record and the
// averaging state that produced the step.
using RunObserver = std::function<void(const IterationRecord&, const AveragingState&)>;

// Stochastic Newton with Hessian averaging. Per iteration: draw H_hat_t from
// the oracle using make_stream(seed, t), fold it into the average (always,
// even if the step is then skipped), solve for the Newton direction, skip if
// unsolvable or not descent, else Armijo backtracking.
RunResult run(const Objective& obj, const Vector& x0, const SolverConfig& config, const ReferenceSolution& ref,
              const RunObserver& observer = {});

// BFGS with identity initial inverse Hessian and the same Armijo search and
// stopping rule. Pairs with s^T y <= 1e-12 ||s|| ||y|| skip the update.
RunResult bfgs_run(const Objective& obj, const Vector& x0, double beta, double rho_backtrack, int max_iter,
                   double tol, const ReferenceSolution& ref);

// e_{t+1} / e_t over consecutive hstar errors, omitting pairs with e_t = 0.
std::vector<double> ratio_diagnostics(const RunResult& result);
std::vector<double> ratio_diagnostics(const std::vector<double>& errors);

}  // namespace hessavg

#pragma once

#include <optional>

#include "hessavg/problem.hpp"

namespace hessavg {

// Solves H p = -g by Cholesky. Returns nullopt (skip) when H is not positive
// definite or the solution is not a strict descent direction.
std::optional<Vector> newton_direction(const Matrix& h, const Vector& g);

constexpr int kMaxBacktracks = 60;

struct LineSearchResult {
  double stepsize = 0.0;  // rho^backtracks on success, 0 on failure
  int backtracks = 0;
  bool success = false;
  double f_new = 0.0;
};

// Armijo backtracking: smallest j >= 0 with
// f(x + rho^j p) <= f(x) + rho^j * beta * g^T p, capped at kMaxBacktracks.
LineSearchResult line_search(const Objective& obj, const Vector& x, double f_x, const Vector& g,
                             const Vector& p, double beta, double rho_backtrack);

}  // namespace hessavg

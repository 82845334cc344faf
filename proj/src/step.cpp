#include <cmath>

#include <Eigen/Cholesky>

#include "hessavg/step.hpp"

namespace hessavg {

std::optional<Vector> newton_direction(const Matrix& h, const Vector& g) {
  require(h.rows() == h.cols() && h.rows() == g.size(), "newton_direction: dimension mismatch");
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Vector p = llt.solve(-g);
  if (!p.allFinite()) return std::nullopt;
  if (!(g.dot(p) < 0.0)) return std::nullopt;
  return p;
}

LineSearchResult line_search(const Objective& obj, const Vector& x, double f_x, const Vector& g,
                             const Vector& p, double beta, double rho_backtrack) {
  require(beta > 0.0 && beta < 0.5, "line_search: beta must lie in (0, 1/2)");
  require(rho_backtrack > 0.0 && rho_backtrack < 1.0, "line_search: rho must lie in (0, 1)");
  const double slope = g.dot(p);
  require(slope < 0.0, "line_search: p is not a descent direction");

  for (int j = 0; j <= kMaxBacktracks; ++j) {
    const double mu = std::pow(rho_backtrack, j);
    const double f_trial = obj.value(x + mu * p);
    if (std::isfinite(f_trial) && f_trial <= f_x + mu * beta * slope) return {mu, j, true, f_trial};
  }
  return {0.0, kMaxBacktracks, false, f_x};
}

}  // namespace hessavg

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "hessavg/kernels.hpp"
#include "hessavg/problem.hpp"
#include "hessavg/step.hpp"

namespace hessavg {

void Dataset::validate() const {
  require(A.rows() >= 1 && A.cols() >= 1, "Dataset: need n >= 1 and d >= 1");
  require(b.size() == static_cast<std::size_t>(A.rows()), "Dataset: one label per row");
  require(std::all_of(b.begin(), b.end(), [](int v) { return v == 1 || v == -1; }),
          "Dataset: labels must be -1 or +1");
  require(A.allFinite(), "Dataset: non-finite entry in A");
}

void Objective::check_dimension(const Vector& x) const {
  require(static_cast<std::size_t>(x.size()) == dimension(), "objective: dimension mismatch");
}

double log1pexp(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logistic_curvature(double u) {
  const double e = std::exp(-std::abs(u));
  const double denom = 1.0 + e;
  return e / (denom * denom);
}

// ---------------------------------------------------------------------------

RegularizedLogistic::RegularizedLogistic(Dataset data, double reg_nu)
    : data_(std::move(data)), reg_nu_(reg_nu) {
  data_.validate();
  require(reg_nu_ >= 0.0 && std::isfinite(reg_nu_), "RegularizedLogistic: reg_nu must be >= 0");
}

Vector RegularizedLogistic::margins(const Vector& x) const {
  check_dimension(x);
  Vector m;
  kernels::row_dots(data_.A, x, m);
  for (Eigen::Index i = 0; i < m.size(); ++i) m[i] *= data_.b[static_cast<std::size_t>(i)];
  return m;
}

double RegularizedLogistic::value(const Vector& x) const {
  const Vector m = margins(x);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) loss += log1pexp(-m[i]);
  return loss / static_cast<double>(data_.n()) + 0.5 * reg_nu_ * x.squaredNorm();
}

Vector RegularizedLogistic::gradient(const Vector& x) const {
  const Vector m = margins(x);
  const auto d = data_.d();
  const double inv_n = 1.0 / static_cast<double>(data_.n());
  Vector g = reg_nu_ * x;
  const auto& k = kernels::active();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double r = -data_.b[static_cast<std::size_t>(i)] * sigmoid(-m[i]) * inv_n;
    k.axpby(r, data_.A.row(i).data(), 1.0, g.data(), d);
  }
  return g;
}

Vector RegularizedLogistic::curvature_weights(const Vector& x) const {
  Vector l = margins(x);
  for (Eigen::Index i = 0; i < l.size(); ++i) l[i] = logistic_curvature(l[i]);
  return l;
}

Matrix RegularizedLogistic::hessian(const Vector& x) const {
  Vector w = curvature_weights(x) / static_cast<double>(data_.n());
  const auto d = static_cast<Eigen::Index>(data_.d());
  Matrix h = Matrix::Zero(d, d);
  kernels::weighted_gram(data_.A, std::span<const double>(w.data(), w.size()), {}, h);
  h.diagonal().array() += reg_nu_;
  return h;
}

RowMatrix RegularizedLogistic::sqrt_factor(const Vector& x) const {
  const Vector l = curvature_weights(x);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(data_.n()));
  RowMatrix M = data_.A;
  for (Eigen::Index i = 0; i < M.rows(); ++i) M.row(i) *= std::sqrt(l[i]) * inv_sqrt_n;
  return M;
}

// ---------------------------------------------------------------------------

QuadraticTest::QuadraticTest(Matrix Q, Vector c) : Q_(std::move(Q)), c_(std::move(c)) {
  require(Q_.rows() == Q_.cols() && Q_.rows() == c_.size() && c_.size() >= 1,
          "QuadraticTest: Q must be d x d and c length d");
  require((Q_ - Q_.transpose()).cwiseAbs().maxCoeff() == 0.0, "QuadraticTest: Q must be symmetric");
  Eigen::LLT<Matrix> llt(Q_);
  require(llt.info() == Eigen::Success, "QuadraticTest: Q must be positive definite");
}

double QuadraticTest::value(const Vector& x) const {
  check_dimension(x);
  return 0.5 * x.dot(Q_ * x) - c_.dot(x);
}

Vector QuadraticTest::gradient(const Vector& x) const {
  check_dimension(x);
  return Q_ * x - c_;
}

Matrix QuadraticTest::hessian(const Vector& x) const {
  check_dimension(x);
  return Q_;
}

// ---------------------------------------------------------------------------

namespace {

struct NewtonTrace {
  std::vector<Vector> path;
  double grad_norm = 0.0;
  bool converged = false;
};

NewtonTrace damped_newton(const Objective& obj, const Vector& x0, const ReferenceOptions& opts) {
  require(static_cast<std::size_t>(x0.size()) == obj.dimension(), "solve_reference: dimension mismatch");
  NewtonTrace tr;
  Vector x = x0;
  tr.path.push_back(x);
  double f = obj.value(x);
  for (int it = 0; it <= opts.max_iter; ++it) {
    const Vector g = obj.gradient(x);
    tr.grad_norm = g.norm();
    if (tr.grad_norm <= opts.grad_tol) {
      tr.converged = true;
      return tr;
    }
    if (it == opts.max_iter) break;
    const auto p = newton_direction(obj.hessian(x), g);
    if (!p) throw ReferenceSolveError("solve_reference: Hessian not positive definite", tr.grad_norm);
    // Armijo is undecidable once the predicted decrease is below the
    // resolution of f; a full Newton step is then the right move inside the
    // quadratic region.
    const double slope = g.dot(*p);
    const bool resolvable = -slope > 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f));
    const auto ls = resolvable ? line_search(obj, x, f, g, *p, opts.beta, opts.rho) : LineSearchResult{};
    if (!ls.success) {
      x += *p;
      f = obj.value(x);
    } else {
      x += ls.stepsize * *p;
      f = ls.f_new;
    }
    tr.path.push_back(x);
  }
  return tr;
}

}  // namespace

std::vector<Vector> damped_newton_path(const Objective& obj, const Vector& x0, const ReferenceOptions& opts) {
  return damped_newton(obj, x0, opts).path;
}

ReferenceSolution solve_reference(const Objective& obj, const Vector& x0, const ReferenceOptions& opts) {
  NewtonTrace tr = damped_newton(obj, x0, opts);
  if (!tr.converged) {
    throw ReferenceSolveError("solve_reference: gradient norm did not reach tolerance within the iteration cap",
                              tr.grad_norm);
  }
  ReferenceSolution ref;
  ref.x_star = tr.path.back();
  ref.H_star = obj.hessian(ref.x_star);
  ref.grad_norm_at_star = tr.grad_norm;
  ref.iterations = static_cast<int>(tr.path.size()) - 1;
  return ref;
}

double hstar_error(const Vector& x, const ReferenceSolution& ref) {
  require(x.size() == ref.x_star.size(), "hstar_error: dimension mismatch");
  const Vector e = x - ref.x_star;
  return std::sqrt(std::max(0.0, e.dot(ref.H_star * e)));
}

}  // namespace hessavg

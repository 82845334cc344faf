#pragma once

#include <cstddef>
#include <vector>

#include "hessavg/types.hpp"

namespace hessavg {

// Design matrix with +-1 labels.
struct Dataset {
  RowMatrix A;
  std::vector<int> b;

  std::size_t n() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(A.cols()); }

  // Throws ContractViolation if the invariants (n, d >= 1, labels in {-1, +1},
  // finite entries) do not hold.
  void validate() const;
};

class GlmObjective;

// Twice-differentiable objective with exact derivatives.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Matrix hessian(const Vector& x) const = 0;

  // Non-null when the Hessian has the form (1/n) A^T diag(l) A + nu I, which
  // is what sketching oracles need to build the square-root factor.
  virtual const GlmObjective* glm() const { return nullptr; }

 protected:
  void check_dimension(const Vector& x) const;
};

class GlmObjective : public Objective {
 public:
  virtual const RowMatrix& design() const = 0;
  virtual double reg_nu() const = 0;
  // Per-row curvature l_j in the Hessian (1/n) sum_j l_j a_j a_j^T + nu I.
  virtual Vector curvature_weights(const Vector& x) const = 0;

  const GlmObjective* glm() const override { return this; }
};

// (1/n) sum_i log(1 + exp(-b_i a_i^T x)) + (nu/2) ||x||^2
class RegularizedLogistic final : public GlmObjective {
 public:
  RegularizedLogistic(Dataset data, double reg_nu);

  const Dataset& dataset() const { return data_; }

  std::size_t dimension() const override { return data_.d(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;

  const RowMatrix& design() const override { return data_.A; }
  double reg_nu() const override { return reg_nu_; }
  Vector curvature_weights(const Vector& x) const override;

  // M = (1/sqrt(n)) diag(l)^{1/2} A, so that hessian(x) = M^T M + nu I.
  RowMatrix sqrt_factor(const Vector& x) const;

 private:
  Vector margins(const Vector& x) const;  // b_i a_i^T x

  Dataset data_;
  double reg_nu_;
};

// (1/2) x^T Q x - c^T x
class QuadraticTest final : public Objective {
 public:
  QuadraticTest(Matrix Q, Vector c);

  const Matrix& Q() const { return Q_; }
  const Vector& c() const { return c_; }

  std::size_t dimension() const override { return static_cast<std::size_t>(c_.size()); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;

 private:
  Matrix Q_;
  Vector c_;
};

// Scalar logistic helpers, overflow-safe for any finite argument.
double log1pexp(double u);          // log(1 + e^u)
double sigmoid(double u);           // 1 / (1 + e^{-u})
double logistic_curvature(double u);  // e^u / (1 + e^u)^2

struct ReferenceSolution {
  Vector x_star;
  Matrix H_star;
  double grad_norm_at_star = 0.0;
  int iterations = 0;
};

struct ReferenceOptions {
  double grad_tol = 1e-13;
  int max_iter = 200;
  double beta = 0.1;
  double rho = 0.5;
};

// Thrown when the damped Newton reference solve does not reach grad_tol.
class ReferenceSolveError : public NumericalFailure {
 public:
  ReferenceSolveError(const std::string& what, double grad_norm)
      : NumericalFailure(what), grad_norm(grad_norm) {}
  double grad_norm;
};

// Exact damped Newton (Cholesky solve + Armijo backtracking) to a tight
// gradient tolerance. Requires a strongly convex objective.
ReferenceSolution solve_reference(const Objective& obj, const Vector& x0,
                                  const ReferenceOptions& opts = {});

// Damped Newton iterates x_0, x_1, ... as visited by solve_reference.
std::vector<Vector> damped_newton_path(const Objective& obj, const Vector& x0,
                                       const ReferenceOptions& opts = {});

// sqrt((x - x*)^T H* (x - x*))
double hstar_error(const Vector& x, const ReferenceSolution& ref);

}  // namespace hessavg

#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hessavg/averaging.hpp"

namespace hessavg {

// Thrown when the inputs fall outside the region where the bounds are stated
// (d / delta < e, epsilon outside (0, 1), ...).
class TheoryPreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct TheoryInputs {
  double kappa = 1.0;       // lambda_max / lambda_min of the Hessian (not kappa_A)
  double lambda_min = 1.0;
  double upsilon = 0.0;     // Upsilon_E / lambda_min
  double epsilon = 0.5;
  double delta = 0.01;
  std::size_t d = 1;
  double radius_nu = 1.0;
  double beta = 0.1;
  double rho = 0.5;
  double lipschitz_L = 1.0;
  double f0_gap = 1.0;
  double psi = 1.0;
  WeightSequence weights = weights::Uniform{};

  // Throws TheoryPreconditionError.
  void validate() const;
};

struct TransitionReport {
  double t1 = 0, t2 = 0, t_total = 0, j_transition = 0, k_transition = 0;
  double i1 = 0, i_total = 0, u_transition = 0, v_transition = 0;
  bool t2_clamped = false;
};

double t1(const TheoryInputs& in);
double phi_rate(const TheoryInputs& in);

struct T2Value {
  double value = 0.0;
  bool clamped = false;  // log argument <= 1, value forced to 0
};
T2Value t2(const TheoryInputs& in);

// J = 4 T kappa / nu
double j_transition(const TheoryInputs& in, double t_total);

// The two terms of rho_t separately and their sum.
struct RateTerms {
  double first = 0.0;
  double second = 0.0;
  double total() const { return first + second; }
};
RateTerms rho_terms(const TheoryInputs& in, double t_total, double j, double t);
double rho_t(const TheoryInputs& in, double t_total, double j, double t);

// kNever when upsilon == 0; clamped at 0.
double k_transition(const TheoryInputs& in, double t_total, double j);

// g(t) = log(d (t+1) / delta) * w'(t) / w(t)
double i1_expression(const TheoryInputs& in, double t);
double i1_threshold(const TheoryInputs& in);
// sup{t >= 0 integer : g(t) >= threshold} + 1, or 0 when no t qualifies.
double i1(const TheoryInputs& in);

// Solves w(I + U) = 2 w(I - 1) kappa / nu for U >= 0; 0 if the target is
// already below w(I).
double u_transition(const TheoryInputs& in, double i_total);

RateTerms theta_terms(const TheoryInputs& in, double i_total, double u, double t);
double theta_t(const TheoryInputs& in, double i_total, double u, double t);

// ln of w(t) w'(t) log(d (t+1) / delta), and of the right-hand side
// w(I-1)^2 kappa^2 / (Psi^2 Upsilon^2).
double v_lhs_log(const TheoryInputs& in, double t);
double v_rhs_log(const TheoryInputs& in, double i_total);
// Smallest integer t >= I + U with lhs >= rhs; kNever when upsilon == 0.
double v_transition(const TheoryInputs& in, double i_total, double u);

// Full report. The I/U/V fields need a weight sequence (not LastOnly).
TransitionReport transitions(const TheoryInputs& in);

// Substitute-back checks of every calculator in the report, plus monotone
// sweeps of rho_t and theta_t on a log-spaced grid up to sweep_max.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};
std::vector<CheckResult> self_check(const TheoryInputs& in, const TransitionReport& r, double sweep_max = 1e6);
bool all_pass(const std::vector<CheckResult>& checks);

// min(1, 2d exp(-(eta^2/2) / (upsilon_e^2 sum z^2 + z_max upsilon_e eta)))
double freedman_bound(double eta, double upsilon_e, const std::vector<double>& z, std::size_t d);
// The eta at which freedman_bound equals delta (before clamping).
double freedman_eta(double delta, double upsilon_e, const std::vector<double>& z, std::size_t d);

}  // namespace hessavg

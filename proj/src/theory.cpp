#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "hessavg/theory.hpp"

namespace hessavg {

namespace {

void pre(bool cond, const std::string& what) {
  if (!cond) throw TheoryPreconditionError(what);
}

// 8 Upsilon / epsilon with the 0/0 case (exact oracle) read as 0.
double noise_ratio(double upsilon, double epsilon) {
  if (upsilon == 0.0) return 0.0;
  pre(epsilon > 0.0, "epsilon must be positive when upsilon > 0");
  return 8.0 * upsilon / epsilon;
}

double log_d_over_delta(const TheoryInputs& in, double m) {
  return std::log(static_cast<double>(in.d) * m / in.delta);
}

void need_weights(const TheoryInputs& in, const char* what) {
  if (std::holds_alternative<weights::LastOnly>(in.weights))
    throw UnsupportedOperation(std::string(what) + " needs a weight sequence; noavg has none");
}

}  // namespace

void TheoryInputs::validate() const {
  pre(kappa >= 1.0, "kappa must be >= 1");
  pre(lambda_min > 0.0, "lambda_min must be positive");
  pre(upsilon >= 0.0 && std::isfinite(upsilon), "upsilon must be finite and >= 0");
  pre(epsilon >= 0.0 && epsilon < 1.0, "epsilon must lie in [0, 1)");
  pre(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  pre(d >= 1, "d must be >= 1");
  pre(static_cast<double>(d) / delta >= std::numbers::e, "need d / delta >= e");
  pre(radius_nu > 0.0 && radius_nu <= 1.0, "nu must lie in (0, 1]");
  pre(beta > 0.0 && beta < 0.5, "beta must lie in (0, 1/2)");
  pre(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
  pre(lipschitz_L >= 0.0, "L must be >= 0");
  pre(f0_gap >= 0.0, "f0_gap must be >= 0");
  pre(psi >= 1.0, "psi must be >= 1");
}

double t1(const TheoryInputs& in) {
  in.validate();
  const double a = std::max(1.0, noise_ratio(in.upsilon, in.epsilon));
  return 4.0 * a * a * log_d_over_delta(in, a);
}

double phi_rate(const TheoryInputs& in) {
  in.validate();
  return 4.0 * in.rho * in.beta * (1.0 - in.beta) * (1.0 - in.epsilon) / (in.kappa * in.kappa * (1.0 + in.epsilon));
}

T2Value t2(const TheoryInputs& in) {
  const double phi = phi_rate(in);
  const double nu = in.radius_nu;
  const double arg = 3.0 * in.lipschitz_L * in.lipschitz_L * in.f0_gap /
                     (nu * nu * in.lambda_min * in.lambda_min * in.lambda_min);
  if (!(arg > 1.0)) return {0.0, true};
  return {std::log(arg) / phi, false};
}

double j_transition(const TheoryInputs& in, double t_total) { return 4.0 * t_total * in.kappa / in.radius_nu; }

RateTerms rho_terms(const TheoryInputs& in, double t_total, double j, double t) {
  require(t >= 0.0, "rho_t: t must be >= 0");
  const double m = t_total + j + t + 1.0;
  RateTerms r;
  r.first = 4.0 * t_total * in.kappa / m;
  if (in.upsilon > 0.0) r.second = 8.0 * in.upsilon * std::sqrt(log_d_over_delta(in, m) / m);
  return r;
}

double rho_t(const TheoryInputs& in, double t_total, double j, double t) {
  return rho_terms(in, t_total, j, t).total();
}

double k_transition(const TheoryInputs& in, double t_total, double j) {
  in.validate();
  if (in.upsilon == 0.0) return kNever;
  const double lg = log_d_over_delta(in, t_total);
  require(lg > 0.0, "k_transition: need d T / delta > 1");
  const double k = t_total * t_total * in.kappa * in.kappa / (4.0 * in.upsilon * in.upsilon * lg) - t_total - j;
  return std::max(0.0, k);
}

double i1_expression(const TheoryInputs& in, double t) {
  return log_d_over_delta(in, t + 1.0) * weight_log_derivative(in.weights, t);
}

double i1_threshold(const TheoryInputs& in) {
  if (in.upsilon == 0.0) return 1.0;
  pre(in.epsilon > 0.0, "epsilon must be positive when upsilon > 0");
  const double a = std::min(in.epsilon / (8.0 * in.psi * in.upsilon), 1.0);
  return a * a;
}

double i1(const TheoryInputs& in) {
  in.validate();
  need_weights(in, "i1");
  const double thr = i1_threshold(in);
  auto above = [&](double t) { return i1_expression(in, t) >= thr; };

  // The expression can rise first (LogPower has w'(0) = 0) but every
  // implemented kind is decreasing well before t = 64.
  constexpr double kScan = 64.0;
  double last = -1.0;
  for (double t = 0.0; t <= kScan; t += 1.0)
    if (above(t)) last = t;
  if (last < kScan) return last + 1.0;

  double lo = kScan;  // above(lo)
  double hi = 2.0 * kScan;
  while (above(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0x1p62) throw NumericalFailure("i1: expression does not decay");
  }
  while (hi - lo > 1.0) {
    const double mid = std::floor(0.5 * (lo + hi));
    if (mid <= lo || mid >= hi) break;  // past 2^53 the grid is coarser than 1
    (above(mid) ? lo : hi) = mid;
  }
  return lo + 1.0;
}

double u_transition(const TheoryInputs& in, double i_total) {
  in.validate();
  need_weights(in, "u_transition");
  require(i_total >= 0.0, "u_transition: I must be >= 0");
  const double log_target = std::log(2.0 * in.kappa / in.radius_nu) + log_weight(in.weights, i_total - 1.0);
  auto lw = [&](double u) { return log_weight(in.weights, i_total + u); };
  if (!(log_target > lw(0.0))) return 0.0;

  double lo = 0.0;
  double hi = 1.0;
  while (lw(hi) < log_target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0x1p62) throw NumericalFailure("u_transition: weights do not reach the target");
  }
  // Stop once w(I + U) matches the target to well inside 1e-6 relative, or U
  // itself is pinned to 1e-9.
  for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = lw(mid);
    if (std::abs(v - log_target) <= 1e-10) return mid;
    (v < log_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RateTerms theta_terms(const TheoryInputs& in, double i_total, double u, double t) {
  need_weights(in, "theta_t");
  require(t >= 0.0, "theta_t: t must be >= 0");
  const double m = i_total + u + t;
  RateTerms r;
  r.first = 6.0 * in.kappa * std::exp(log_weight(in.weights, i_total - 1.0) - log_weight(in.weights, m));
  if (in.upsilon > 0.0)
    r.second = 8.0 * in.psi * in.upsilon * std::sqrt(log_d_over_delta(in, m + 1.0) * weight_log_derivative(in.weights, m));
  return r;
}

double theta_t(const TheoryInputs& in, double i_total, double u, double t) {
  return theta_terms(in, i_total, u, t).total();
}

double v_lhs_log(const TheoryInputs& in, double t) {
  const double wl = weight_log_derivative(in.weights, t);
  const double lg = log_d_over_delta(in, t + 1.0);
  if (wl <= 0.0 || lg <= 0.0) return -std::numeric_limits<double>::infinity();
  return 2.0 * log_weight(in.weights, t) + std::log(wl) + std::log(lg);
}

double v_rhs_log(const TheoryInputs& in, double i_total) {
  return 2.0 * log_weight(in.weights, i_total - 1.0) + 2.0 * std::log(in.kappa) -
         2.0 * std::log(in.psi * in.upsilon);
}

double v_transition(const TheoryInputs& in, double i_total, double u) {
  in.validate();
  need_weights(in, "v_transition");
  if (in.upsilon == 0.0) return kNever;
  const double rhs = v_rhs_log(in, i_total);
  auto ok = [&](double t) { return v_lhs_log(in, t) >= rhs; };

  const double start = std::ceil(i_total + u);
  if (ok(start)) return start;
  double lo = start;  // !ok(lo)
  double step = 1.0;
  double hi = start + step;
  while (!ok(hi)) {
    lo = hi;
    step *= 2.0;
    hi = start + step;
    if (step > 0x1p62) throw NumericalFailure("v_transition: inequality never holds");
  }
  while (hi - lo > 1.0) {
    const double mid = std::floor(0.5 * (lo + hi));
    if (mid <= lo || mid >= hi) break;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

TransitionReport transitions(const TheoryInputs& in) {
  in.validate();
  TransitionReport r;
  r.t1 = t1(in);
  const T2Value v2 = t2(in);
  r.t2 = v2.value;
  r.t2_clamped = v2.clamped;
  r.t_total = r.t1 + r.t2;
  r.j_transition = j_transition(in, r.t_total);
  r.k_transition = k_transition(in, r.t_total, r.j_transition);
  r.i1 = i1(in);
  r.i_total = r.i1 + r.t2;
  r.u_transition = u_transition(in, r.i_total);
  r.v_transition = v_transition(in, r.i_total, r.u_transition);
  return r;
}

namespace {

void check_simplex(const std::vector<double>& z) {
  require(!z.empty(), "freedman: empty weight vector");
  double s = 0.0;
  for (double zi : z) {
    require(zi >= 0.0, "freedman: weights must be nonnegative");
    s += zi;
  }
  require(std::abs(s - 1.0) <= 1e-9, "freedman: weights must sum to 1");
}

std::pair<double, double> sum_sq_and_max(const std::vector<double>& z) {
  double sq = 0.0, mx = 0.0;
  for (double zi : z) {
    sq += zi * zi;
    mx = std::max(mx, zi);
  }
  return {sq, mx};
}

}  // namespace

double freedman_bound(double eta, double upsilon_e, const std::vector<double>& z, std::size_t d) {
  require(eta >= 0.0 && upsilon_e >= 0.0 && d >= 1, "freedman_bound: need eta, upsilon_e >= 0 and d >= 1");
  check_simplex(z);
  const auto [sq, mx] = sum_sq_and_max(z);
  const double denom = upsilon_e * upsilon_e * sq + mx * upsilon_e * eta;
  if (eta == 0.0) return 1.0;
  if (denom == 0.0) return 0.0;  // noiseless: any positive deviation is impossible
  const double p = 2.0 * static_cast<double>(d) * std::exp(-0.5 * eta * eta / denom);
  return std::clamp(p, 0.0, 1.0);
}

double freedman_eta(double delta, double upsilon_e, const std::vector<double>& z, std::size_t d) {
  require(delta > 0.0 && delta < 1.0 && upsilon_e >= 0.0 && d >= 1, "freedman_eta: bad arguments");
  check_simplex(z);
  const auto [sq, mx] = sum_sq_and_max(z);
  // eta^2 / 2 = L (U^2 sq + mx U eta), L = log(2d / delta)
  const double L = std::log(2.0 * static_cast<double>(d) / delta);
  const double b = L * mx * upsilon_e;
  return b + std::sqrt(b * b + 2.0 * L * upsilon_e * upsilon_e * sq);
}


namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 0, 1, ..., 100, then ~200 log-spaced points up to hi.
std::vector<double> sweep_grid(double hi) {
  std::vector<double> ts;
  for (double t = 0; t <= std::min(100.0, hi); t += 1.0) ts.push_back(t);
  for (double t = 100.0; t < hi;) {
    t = std::min(hi, std::floor(t * 1.05) + 1.0);
    ts.push_back(t);
  }
  return ts;
}

template <class F>
CheckResult decreasing_check(const std::string& name, const std::vector<double>& ts, const F& f) {
  double prev = f(ts.front());
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double cur = f(ts[k]);
    if (!(cur >= 0.0) || cur > prev) return {name, false, "increases at t = " + fmt(ts[k])};
    prev = cur;
  }
  return {name, true, ""};
}

}  // namespace

std::vector<CheckResult> self_check(const TheoryInputs& in, const TransitionReport& r, double sweep_max) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool pass, std::string detail = {}) {
    out.push_back({std::move(name), pass, pass ? std::string() : std::move(detail)});
  };

  {
    const double a = std::min(1.0, in.upsilon == 0.0 ? 1.0 : in.epsilon / (8.0 * in.upsilon));
    const double lhs = log_d_over_delta(in, r.t1 + 1.0) / (r.t1 + 1.0);
    add("t1", lhs <= a * a, "log(d(t+1)/delta)/(t+1) = " + fmt(lhs) + " > " + fmt(a * a));
  }
  add("t_total", r.t_total == r.t1 + r.t2, "t_total != t1 + t2");
  add("i_total", r.i_total == r.i1 + r.t2, "i_total != i1 + t2");
  add("j", r.j_transition == j_transition(in, r.t_total), "j != 4 T kappa / nu");

  if (in.upsilon == 0.0) {
    add("k", r.k_transition == kNever, "k must be inf when upsilon = 0");
  } else {
    const double rhs = r.t_total * r.t_total * in.kappa * in.kappa /
                       (4.0 * in.upsilon * in.upsilon * log_d_over_delta(in, r.t_total));
    const double lhs = r.t_total + r.j_transition + r.k_transition + 1.0;
    const double slack = 1e-9 * std::max(1.0, rhs);
    const bool ok = r.k_transition > 0.0 ? (lhs >= rhs - slack && lhs <= rhs + 1.0 + slack) : (lhs - 1.0 >= rhs - slack);
    add("k", ok, "T+J+K+1 = " + fmt(lhs) + " vs " + fmt(rhs));
  }

  if (std::holds_alternative<weights::LastOnly>(in.weights)) return out;

  {
    const double thr = i1_threshold(in);
    bool ok = i1_expression(in, r.i1) < thr;
    if (r.i1 >= 1.0) ok = ok && i1_expression(in, r.i1 - 1.0) >= thr;
    for (double t = r.i1 + 1.0; ok && t <= r.i1 + 1000.0; t += 1.0) ok = i1_expression(in, t) < thr;
    add("i1", ok, "sup property fails around t = " + fmt(r.i1));
  }
  {
    const double log_target = std::log(2.0 * in.kappa / in.radius_nu) + log_weight(in.weights, r.i_total - 1.0);
    const double at = log_weight(in.weights, r.i_total + r.u_transition);
    const bool ok = r.u_transition > 0.0 ? std::abs(at - log_target) <= 1e-6 : log_target <= at;
    add("u", ok, "log w(I+U) = " + fmt(at) + " vs target " + fmt(log_target));
  }
  if (in.upsilon == 0.0) {
    add("v", r.v_transition == kNever, "v must be inf when upsilon = 0");
  } else {
    const double rhs = v_rhs_log(in, r.i_total);
    bool ok = v_lhs_log(in, r.v_transition) >= rhs && r.v_transition >= r.i_total + r.u_transition;
    // predecessor on the grid; above 2^53 that is the next double down
    const double before = std::min(r.v_transition - 1.0, std::nextafter(r.v_transition, 0.0));
    if (before >= r.i_total + r.u_transition) ok = ok && v_lhs_log(in, before) < rhs;
    add("v", ok, "minimality fails at V = " + fmt(r.v_transition));
  }

  const auto ts = sweep_grid(sweep_max);
  out.push_back(decreasing_check("rho_t_decreasing", ts, [&](double t) { return rho_t(in, r.t_total, r.j_transition, t); }));
  out.push_back(decreasing_check("theta_t_decreasing", ts,
                                 [&](double t) { return theta_t(in, r.i_total, r.u_transition, t); }));
  return out;
}

bool all_pass(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

}  // namespace hessavg

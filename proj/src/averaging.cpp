#include <algorithm>
#include <cmath>
#include <limits>

#include "hessavg/averaging.hpp"
#include "hessavg/kernels.hpp"

namespace hessavg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void last_only_unsupported(const char* what) {
  throw UnsupportedOperation(std::string(what) + ": the no-averaging variant has no weight sequence");
}

}  // namespace

WeightSequence parse_variant(const std::string& name) {
  if (name == "noavg") return weights::LastOnly{};
  if (name == "unifavg") return weights::Uniform{};
  if (name == "weightavg") return weights::LogPower{};
  if (name.rfind("power:", 0) == 0) {
    const double p = std::stod(name.substr(6));
    require(p >= 1.0, "power weights need p >= 1");
    return weights::Power{p};
  }
  throw ContractViolation("unknown averaging variant '" + name + "'");
}

std::string variant_name(const WeightSequence& seq) {
  return std::visit(overloaded{[](const weights::LastOnly&) { return std::string("noavg"); },
                               [](const weights::Uniform&) { return std::string("unifavg"); },
                               [](const weights::Power& w) { return "power:" + std::to_string(w.p); },
                               [](const weights::LogPower&) { return std::string("weightavg"); }},
                    seq);
}

double log_weight(const WeightSequence& seq, double t) {
  require(t >= -1.0, "weight: t must be >= -1");
  if (t == -1.0) {
    if (std::holds_alternative<weights::LastOnly>(seq)) last_only_unsupported("weight");
    return -std::numeric_limits<double>::infinity();
  }
  const double u = std::log1p(t);  // ln(t + 1)
  return std::visit(overloaded{[](const weights::LastOnly&) -> double { last_only_unsupported("weight"); },
                               [&](const weights::Uniform&) { return u; },
                               [&](const weights::Power& w) { return w.p * u; },
                               [&](const weights::LogPower&) { return t < 0.0 ? u : u * u; }},
                    seq);
}

double weight(const WeightSequence& seq, double t) {
  const double lw = log_weight(seq, t);
  return std::isinf(lw) ? 0.0 : std::exp(lw);
}

double weight_log_derivative(const WeightSequence& seq, double t) {
  require(t >= 0.0, "weight_derivative: t must be >= 0");
  const double tp1 = t + 1.0;
  return std::visit(overloaded{[](const weights::LastOnly&) -> double { last_only_unsupported("weight_derivative"); },
                               [&](const weights::Uniform&) { return 1.0 / tp1; },
                               [&](const weights::Power& w) { return w.p / tp1; },
                               [&](const weights::LogPower&) { return 2.0 * std::log(tp1) / tp1; }},
                    seq);
}

double weight_derivative(const WeightSequence& seq, double t) {
  return weight(seq, t) * weight_log_derivative(seq, t);
}

std::vector<double> normalized_weights(const WeightSequence& seq, int t) {
  require(t >= 0, "normalized_weights: t must be >= 0");
  if (std::holds_alternative<weights::LastOnly>(seq)) last_only_unsupported("normalized_weights");
  const double lw_t = log_weight(seq, t);
  std::vector<double> z(static_cast<std::size_t>(t) + 1);
  double prev = 0.0;  // w_{i-1} / w_t
  for (int i = 0; i <= t; ++i) {
    const double cur = std::exp(log_weight(seq, i) - lw_t);
    z[static_cast<std::size_t>(i)] = cur - prev;
    prev = cur;
  }
  return z;
}

double psi_bound(const WeightSequence& seq, int horizon, int start) {
  require(horizon >= 1 && start >= 0 && start <= horizon, "psi_bound: need 0 <= start <= horizon, horizon >= 1");
  if (std::holds_alternative<weights::LastOnly>(seq)) last_only_unsupported("psi_bound");
  double psi = 1.0;
  for (int t = start; t <= horizon; ++t) {
    psi = std::max(psi, std::exp(log_weight(seq, t + 1) - log_weight(seq, t)));
    const double d0 = weight_log_derivative(seq, t);
    const double d1 = weight_log_derivative(seq, t + 1);
    if (d0 > 0.0) {
      // w'(t+1)/w'(t) = [w(t+1)/w(t)] * [(w'/w)(t+1) / (w'/w)(t)]
      psi = std::max(psi, std::exp(log_weight(seq, t + 1) - log_weight(seq, t)) * d1 / d0);
    }
  }
  return psi;
}

AveragingState update(AveragingState state, const WeightSequence& seq, const Matrix& h_hat) {
  require(h_hat.rows() == h_hat.cols(), "update: estimate must be square");
  const int t = state.t + 1;
  if (std::holds_alternative<weights::LastOnly>(seq)) {
    state.h_tilde = h_hat;
    state.t = t;
    return state;
  }
  if (state.t < 0) {
    state.h_tilde = h_hat;
    state.w_prev = weight(seq, 0);
    state.t = 0;
    return state;
  }
  require(state.h_tilde.rows() == h_hat.rows() && state.h_tilde.cols() == h_hat.cols(),
          "update: dimension mismatch");
  // Ratio w_{t-1}/w_t in log space; LogPower weights overflow past t ~ 1e11.
  const double ratio = std::exp(log_weight(seq, t - 1) - log_weight(seq, t));
  const auto n = static_cast<std::size_t>(h_hat.size());
  kernels::active().axpby(1.0 - ratio, h_hat.data(), ratio, state.h_tilde.data(), n);
  state.w_prev = weight(seq, t);
  state.t = t;
  return state;
}

}  // namespace hessavg

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "hessavg/types.hpp"

namespace hessavg {

namespace weights {
// Use the latest estimate only (no averaging).
struct LastOnly {};
// w_t = t + 1
struct Uniform {};
// w_t = (t + 1)^p, p >= 1
struct Power {
  double p;
};
// w_t = (t + 1)^{ln(t + 1)}
struct LogPower {};
}  // namespace weights

using WeightSequence = std::variant<weights::LastOnly, weights::Uniform, weights::Power, weights::LogPower>;

// noavg | unifavg | weightavg, plus "power:<p>".
WeightSequence parse_variant(const std::string& name);
std::string variant_name(const WeightSequence& seq);

// w(t) on the continuous extension, t >= -1, with w(-1) = 0. LogPower uses
// the linear bridge w(t) = t + 1 on [-1, 0). LastOnly throws UnsupportedOperation.
double weight(const WeightSequence& seq, double t);
// ln w(t); -inf at t = -1. Stays finite where w(t) itself would overflow.
double log_weight(const WeightSequence& seq, double t);
// w'(t) for t >= 0.
double weight_derivative(const WeightSequence& seq, double t);
// w'(t) / w(t) for t >= 0.
double weight_log_derivative(const WeightSequence& seq, double t);

// z_{i,t} = (w_i - w_{i-1}) / w_t for i = 0..t.
std::vector<double> normalized_weights(const WeightSequence& seq, int t);

// max over integer t in [start, horizon] of max(w(t+1)/w(t), w'(t+1)/w'(t)).
// Derivative ratios are taken only where w'(t) > 0 (LogPower has w'(0) = 0).
double psi_bound(const WeightSequence& seq, int horizon, int start = 0);

// Running weighted Hessian average. t = -1 before the first update.
struct AveragingState {
  Matrix h_tilde;
  double w_prev = 0.0;  // w(t) after the last update
  int t = -1;
};

// H_t = (w_{t-1}/w_t) H_{t-1} + (1 - w_{t-1}/w_t) H_hat; LastOnly replaces.
AveragingState update(AveragingState state, const WeightSequence& seq, const Matrix& h_hat);

}  // namespace hessavg

#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

#include "hessavg/problem.hpp"
#include "hessavg/rng.hpp"

namespace hessavg {

enum class Coherence { Low, High };

std::string_view to_string(Coherence c);
Coherence parse_coherence(std::string_view s);

struct DataGenConfig {
  std::size_t n = 1000;
  std::size_t d = 100;
  Coherence coherence_mode = Coherence::Low;
  double kappa_A = 100.0;
  double reg_nu = 1e-3;
  std::uint64_t seed = 0;
  // High mode: re-orthonormalize the row-scaled U so that A keeps exactly the
  // requested singular values. With false, A = (scaled U) Sigma directly.
  bool reorthonormalize = true;

  void validate() const;
};

struct GenReport {
  double measured_coherence = 0.0;
  double measured_condition = 0.0;
  Vector x_true;
};

struct GeneratedData {
  Dataset dataset;
  GenReport report;
};

// Synthetic logistic-regression instance A = U Sigma (V = I):
//  - U is the orthonormal factor of an n x d standard normal matrix; in High
//    mode each row of U is further divided by sqrt(z_i), z_i ~ Gamma(0.5, 2),
//    and the result is orthonormalized again (see reorthonormalize).
//  - Sigma holds d equally spaced values from 1 to kappa_A.
//  - x_true ~ N(0, I/d) and P(b_i = +1) = 1 / (1 + exp(-a_i^T x_true)).
// Draws come from make_stream(config.seed) in a fixed order (Gaussian matrix,
// row scalings, x_true, label uniforms), so (config, seed) fixes the output.
GeneratedData generate(const DataGenConfig& config);

// (n/d) * max_i ||row_i(U)||^2 for the thin SVD A = U S V^T.
double coherence(const RowMatrix& A);

// sigma_max(A) / sigma_min(A).
double condition_number(const RowMatrix& A);

// Orthonormal basis of the column space of an n x d Gaussian matrix drawn
// from rng (exposed for tests).
RowMatrix gaussian_orthonormal(std::size_t n, std::size_t d, Rng& rng);

// Thin Householder Q of X (n x d, full column rank).
RowMatrix orthonormal_basis(const RowMatrix& X);

}  // namespace hessavg

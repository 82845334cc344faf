#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "hessavg/problem.hpp"
#include "hessavg/rng.hpp"

namespace hessavg {

namespace oracle {
struct Exact {};
struct Subsample {
  std::size_t s;
};
struct GaussianSketch {
  std::size_t s;
};
struct CountSketch {
  std::size_t s;
};
struct LessUniform {
  std::size_t s;
  std::size_t nnz_per_row;
};
}  // namespace oracle

using OracleKind = std::variant<oracle::Exact, oracle::Subsample, oracle::GaussianSketch,
                                oracle::CountSketch, oracle::LessUniform>;

// Short names used on the command line and in reports:
// exact | subsample | gauss | countsketch | less
std::string oracle_name(const OracleKind& kind);
// Sketch size s, or 0 for Exact.
std::size_t sketch_size(const OracleKind& kind);
bool is_sketch(const OracleKind& kind);
// Builds a kind from its name; nnz_per_row = 0 selects ceil(0.1 d) for LESS.
OracleKind make_oracle(const std::string& name, std::size_t s, std::size_t d, std::size_t nnz_per_row = 0);
void validate(const OracleKind& kind);

// Symmetric d x d draw H(x) + E(x); not necessarily positive definite.
struct HessianEstimate {
  Matrix matrix;
  OracleKind kind;
  std::uint64_t draw_index = 0;
};

// Random s x n sketch with E[S^T S] = I. Sparse kinds keep only the nonzeros.
class SketchMatrix {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  static SketchMatrix dense(Matrix S);
  static SketchMatrix sparse(std::size_t rows, std::size_t cols, std::vector<Entry> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_sparse() const { return !dense_; }
  const std::vector<Entry>& entries() const { return entries_; }

  Matrix to_dense() const;
  // S * M for an n x d row-major M.
  RowMatrix apply(const RowMatrix& M) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  bool dense_ = false;
  Matrix S_;
  std::vector<Entry> entries_;
};

// Gaussian: i.i.d. N(0, 1/s). CountSketch: one +-1 per column at a uniform
// row. LESS-uniform: nnz_per_row distinct uniform positions per row with
// values +-sqrt(n / (s * nnz_per_row)).
SketchMatrix sketch_matrix(const OracleKind& kind, std::size_t n, Rng& rng);

// One draw of the Hessian oracle at x.
//   Exact:     H(x)
//   Subsample: (1/s) sum_{j in xi} l_j a_j a_j^T + nu I, |xi| = s without replacement
//   sketches:  M^T S^T S M + nu I with M = (1/sqrt(n)) diag(l)^{1/2} A
// Sketch kinds require obj.glm() (CapabilityError otherwise).
HessianEstimate estimate(const OracleKind& kind, const Objective& obj, const Vector& x, Rng& rng,
                         std::uint64_t draw_index = 0);

// Spectral norm of a symmetric matrix (eigendecomposition for d <= 200,
// power iteration otherwise).
double spectral_norm_sym(const Matrix& m);

struct NoiseStats {
  std::size_t sample_count = 0;
  std::vector<double> spectral_norms;  // ||H_hat_i - H(x)||_2
  // Heuristic sub-exponential scale of ||E||: the 90th percentile plus the
  // maximum-likelihood exponential scale of the exceedances above it.
  double upsilon_hat = 0.0;
  double mean_residual_norm = 0.0;  // ||mean_i H_hat_i - H(x)||_2
};

// Draw `count` estimates at fixed x using streams make_stream(seed, i).
NoiseStats noise_sample(const OracleKind& kind, const Objective& obj, const Vector& x, std::uint64_t seed,
                        std::size_t count);

// Exponential tail heuristic used by noise_sample (exposed for tests).
double fit_upsilon(std::vector<double> norms);

}  // namespace hessavg

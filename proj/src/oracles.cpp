#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "hessavg/kernels.hpp"
#include "hessavg/oracles.hpp"

namespace hessavg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Uniform sample of s distinct indices from [0, n) (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t s, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < s; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(s);
  return idx;
}

// Floyd's algorithm; k is small, so membership is a linear scan.
std::vector<std::size_t> distinct_positions(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
      chosen.push_back(t);
    else
      chosen.push_back(j);
  }
  return chosen;
}

double rademacher(Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  return coin(rng) ? 1.0 : -1.0;
}

Matrix gram_plus_ridge(const RowMatrix& rows, double nu) {
  const auto d = rows.cols();
  Matrix h = Matrix::Zero(d, d);
  const std::vector<double> ones(static_cast<std::size_t>(rows.rows()), 1.0);
  kernels::weighted_gram(rows, ones, {}, h);
  h.diagonal().array() += nu;
  return h;
}

}  // namespace

std::string oracle_name(const OracleKind& kind) {
  return std::visit(overloaded{[](const oracle::Exact&) { return std::string("exact"); },
                               [](const oracle::Subsample&) { return std::string("subsample"); },
                               [](const oracle::GaussianSketch&) { return std::string("gauss"); },
                               [](const oracle::CountSketch&) { return std::string("countsketch"); },
                               [](const oracle::LessUniform&) { return std::string("less"); }},
                    kind);
}

std::size_t sketch_size(const OracleKind& kind) {
  return std::visit(overloaded{[](const oracle::Exact&) -> std::size_t { return 0; },
                               [](const auto& k) -> std::size_t { return k.s; }},
                    kind);
}

bool is_sketch(const OracleKind& kind) {
  return std::holds_alternative<oracle::GaussianSketch>(kind) || std::holds_alternative<oracle::CountSketch>(kind) ||
         std::holds_alternative<oracle::LessUniform>(kind);
}

OracleKind make_oracle(const std::string& name, std::size_t s, std::size_t d, std::size_t nnz_per_row) {
  OracleKind kind;
  if (name == "exact") {
    kind = oracle::Exact{};
  } else if (name == "subsample") {
    kind = oracle::Subsample{s};
  } else if (name == "gauss" || name == "gaussian") {
    kind = oracle::GaussianSketch{s};
  } else if (name == "countsketch") {
    kind = oracle::CountSketch{s};
  } else if (name == "less") {
    if (nnz_per_row == 0) nnz_per_row = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(d)));
    kind = oracle::LessUniform{s, std::max<std::size_t>(nnz_per_row, 1)};
  } else {
    throw ContractViolation("unknown oracle '" + name + "'");
  }
  validate(kind);
  return kind;
}

void validate(const OracleKind& kind) {
  std::visit(overloaded{[](const oracle::Exact&) {},
                        [](const oracle::LessUniform& k) {
                          require(k.s >= 1, "oracle: s must be >= 1");
                          require(k.nnz_per_row >= 1, "oracle: nnz_per_row must be >= 1");
                        },
                        [](const auto& k) { require(k.s >= 1, "oracle: s must be >= 1"); }},
             kind);
}

// ---------------------------------------------------------------------------

SketchMatrix SketchMatrix::dense(Matrix S) {
  SketchMatrix m;
  m.rows_ = static_cast<std::size_t>(S.rows());
  m.cols_ = static_cast<std::size_t>(S.cols());
  m.dense_ = true;
  m.S_ = std::move(S);
  return m;
}

SketchMatrix SketchMatrix::sparse(std::size_t rows, std::size_t cols, std::vector<Entry> entries) {
  SketchMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.entries_ = std::move(entries);
  return m;
}

Matrix SketchMatrix::to_dense() const {
  if (dense_) return S_;
  Matrix S = Matrix::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  for (const auto& e : entries_) S(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) += e.value;
  return S;
}

RowMatrix SketchMatrix::apply(const RowMatrix& M) const {
  require(static_cast<std::size_t>(M.rows()) == cols_, "SketchMatrix::apply: dimension mismatch");
  if (dense_) return RowMatrix(S_ * M);
  RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(rows_), M.cols());
  const auto d = static_cast<std::size_t>(M.cols());
  const auto& k = kernels::active();
  for (const auto& e : entries_) {
    k.axpby(e.value, M.row(static_cast<Eigen::Index>(e.col)).data(), 1.0,
            out.row(static_cast<Eigen::Index>(e.row)).data(), d);
  }
  return out;
}

SketchMatrix sketch_matrix(const OracleKind& kind, std::size_t n, Rng& rng) {
  require(n >= 1, "sketch_matrix: n must be >= 1");
  validate(kind);
  return std::visit(
      overloaded{
          [&](const oracle::GaussianSketch& k) {
            std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(k.s)));
            Matrix S(static_cast<Eigen::Index>(k.s), static_cast<Eigen::Index>(n));
            for (Eigen::Index i = 0; i < S.rows(); ++i)
              for (Eigen::Index j = 0; j < S.cols(); ++j) S(i, j) = normal(rng);
            return SketchMatrix::dense(std::move(S));
          },
          [&](const oracle::CountSketch& k) {
            std::uniform_int_distribution<std::size_t> row(0, k.s - 1);
            std::vector<SketchMatrix::Entry> entries;
            entries.reserve(n);
            for (std::size_t j = 0; j < n; ++j) {
              const std::size_t r = row(rng);
              entries.push_back({r, j, rademacher(rng)});
            }
            return SketchMatrix::sparse(k.s, n, std::move(entries));
          },
          [&](const oracle::LessUniform& k) {
            require(k.nnz_per_row <= n, "sketch_matrix: nnz_per_row must not exceed n");
            const double c =
                std::sqrt(static_cast<double>(n) / (static_cast<double>(k.s) * static_cast<double>(k.nnz_per_row)));
            std::vector<SketchMatrix::Entry> entries;
            entries.reserve(k.s * k.nnz_per_row);
            for (std::size_t i = 0; i < k.s; ++i) {
              for (std::size_t col : distinct_positions(n, k.nnz_per_row, rng)) entries.push_back({i, col, c * rademacher(rng)});
            }
            return SketchMatrix::sparse(k.s, n, std::move(entries));
          },
          [](const auto&) -> SketchMatrix { throw ContractViolation("sketch_matrix: not a sketch kind"); }},
      kind);
}

// ---------------------------------------------------------------------------

HessianEstimate estimate(const OracleKind& kind, const Objective& obj, const Vector& x, Rng& rng,
                         std::uint64_t draw_index) {
  validate(kind);
  require(static_cast<std::size_t>(x.size()) == obj.dimension(), "estimate: dimension mismatch");
  const GlmObjective* glm = obj.glm();

  Matrix h = std::visit(
      overloaded{
          [&](const oracle::Exact&) { return obj.hessian(x); },
          [&](const oracle::Subsample& k) -> Matrix {
            if (glm == nullptr) {
              // Without component structure the objective is a single component.
              require(k.s == 1, "estimate: subsample size exceeds the number of components");
              return obj.hessian(x);
            }
            const RowMatrix& A = glm->design();
            const auto n = static_cast<std::size_t>(A.rows());
            require(k.s <= n, "estimate: subsample size s exceeds n");
            const std::vector<std::size_t> idx = sample_without_replacement(n, k.s, rng);
            const Vector l = glm->curvature_weights(x);
            std::vector<double> w(idx.size());
            const double inv_s = 1.0 / static_cast<double>(k.s);
            for (std::size_t j = 0; j < idx.size(); ++j) w[j] = l[static_cast<Eigen::Index>(idx[j])] * inv_s;
            Matrix out = Matrix::Zero(A.cols(), A.cols());
            kernels::weighted_gram(A, w, idx, out);
            out.diagonal().array() += glm->reg_nu();
            return out;
          },
          [&](const auto&) -> Matrix {
            if (glm == nullptr) {
              throw CapabilityError("sketch oracles need a generalized linear objective (curvature weights)");
            }
            const RowMatrix& A = glm->design();
            const Vector l = glm->curvature_weights(x);
            const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(A.rows()));
            RowMatrix M = A;
            for (Eigen::Index i = 0; i < M.rows(); ++i) M.row(i) *= std::sqrt(l[i]) * inv_sqrt_n;
            const SketchMatrix S = sketch_matrix(kind, static_cast<std::size_t>(A.rows()), rng);
            return gram_plus_ridge(S.apply(M), glm->reg_nu());
          }},
      kind);
  return {std::move(h), kind, draw_index};
}

double spectral_norm_sym(const Matrix& m) {
  require(m.rows() == m.cols(), "spectral_norm_sym: matrix must be square");
  if (m.rows() == 0) return 0.0;
  if (m.rows() <= 200) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
  }
  Vector v = Vector::LinSpaced(m.rows(), 1.0, 2.0).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    Vector w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(norm - lambda) <= 1e-10 * norm) return norm;
    lambda = norm;
  }
  return lambda;
}

double fit_upsilon(std::vector<double> norms) {
  if (norms.empty()) return 0.0;
  std::sort(norms.begin(), norms.end());
  const std::size_t k = static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(norms.size() - 1)));
  const double threshold = norms[k];
  double excess = 0.0;
  std::size_t count = 0;
  for (std::size_t i = k + 1; i < norms.size(); ++i, ++count) excess += norms[i] - threshold;
  const double scale = count == 0 ? 0.0 : excess / static_cast<double>(count);
  return threshold + scale;
}

NoiseStats noise_sample(const OracleKind& kind, const Objective& obj, const Vector& x, std::uint64_t seed,
                        std::size_t count) {
  require(count >= 2, "noise_sample: count must be >= 2");
  const Matrix H = obj.hessian(x);
  NoiseStats stats;
  stats.sample_count = count;
  stats.spectral_norms.reserve(count);
  Matrix mean = Matrix::Zero(H.rows(), H.cols());
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = make_stream(seed, i);
    const HessianEstimate est = estimate(kind, obj, x, rng, i);
    stats.spectral_norms.push_back(spectral_norm_sym(est.matrix - H));
    mean += est.matrix;
  }
  mean /= static_cast<double>(count);
  stats.mean_residual_norm = spectral_norm_sym(mean - H);
  stats.upsilon_hat = fit_upsilon(stats.spectral_norms);
  return stats;
}

}  // namespace hessavg

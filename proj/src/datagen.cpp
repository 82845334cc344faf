#include <cmath>
#include <limits>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "hessavg/datagen.hpp"

namespace hessavg {

std::string_view to_string(Coherence c) { return c == Coherence::Low ? "low" : "high"; }

Coherence parse_coherence(std::string_view s) {
  if (s == "low") return Coherence::Low;
  if (s == "high") return Coherence::High;
  throw ContractViolation("coherence must be 'low' or 'high'");
}

void DataGenConfig::validate() const {
  require(n >= 1 && d >= 1, "DataGenConfig: n and d must be positive");
  require(d <= n, "DataGenConfig: d must not exceed n");
  require(std::isfinite(kappa_A) && kappa_A >= 1.0, "DataGenConfig: kappa_A must be >= 1");
  require(std::isfinite(reg_nu) && reg_nu >= 0.0, "DataGenConfig: reg_nu must be >= 0");
}

namespace {

Eigen::VectorXd singular_values(const RowMatrix& A) {
  require(A.rows() >= A.cols() && A.cols() >= 1, "need n >= d >= 1");
  const Matrix dense = A;
  Eigen::BDCSVD<Matrix> svd(dense);
  return svd.singularValues();
}

void check_full_rank(const Eigen::VectorXd& sv, Eigen::Index n) {
  const double smax = sv[0];
  const double smin = sv[sv.size() - 1];
  const double floor = smax * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  if (!(smin > floor)) throw NumericalFailure("matrix is rank deficient");
}

}  // namespace

RowMatrix gaussian_orthonormal(std::size_t n, std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  // Row-major fill order so the draw sequence does not depend on storage.
  for (Eigen::Index i = 0; i < G.rows(); ++i)
    for (Eigen::Index j = 0; j < G.cols(); ++j) G(i, j) = normal(rng);

  return orthonormal_basis(RowMatrix(G));
}

RowMatrix orthonormal_basis(const RowMatrix& X) {
  const Matrix G = X;
  Eigen::HouseholderQR<Matrix> qr(G);
  const Eigen::VectorXd rdiag = qr.matrixQR().diagonal().cwiseAbs();
  if (!(rdiag.minCoeff() > rdiag.maxCoeff() * 1e-12)) throw NumericalFailure("orthonormalization failed");
  const Matrix Q = qr.householderQ() * Matrix::Identity(G.rows(), G.cols());
  return RowMatrix(Q);
}

GeneratedData generate(const DataGenConfig& config) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(config.n);
  const auto d = static_cast<Eigen::Index>(config.d);

  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng = make_stream(config.seed, attempt);
    RowMatrix U;
    try {
      U = gaussian_orthonormal(config.n, config.d, rng);
    } catch (const NumericalFailure&) {
      if (attempt >= 8) throw;
      continue;
    }

    if (config.coherence_mode == Coherence::High) {
      std::gamma_distribution<double> gamma(0.5, 2.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        double z = 0.0;
        while (z <= 0.0) z = gamma(rng);
        U.row(i) /= std::sqrt(z);
      }
      if (config.reorthonormalize) U = orthonormal_basis(U);
    }

    RowMatrix A = U;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double sigma = d == 1 ? 1.0 : 1.0 + (config.kappa_A - 1.0) * static_cast<double>(j) / static_cast<double>(d - 1);
      A.col(j) *= sigma;
    }

    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
    Vector x_true(d);
    for (Eigen::Index j = 0; j < d; ++j) x_true[j] = normal(rng);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> b(config.n);
    const Vector ax = A * x_true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p_pos = 1.0 / (1.0 + std::exp(-ax[i]));
      b[static_cast<std::size_t>(i)] = unif(rng) < p_pos ? 1 : -1;
    }

    GeneratedData out;
    out.dataset.A = std::move(A);
    out.dataset.b = std::move(b);
    out.report.x_true = std::move(x_true);
    try {
      out.report.measured_coherence = coherence(out.dataset.A);
      out.report.measured_condition = condition_number(out.dataset.A);
    } catch (const NumericalFailure&) {
      if (attempt >= 8) throw;
      continue;
    }
    return out;
  }
}

double coherence(const RowMatrix& A) {
  require(A.rows() >= A.cols() && A.cols() >= 1, "coherence: need n >= d >= 1");
  Eigen::BDCSVD<Matrix> svd(Matrix(A), Eigen::ComputeThinU);
  check_full_rank(svd.singularValues(), A.rows());
  const Matrix& U = svd.matrixU();
  const double max_row = U.rowwise().squaredNorm().maxCoeff();
  return static_cast<double>(A.rows()) / static_cast<double>(A.cols()) * max_row;
}

double condition_number(const RowMatrix& A) {
  const Eigen::VectorXd sv = singular_values(A);
  check_full_rank(sv, A.rows());
  return sv[0] / sv[sv.size() - 1];
}

}  // namespace hessavg

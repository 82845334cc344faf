#pragma once

#include <cmath>
#include <random>

#include "hessavg/problem.hpp"
#include "hessavg/rng.hpp"

namespace testing {

using namespace hessavg;

inline Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0) {
  Rng rng = make_stream(seed, 7777);
  std::normal_distribution<double> N(0.0, scale);
  std::bernoulli_distribution coin(0.5);
  Dataset data;
  data.A.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < data.A.rows(); ++i)
    for (Eigen::Index j = 0; j < data.A.cols(); ++j) data.A(i, j) = N(rng);
  for (std::size_t i = 0; i < n; ++i) data.b.push_back(coin(rng) ? 1 : -1);
  return data;
}

inline Vector random_vector(std::size_t d, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> N(0.0, scale);
  Vector v(static_cast<Eigen::Index>(d));
  for (auto& x : v) x = N(rng);
  return v;
}

inline Matrix random_symmetric(std::size_t d, Rng& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (auto& x : m.reshaped()) x = N(rng);
  return 0.5 * (m + m.transpose());
}

inline Matrix random_spd(std::size_t d, Rng& rng, double floor = 0.5) {
  const Matrix g = random_symmetric(d, rng);
  return g * g.transpose() + floor * Matrix::Identity(g.rows(), g.cols());
}

// Central differences, written independently of the library's formulas.
inline Vector fd_gradient(const Objective& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f.value(xp) - f.value(xm)) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_hessian(const Objective& f, const Vector& x, double h = 1e-6) {
  Matrix H(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    H.col(i) = (f.gradient(xp) - f.gradient(xm)) / (2.0 * h);
  }
  return H;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Plain-formula logistic loss used as an oracle (no stabilisation needed for
// the moderate margins in tests).
inline double naive_logistic(const Dataset& data, double nu, const Vector& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < data.A.rows(); ++i) {
    const double m = data.b[static_cast<std::size_t>(i)] * data.A.row(i).dot(x);
    s += std::log(1.0 + std::exp(-m));
  }
  return s / static_cast<double>(data.A.rows()) + 0.5 * nu * x.squaredNorm();
}

}  // namespace testing

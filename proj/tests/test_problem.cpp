#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "hessavg/problem.hpp"
#include "support.hpp"

using namespace hessavg;
using testing::max_abs;

namespace {

Dataset one_point(double a, int b) {
  Dataset d;
  d.A.resize(1, 1);
  d.A(0, 0) = a;
  d.b = {b};
  return d;
}

}  // namespace

TEST_SUITE("problem") {
  TEST_CASE("value examples") {
    const RegularizedLogistic f(testing::random_dataset(40, 6, 1), 1e-3);
    CHECK(f.value(Vector::Zero(6)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    const QuadraticTest q(Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK(q.value(Vector{{3.0, 4.0}}) == 12.5);

    const RegularizedLogistic g(one_point(2.0, 1), 0.0);
    CHECK(g.value(Vector{{1.0}}) == doctest::Approx(0.126928011).epsilon(1e-8));
  }

  TEST_CASE("value agrees with the naive formula") {
    const auto data = testing::random_dataset(30, 5, 2);
    const RegularizedLogistic f(data, 0.01);
    Rng rng = make_stream(5);
    for (int k = 0; k < 5; ++k) {
      const Vector x = testing::random_vector(5, rng);
      CHECK(f.value(x) == doctest::Approx(testing::naive_logistic(data, 0.01, x)).epsilon(1e-13));
    }
  }

  TEST_CASE("gradient examples") {
    const auto data = testing::random_dataset(25, 4, 3);
    const RegularizedLogistic f(data, 0.5);
    Vector expect = Vector::Zero(4);
    for (Eigen::Index i = 0; i < 25; ++i) expect -= data.b[static_cast<std::size_t>(i)] * data.A.row(i).transpose();
    expect /= 2.0 * 25.0;
    CHECK(max_abs(f.gradient(Vector::Zero(4)) - expect) <= 1e-15);

    const QuadraticTest q(Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK(max_abs(q.gradient(Vector{{3.0, 4.0}}) - Vector{{3.0, 4.0}}) == 0.0);
  }

  TEST_CASE("gradient and Hessian match finite differences on 20 random instances") {
    for (int k = 0; k < 20; ++k) {
      const std::size_t n = 20 + 7 * k, d = 2 + k % 7;
      const RegularizedLogistic f(testing::random_dataset(n, d, 100 + k), 1e-3 * (k + 1));
      Rng rng = make_stream(200 + k);
      const Vector x = testing::random_vector(d, rng, 0.7);

      const Vector g = f.gradient(x), gfd = testing::fd_gradient(f, x);
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double rel = std::abs(g[i] - gfd[i]) / std::max(std::abs(g[i]), 1e-6);
        CHECK(rel <= 1e-6);
      }
      const Matrix H = f.hessian(x), Hfd = testing::fd_hessian(f, x);
      CHECK(max_abs(H - Hfd) / max_abs(H) <= 1e-5);
    }
  }

  TEST_CASE("curvature weights") {
    const auto data = testing::random_dataset(10, 3, 4);
    const RegularizedLogistic f(data, 1e-3);
    const Vector l0 = f.curvature_weights(Vector::Zero(3));
    CHECK(max_abs(l0 - Vector::Constant(10, 0.25)) == 0.0);

    const double e10 = std::exp(-10.0);
    CHECK(logistic_curvature(10.0) == doctest::Approx(e10 / ((1 + e10) * (1 + e10))).epsilon(1e-14));
    CHECK(logistic_curvature(10.0) == doctest::Approx(4.5398e-5).epsilon(1e-4));
    CHECK(logistic_curvature(-10.0) == logistic_curvature(10.0));
    for (double u : {0.1, 1.0, 3.7, 25.0, 800.0}) CHECK(logistic_curvature(u) == logistic_curvature(-u));

    Rng rng = make_stream(6);
    const Vector x = testing::random_vector(3, rng, 3.0);
    const Vector l = f.curvature_weights(x);
    CHECK(l.minCoeff() > 0.0);
    CHECK(l.maxCoeff() <= 0.25);
  }

  TEST_CASE("Hessian structure") {
    const auto data = testing::random_dataset(50, 8, 5);
    const double nu = 2e-3;
    const RegularizedLogistic f(data, nu);
    const Matrix H0 = f.hessian(Vector::Zero(8));
    const Matrix expect = data.A.transpose() * data.A / (4.0 * 50.0) + nu * Matrix::Identity(8, 8);
    CHECK(max_abs(H0 - expect) <= 1e-14);

    Rng rng = make_stream(9);
    for (int k = 0; k < 10; ++k) {
      const Vector x = testing::random_vector(8, rng, 2.0);
      const Matrix H = f.hessian(x);
      CHECK(max_abs(H - H.transpose()) <= 1e-14);
      Eigen::SelfAdjointEigenSolver<Matrix> es(H);
      CHECK(es.eigenvalues().minCoeff() >= nu - 1e-12);
      const RowMatrix M = f.sqrt_factor(x);
      const Matrix viaM = M.transpose() * M + nu * Matrix::Identity(8, 8);
      CHECK(max_abs(H - viaM) <= 1e-12);
    }

    Matrix Q{{2.0, 0.5}, {0.5, 1.0}};
    const QuadraticTest q(Q, Vector{{1.0, 0.0}});
    CHECK(q.hessian(Vector{{5.0, -3.0}}) == Q);
  }

  TEST_CASE("no overflow for large iterates") {
    const RegularizedLogistic f(testing::random_dataset(30, 4, 8, 5.0), 1e-3);
    Rng rng = make_stream(10);
    for (double r : {10.0, 100.0, 1000.0}) {
      Vector x = testing::random_vector(4, rng);
      x *= r / x.norm();
      CHECK(std::isfinite(f.value(x)));
      CHECK(f.gradient(x).allFinite());
      CHECK(f.hessian(x).allFinite());
    }
    CHECK(log1pexp(1000.0) == 1000.0);
    CHECK(log1pexp(-1000.0) == 0.0);
    CHECK(sigmoid(-1000.0) == 0.0);
    CHECK(sigmoid(1000.0) == 1.0);
    CHECK(logistic_curvature(1000.0) == 0.0);
  }

  TEST_CASE("contract violations") {
    const RegularizedLogistic f(testing::random_dataset(10, 3, 11), 1e-3);
    CHECK_THROWS_AS(f.value(Vector::Zero(4)), ContractViolation);
    CHECK_THROWS_AS(f.gradient(Vector::Zero(2)), ContractViolation);

    Dataset bad = testing::random_dataset(5, 2, 12);
    bad.b[2] = 0;
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    Dataset nonfinite = testing::random_dataset(5, 2, 12);
    nonfinite.A(1, 1) = std::nan("");
    CHECK_THROWS_AS(nonfinite.validate(), ContractViolation);
    CHECK_THROWS_AS(RegularizedLogistic(testing::random_dataset(5, 2, 1), -1.0), ContractViolation);

    CHECK_THROWS_AS(QuadraticTest(Matrix{{1.0, 0.0}, {0.0, -1.0}}, Vector::Zero(2)), ContractViolation);
    CHECK_THROWS_AS(QuadraticTest(Matrix{{1.0, 0.1}, {0.0, 1.0}}, Vector::Zero(2)), ContractViolation);
  }

  TEST_CASE("reference solver") {
    Matrix Q{{3.0, 1.0}, {1.0, 2.0}};
    const Vector c{{1.0, -1.0}};
    const QuadraticTest q(Q, c);
    const auto rq = solve_reference(q, Vector::Zero(2));
    CHECK(max_abs(rq.x_star - Q.ldlt().solve(c)) <= 1e-15);
    CHECK(rq.iterations == 1);

    const RegularizedLogistic f(testing::random_dataset(200, 10, 13), 1e-3);
    const auto r1 = solve_reference(f, Vector::Zero(10));
    CHECK(r1.grad_norm_at_star <= 1e-13);
    CHECK(f.gradient(r1.x_star).norm() <= 1e-13);
    Rng rng = make_stream(14);
    const auto r2 = solve_reference(f, testing::random_vector(10, rng));
    CHECK((r1.x_star - r2.x_star).norm() <= 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(r1.H_star);
    CHECK(es.eigenvalues().minCoeff() >= 1e-3 - 1e-12);

    ReferenceOptions tight;
    tight.max_iter = 1;
    CHECK_THROWS_AS(solve_reference(f, testing::random_vector(10, rng, 5.0), tight), ReferenceSolveError);
  }

  TEST_CASE("hstar_error") {
    const RegularizedLogistic f(testing::random_dataset(80, 5, 15), 1e-3);
    const auto ref = solve_reference(f, Vector::Zero(5));
    CHECK(hstar_error(ref.x_star, ref) == 0.0);

    ReferenceSolution unit;
    unit.x_star = Vector::Zero(2);
    unit.H_star = Matrix::Identity(2, 2);
    CHECK(hstar_error(Vector{{3.0, 4.0}}, unit) == doctest::Approx(5.0).epsilon(1e-15));

    Eigen::SelfAdjointEigenSolver<Matrix> es(ref.H_star);
    const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
    Rng rng = make_stream(16);
    for (int k = 0; k < 20; ++k) {
      const Vector x = ref.x_star + testing::random_vector(5, rng);
      const double e = hstar_error(x, ref), dx = (x - ref.x_star).norm();
      CHECK(e >= std::sqrt(lmin) * dx * (1 - 1e-12));
      CHECK(e <= std::sqrt(lmax) * dx * (1 + 1e-12));
    }
  }
}

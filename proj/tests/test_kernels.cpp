#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <vector>

#include "hessavg/kernels.hpp"
#include "support.hpp"

using namespace hessavg;
namespace K = hessavg::kernels;

namespace {

std::vector<double> draws(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed, 1);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = U(rng);
  return v;
}

bool have_avx2() {
#ifdef HESSAVG_HAVE_AVX2
  return K::isa_supported(K::Isa::Avx2);
#else
  return false;
#endif
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar reference kernels match plain loops") {
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 100u}) {
      const auto x = draws(n, n), y = draws(n, n + 100);
      double ref = 0.0;
      for (std::size_t i = 0; i < n; ++i) ref += x[i] * y[i];
      CHECK(K::scalar::dot(x.data(), y.data(), n) == doctest::Approx(ref).epsilon(1e-14));

      auto z = y;
      K::scalar::axpby(0.3, x.data(), -1.5, z.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(0.3 * x[i] - 1.5 * y[i]).epsilon(1e-15));
    }
  }

  TEST_CASE("avx2 kernels agree with the scalar reference") {
    if (!have_avx2()) {
      MESSAGE("AVX2/FMA not available on this machine; equivalence check skipped");
      return;
    }
#ifdef HESSAVG_HAVE_AVX2
    for (std::size_t n = 0; n <= 70; ++n) {
      const auto x = draws(n, 3 * n + 1), y = draws(n, 3 * n + 2);
      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
      const double a = K::scalar::dot(x.data(), y.data(), n);
      const double b = K::avx2::dot(x.data(), y.data(), n);
      CHECK(std::abs(a - b) <= 1e-14 * (mag + 1e-300) + 0.0);

      auto z1 = y, z2 = y;
      K::scalar::axpby(-0.7, x.data(), 1.25, z1.data(), n);
      K::avx2::axpby(-0.7, x.data(), 1.25, z2.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(z1[i] - z2[i]) <= 4e-16 * (std::abs(0.7 * x[i]) + std::abs(1.25 * y[i])));
    }
    for (std::size_t d : {1u, 2u, 3u, 4u, 5u, 8u, 13u, 31u, 64u, 100u}) {
      const auto a = draws(d, d + 500);
      auto base = draws(d * d, d + 900);
      auto o1 = base, o2 = base;
      K::scalar::syr_lower(0.37, a.data(), o1.data(), d);
      K::avx2::syr_lower(0.37, a.data(), o2.data(), d);
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) {
          const std::size_t k = i + j * d;
          if (i >= j) {
            CHECK(std::abs(o1[k] - o2[k]) <= 4e-16 * (std::abs(base[k]) + std::abs(0.37 * a[i] * a[j])));
          } else {
            // strict upper triangle is never touched
            CHECK(o1[k] == base[k]);
            CHECK(o2[k] == base[k]);
          }
        }
    }
    // Long vectors, misaligned start.
    const auto x = draws(1003, 5), y = draws(1003, 6);
    double mag = 0.0;
    for (std::size_t i = 1; i < 1003; ++i) mag += std::abs(x[i] * y[i]);
    CHECK(std::abs(K::scalar::dot(x.data() + 1, y.data() + 1, 1002) - K::avx2::dot(x.data() + 1, y.data() + 1, 1002)) <=
          1e-14 * mag);
#endif
  }

  TEST_CASE("dispatch honours HESSAVG_KERNELS") {
    const char* env = std::getenv("HESSAVG_KERNELS");
    if (env && std::strcmp(env, "scalar") == 0) {
      CHECK(K::active_isa() == K::Isa::Scalar);
    } else if (have_avx2()) {
      CHECK(K::active_isa() == K::Isa::Avx2);
    } else {
      CHECK(K::active_isa() == K::Isa::Scalar);
    }
    CHECK(K::isa_supported(K::Isa::Scalar));
    CHECK(K::isa_name(K::active_isa()).size() > 0);
  }

  TEST_CASE("row_dots and weighted_gram match Eigen expressions") {
    const auto data = testing::random_dataset(57, 13, 3);
    Rng rng = make_stream(11);
    const Vector x = testing::random_vector(13, rng);
    Vector out(57);
    K::row_dots(data.A, x, out);
    CHECK(testing::max_abs(out - data.A * x) <= 1e-13);

    std::vector<double> w(57);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (auto& v : w) v = U(rng);
    Matrix G = Matrix::Zero(13, 13);
    K::weighted_gram(data.A, w, {}, G);
    const Eigen::Map<const Vector> wv(w.data(), 57);
    const Matrix ref = data.A.transpose() * wv.asDiagonal() * data.A;
    CHECK(testing::max_abs(G - ref) <= 1e-12 * testing::max_abs(ref));
    CHECK(testing::max_abs(G - G.transpose()) == 0.0);

    const std::vector<std::size_t> idx = {4, 0, 56, 9};
    const std::vector<double> w4 = {0.5, 2.0, 1.0, 0.25};
    Matrix G2 = Matrix::Zero(13, 13);
    K::weighted_gram(data.A, w4, idx, G2);
    Matrix ref2 = Matrix::Zero(13, 13);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Vector a = data.A.row(static_cast<Eigen::Index>(idx[k])).transpose();
      ref2 += w4[k] * a * a.transpose();
    }
    CHECK(testing::max_abs(G2 - ref2) <= 1e-13);
  }
}

#include "hessavg/kernels.hpp"

namespace hessavg::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpby(double alpha, const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void syr_lower(double w, const double* a, double* out, std::size_t d) {
  for (std::size_t c = 0; c < d; ++c) {
    const double wa = w * a[c];
    if (wa == 0.0) continue;
    double* col = out + c * d;
    for (std::size_t r = c; r < d; ++r) col[r] += wa * a[r];
  }
}

}  // namespace hessavg::kernels::scalar

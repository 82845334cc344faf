#pragma once

// Dense inner-loop kernels. Every kernel has a portable scalar reference
// implementation and, on x86-64, an AVX2/FMA variant. The variant is picked
// once at startup from CPUID; HESSAVG_KERNELS=scalar forces the reference.

#include <cstddef>
#include <span>
#include <string_view>

#include "hessavg/types.hpp"

namespace hessavg::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y <- alpha * x + beta * y
  void (*axpby)(double alpha, const double* x, double beta, double* y, std::size_t n);
  // Lower triangle (column-major, leading dimension d) of out += w * a a^T.
  void (*syr_lower)(double w, const double* a, double* out, std::size_t d);
};

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpby(double alpha, const double* x, double beta, double* y, std::size_t n);
void syr_lower(double w, const double* a, double* out, std::size_t d);
}  // namespace scalar

#ifdef HESSAVG_HAVE_AVX2
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpby(double alpha, const double* x, double beta, double* y, std::size_t n);
void syr_lower(double w, const double* a, double* out, std::size_t d);
}  // namespace avx2
#endif

bool isa_supported(Isa isa);
const KernelTable& table(Isa isa);

// Kernel set chosen at first use; stable for the life of the process.
Isa active_isa();
const KernelTable& active();

// Convenience wrappers over the active table.
double dot(std::span<const double> x, std::span<const double> y);
void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y);

// out_i = <row_i(rows), x>
void row_dots(const RowMatrix& rows, const Vector& x, Vector& out);

// out += sum_j weights[j] * row_j row_j^T over the selected rows (all rows when
// `index` is empty); fills the full symmetric matrix before returning.
void weighted_gram(const RowMatrix& rows, std::span<const double> weights,
                   std::span<const std::size_t> index, Matrix& out);

// Copy the lower triangle onto the upper one.
void symmetrize_from_lower(Matrix& m);

}  // namespace hessavg::kernels

#include <cstdlib>
#include <string>

#include "hessavg/kernels.hpp"

namespace hessavg::kernels {

namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpby, &scalar::syr_lower};

#ifdef HESSAVG_HAVE_AVX2
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpby, &avx2::syr_lower};
#endif

Isa select_isa() {
  if (const char* env = std::getenv("HESSAVG_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(HESSAVG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
#ifdef HESSAVG_HAVE_AVX2
  if (isa == Isa::Avx2) {
    if (!isa_supported(Isa::Avx2)) throw UnsupportedOperation("AVX2 kernels not supported on this CPU");
    return kAvx2Table;
  }
#else
  if (isa == Isa::Avx2) throw UnsupportedOperation("AVX2 kernels not compiled in");
#endif
  return kScalarTable;
}

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

const KernelTable& active() {
  static const KernelTable& t = table(active_isa());
  return t;
}

double dot(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "dot: length mismatch");
  return active().dot(x.data(), y.data(), x.size());
}

void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y) {
  require(x.size() == y.size(), "axpby: length mismatch");
  active().axpby(alpha, x.data(), beta, y.data(), x.size());
}

void row_dots(const RowMatrix& rows, const Vector& x, Vector& out) {
  require(rows.cols() == x.size(), "row_dots: dimension mismatch");
  const auto d = static_cast<std::size_t>(rows.cols());
  out.resize(rows.rows());
  const auto& k = active();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out[i] = k.dot(rows.row(i).data(), x.data(), d);
}

void weighted_gram(const RowMatrix& rows, std::span<const double> weights,
                   std::span<const std::size_t> index, Matrix& out) {
  const auto d = static_cast<std::size_t>(rows.cols());
  require(out.rows() == rows.cols() && out.cols() == rows.cols(), "weighted_gram: output must be d x d");
  const auto& k = active();
  if (index.empty()) {
    require(weights.size() == static_cast<std::size_t>(rows.rows()), "weighted_gram: one weight per row");
    for (Eigen::Index j = 0; j < rows.rows(); ++j) k.syr_lower(weights[j], rows.row(j).data(), out.data(), d);
  } else {
    require(weights.size() == index.size(), "weighted_gram: one weight per selected row");
    for (std::size_t j = 0; j < index.size(); ++j) {
      require(index[j] < static_cast<std::size_t>(rows.rows()), "weighted_gram: row index out of range");
      k.syr_lower(weights[j], rows.row(static_cast<Eigen::Index>(index[j])).data(), out.data(), d);
    }
  }
  symmetrize_from_lower(out);
}

void symmetrize_from_lower(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = c + 1; r < m.rows(); ++r) m(c, r) = m(r, c);
}

}  // namespace hessavg::kernels

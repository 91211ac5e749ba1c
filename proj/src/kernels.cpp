#include "dhj/kernels.hpp"

#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace dhj {

bool openmp_enabled() {
#if defined(_OPENMP)
  return true;
#else
  return false;
#endif
}

int parallel_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace kernels {

namespace {

void check_blocks(std::span<const double> in, std::size_t n, std::span<double> out) {
  if (n == 0 || in.size() % n != 0 || out.size() != in.size())
    throw std::invalid_argument("stencil input must be whole blocks of n nodes");
}

inline double diff_at(const double* b, std::size_t n, std::size_t j, double inv2h) {
  const std::size_t jp = j + 1 == n ? 0 : j + 1;
  const std::size_t jm = j == 0 ? n - 1 : j - 1;
  return (b[jp] - b[jm]) * inv2h;
}

inline double adjoint_at(const double* b, std::size_t n, std::size_t j, double inv2h) {
  const std::size_t jp = j + 1 == n ? 0 : j + 1;
  const std::size_t jm = j == 0 ? n - 1 : j - 1;
  return (b[jm] - b[jp]) * inv2h;
}

}  // namespace

void central_difference_serial(std::span<const double> in, std::size_t n, double h, std::span<double> out) {
  check_blocks(in, n, out);
  const double inv2h = 1.0 / (2.0 * h);
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = diff_at(in.data() + (k / n) * n, n, k % n, inv2h);
}

void central_difference_parallel(std::span<const double> in, std::size_t n, double h, std::span<double> out) {
  check_blocks(in, n, out);
  const double inv2h = 1.0 / (2.0 * h);
  const auto total = static_cast<std::ptrdiff_t>(in.size());
  const double* src = in.data();
  double* dst = out.data();
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    dst[uk] = diff_at(src + (uk / n) * n, n, uk % n, inv2h);
  }
}

void central_difference_adjoint_serial(std::span<const double> in, std::size_t n, double h,
                                       std::span<double> out) {
  check_blocks(in, n, out);
  const double inv2h = 1.0 / (2.0 * h);
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = adjoint_at(in.data() + (k / n) * n, n, k % n, inv2h);
}

void central_difference_adjoint_parallel(std::span<const double> in, std::size_t n, double h,
                                         std::span<double> out) {
  check_blocks(in, n, out);
  const double inv2h = 1.0 / (2.0 * h);
  const auto total = static_cast<std::ptrdiff_t>(in.size());
  const double* src = in.data();
  double* dst = out.data();
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t k = 0; k < total; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    dst[uk] = adjoint_at(src + (uk / n) * n, n, uk % n, inv2h);
  }
}

void central_difference(Execution exec, std::span<const double> in, std::size_t n, double h,
                        std::span<double> out) {
  if (exec == Execution::parallel)
    central_difference_parallel(in, n, h, out);
  else
    central_difference_serial(in, n, h, out);
}

void central_difference_adjoint(Execution exec, std::span<const double> in, std::size_t n, double h,
                                std::span<double> out) {
  if (exec == Execution::parallel)
    central_difference_adjoint_parallel(in, n, h, out);
  else
    central_difference_adjoint_serial(in, n, h, out);
}

double weighted_sum(std::span<const double> v, std::span<const double> w) {
  if (w.empty() || v.size() % w.size() != 0) throw std::invalid_argument("weights do not tile the values");
  double acc = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) acc += w[k % w.size()] * v[k];
  return acc;
}

}  // namespace kernels
}  // namespace dhj

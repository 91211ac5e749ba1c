#ifndef DHJ_KERNELS_HPP
#define DHJ_KERNELS_HPP

#include <cstddef>
#include <exception>
#include <span>

namespace dhj {

/// Node loops run either on the calling thread or across an OpenMP team.
/// Reductions are always summed in node order on the calling thread, so both
/// modes produce bit-identical results.
enum class Execution { serial, parallel };

/// True when the library was built with OpenMP.
bool openmp_enabled();

/// Number of threads a parallel node loop will use.
int parallel_threads();

/// Calls f(j) for j in [0, count). Exceptions thrown inside the team are
/// captured and the first one is rethrown on the calling thread.
template <class F>
void for_each_node(Execution exec, std::ptrdiff_t count, F&& f) {
  if (exec == Execution::serial || count < 2) {
    for (std::ptrdiff_t j = 0; j < count; ++j) f(j);
    return;
  }
  std::exception_ptr failure;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    try {
      f(j);
    } catch (...) {
#if defined(_OPENMP)
#pragma omp critical(dhj_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

namespace kernels {

/// out_j = (in_{j+1} - in_{j-1}) / (2h) on a periodic ring of n nodes,
/// applied to each block of n consecutive values.
void central_difference_serial(std::span<const double> in, std::size_t n, double h, std::span<double> out);
void central_difference_parallel(std::span<const double> in, std::size_t n, double h, std::span<double> out);

/// Transpose of the stencil above: out_j = (in_{j-1} - in_{j+1}) / (2h).
void central_difference_adjoint_serial(std::span<const double> in, std::size_t n, double h,
                                       std::span<double> out);
void central_difference_adjoint_parallel(std::span<const double> in, std::size_t n, double h,
                                         std::span<double> out);

void central_difference(Execution exec, std::span<const double> in, std::size_t n, double h,
                        std::span<double> out);
void central_difference_adjoint(Execution exec, std::span<const double> in, std::size_t n, double h,
                                std::span<double> out);

/// sum_j w_{j mod n} v_j, summed in index order.
double weighted_sum(std::span<const double> v, std::span<const double> w);

}  // namespace kernels
}  // namespace dhj

#endif  // DHJ_KERNELS_HPP

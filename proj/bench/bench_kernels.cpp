#include "dhj/cauchy_space.hpp"
#include "dhj/hamilton_jacobi.hpp"
#include "dhj/legendre.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace dhj;

namespace {

Execution mode(const benchmark::State& st) { return st.range(1) == 0 ? Execution::serial : Execution::parallel; }

CauchyState wave_state(const CauchyGrid& g) {
  CauchyState s = CauchyState::zeros({1, 1}, g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    s.u[j] = std::sin(2 * std::numbers::pi * g.x[j]);
    s.p_t[j] = std::cos(2 * std::numbers::pi * g.x[j]);
  }
  return s;
}

void args(benchmark::internal::Benchmark* b) {
  for (int n : {256, 4096, 65536})
    for (int m : {0, 1}) b->Args({n, m});
  b->ArgNames({"N", "parallel"});
}

void BM_central_difference(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  std::vector<double> in(n), out(n);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  for (auto& v : in) v = U(rng);
  for (auto _ : st) {
    kernels::central_difference(mode(st), in, n, 1.0 / n, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}

void BM_hdw_rhs(benchmark::State& st) {
  const auto g = make_grid(static_cast<int>(st.range(0)));
  const auto H = hamiltonian_from_lagrangian(builtin_model("klein_gordon", {{"mu", 1.0}}));
  const auto s = wave_state(g);
  for (auto _ : st) benchmark::DoNotOptimize(hdw_rhs(H, g, s, mode(st)));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_pairing_contract(benchmark::State& st) {
  const auto g = make_grid(static_cast<int>(st.range(0)));
  const auto H = hamiltonian_from_lagrangian(builtin_model("klein_gordon", {{"mu", 1.0}}));
  const auto s = with_recovered_momenta(H, g, wave_state(g));
  std::mt19937_64 rng(2);
  const auto x = random_variation({1, 1}, g, rng, true);
  for (auto _ : st) {
    PresymplecticForm form(H, g, s, mode(st));
    benchmark::DoNotOptimize(form.contract(x));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_characteristics_step(benchmark::State& st) {
  const auto g = make_grid(static_cast<int>(st.range(0)));
  const auto H = hamiltonian_from_lagrangian(builtin_model("klein_gordon", {{"mu", 1.0}}));
  const auto gamma = oscillator_gamma({1, 1}, 1.0);
  const std::vector<double> u0(g.size(), 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(evolve_characteristics(H, gamma, g, u0, 0.0, 1e-2, 1e-2, 1, 1e8, mode(st)));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_central_difference)->Apply(args);
BENCHMARK(BM_hdw_rhs)->Apply(args);
BENCHMARK(BM_pairing_contract)->Apply(args);
BENCHMARK(BM_characteristics_step)->Apply(args);

BENCHMARK_MAIN();

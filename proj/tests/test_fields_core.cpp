#include "dhj/fields_core.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dhj;
using dhj::test::random_jet;
using dhj::test::random_momentum;

namespace {

JetSample jet_1d(double u, double ut, double ux) {
  JetSample j = JetSample::zeros({1, 1});
  j.u = {u};
  j.u_t = {ut};
  j.u_x = {ux};
  return j;
}

// Flattened (t, x, u, u_t, u_x) coordinates of a jet.
std::vector<double> flatten(const JetSample& j) {
  std::vector<double> z{j.t};
  z.insert(z.end(), j.x.begin(), j.x.end());
  z.insert(z.end(), j.u.begin(), j.u.end());
  z.insert(z.end(), j.u_t.begin(), j.u_t.end());
  z.insert(z.end(), j.u_x.begin(), j.u_x.end());
  return z;
}

JetSample unflatten(const Dimensions& d, std::span<const double> z) {
  JetSample j = JetSample::zeros(d);
  std::size_t i = 0;
  j.t = z[i++];
  for (auto& v : j.x) v = z[i++];
  for (auto& v : j.u) v = z[i++];
  for (auto& v : j.u_t) v = z[i++];
  for (auto& v : j.u_x) v = z[i++];
  return j;
}

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

}  // namespace

TEST_CASE("builtin_model hand evaluations") {
  CHECK(builtin_model("free_wave").eval(jet_1d(1, 2, 3)) == doctest::Approx(-2.5).epsilon(1e-15));

  auto kg0 = builtin_model("klein_gordon", {{"mu", 0.0}});
  auto wave = builtin_model("free_wave");
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto j = random_jet({1, 1}, rng);
    CHECK(kg0.eval(j) == wave.eval(j));
  }

  auto osc = builtin_model("mechanics_oscillator", {{"omega", 1.0}});
  JetSample j = JetSample::zeros({0, 1});
  j.u = {1.0};
  CHECK(osc.eval(j) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(osc.dims().m == 0);
}

TEST_CASE("builtin_model rejects unknown names and bad parameters") {
  CHECK_THROWS_AS(builtin_model("maxwell"), ValidationError);
  CHECK_THROWS_AS(builtin_model("klein_gordon", {{"mu", -1.0}}), ValidationError);
  CHECK_THROWS_AS(builtin_model("mechanics_oscillator", {{"m", 1.0}}), ValidationError);
  CHECK_THROWS_AS(builtin_model("free_wave", {{"m", 3.0}}), ValidationError);
  try {
    builtin_model("maxwell");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("klein_gordon") != std::string::npos);
  }
}

TEST_CASE("eval_with_partials hand differentiation") {
  auto g = eval_with_partials(builtin_model("free_wave"), jet_1d(0.3, 2, 3));
  CHECK(g.d_ut[0] == doctest::Approx(2.0));
  CHECK(g.d_ux[0] == doctest::Approx(-3.0));
  CHECK(g.d_u[0] == 0.0);

  auto kg = eval_with_partials(builtin_model("klein_gordon", {{"mu", 1.0}}), jet_1d(1, 0, 0));
  CHECK(kg.d_u[0] == doctest::Approx(-1.0));
}

TEST_CASE("eval_with_partials rejects malformed and non-finite samples") {
  auto L = builtin_model("free_wave");
  JetSample bad = jet_1d(1, 2, 3);
  bad.u_x.clear();
  CHECK_THROWS_AS(eval_with_partials(L, bad), ValidationError);
  JetSample nan = jet_1d(std::nan(""), 0, 0);
  CHECK_THROWS(eval_with_partials(L, nan));
}

TEST_CASE("finite_difference_partial examples") {
  auto sq = [](std::span<const double> z) { return z[0] * z[0]; };
  std::vector<double> p{3.0};
  CHECK(std::abs(finite_difference_partial(sq, p, 0, 1e-4) - 6.0) <= 1e-7);

  auto c = [](std::span<const double>) { return 4.2; };
  CHECK(finite_difference_partial(c, p, 0, 1e-4) == 0.0);

  auto s = [](std::span<const double> z) { return std::sin(z[0]); };
  std::vector<double> zero{0.0};
  CHECK(std::abs(finite_difference_partial(s, zero, 0, 1e-4) - 1.0) <= 1e-8);
}

TEST_CASE("property: analytic partials match central differences on 100 random samples") {
  const std::vector<std::pair<std::string, ParameterMap>> models = {
      {"free_wave", {}},
      {"klein_gordon", {{"mu", 1.3}}},
      {"scalar_potential", {{"c2", 0.5}, {"c4", 0.25}, {"c3", -0.1}}},
      {"mechanics_oscillator", {{"omega", 2.0}}},
      {"free_wave", {{"n", 2.0}}}};
  std::mt19937_64 rng(7);
  for (const auto& [name, params] : models) {
    auto L = builtin_model(name, params);
    const Dimensions d = L.dims();
    for (int s = 0; s < 100; ++s) {
      const auto j = random_jet(d, rng, 1.5);
      const auto g = eval_with_partials(L, j);
      const auto z = flatten(j);
      auto f = [&](std::span<const double> zz) { return L.eval(unflatten(d, zz)); };
      std::vector<double> analytic{g.d_t};
      analytic.insert(analytic.end(), g.d_x.begin(), g.d_x.end());
      analytic.insert(analytic.end(), g.d_u.begin(), g.d_u.end());
      analytic.insert(analytic.end(), g.d_ut.begin(), g.d_ut.end());
      analytic.insert(analytic.end(), g.d_ux.begin(), g.d_ux.end());
      for (std::size_t a = 0; a < z.size(); ++a)
        CHECK(close_rel(analytic[a], finite_difference_partial(f, z, static_cast<int>(a), 1e-5), 1e-6));
    }
  }
}

TEST_CASE("property: Hamiltonian gradients match central differences") {
  std::mt19937_64 rng(8);
  for (const auto& name : builtin_model_names()) {
    auto L = builtin_model(name, {{"mu", 0.7}, {"c2", 0.5}, {"c4", 0.1}});
    auto H = L.closed_form_hamiltonian()();
    const Dimensions d = H.dims();
    for (int s = 0; s < 50; ++s) {
      const auto p = random_momentum(d, rng, 1.5);
      const auto g = eval_with_partials(H, p);
      for (int a = 0; a < d.n; ++a) {
        auto fu = [&](std::span<const double> z) {
          auto q = p;
          q.u[a] = z[0];
          return H.eval(q);
        };
        auto fp = [&](std::span<const double> z) {
          auto q = p;
          q.p_t[a] = z[0];
          return H.eval(q);
        };
        std::vector<double> zu{p.u[a]}, zp{p.p_t[a]};
        CHECK(close_rel(g.d_u[a], finite_difference_partial(fu, zu, 0, 1e-5), 1e-6));
        CHECK(close_rel(g.d_pt[a], finite_difference_partial(fp, zp, 0, 1e-5), 1e-6));
      }
    }
  }
}

TEST_CASE("property: velocity Hessian is the constant signature matrix") {
  std::mt19937_64 rng(9);
  for (const auto& name : builtin_model_names()) {
    auto L = builtin_model(name);
    const Dimensions d = L.dims();
    for (int s = 0; s < 10; ++s) {
      const auto hess = L.velocity_hessian(random_jet(d, rng));
      for (int a = 0; a < d.slots(); ++a)
        for (int b = 0; b < d.slots(); ++b) {
          const double expect = a == b ? (a % d.base() == 0 ? 1.0 : -1.0) : 0.0;
          CHECK(hess(a, b) == expect);
        }
    }
  }
}

TEST_CASE("property: eval is deterministic") {
  auto L = builtin_model("scalar_potential", {{"c3", 0.3}, {"c5", -0.2}});
  std::mt19937_64 rng(10);
  for (int s = 0; s < 20; ++s) {
    const auto j = random_jet(L.dims(), rng);
    const auto a = eval_with_partials(L, j);
    const auto b = eval_with_partials(L, j);
    CHECK(a.value == b.value);
    CHECK(a.d_u == b.d_u);
  }
}

TEST_CASE("fd-only model agrees with analytic model") {
  auto wave = builtin_model("free_wave");
  LagrangianModel fd({1, 1}, [](const JetSample& j) { return 0.5 * j.u_t[0] * j.u_t[0] - 0.5 * j.u_x[0] * j.u_x[0]; });
  std::mt19937_64 rng(11);
  for (int s = 0; s < 20; ++s) {
    const auto j = random_jet({1, 1}, rng);
    const auto a = eval_with_partials(wave, j);
    const auto b = eval_with_partials(fd, j);
    CHECK(std::abs(a.d_ut[0] - b.d_ut[0]) < 1e-8);
    CHECK(std::abs(a.d_ux[0] - b.d_ux[0]) < 1e-8);
  }
}

#include "dhj/cauchy_space.hpp"
#include "dhj/legendre.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dhj;
using dhj::test::kTwoPi;
using dhj::test::max_abs;
using dhj::test::max_diff;
using dhj::test::on_grid;

namespace {

HamiltonianModel wave_h() { return hamiltonian_from_lagrangian(builtin_model("free_wave")); }
HamiltonianModel kg_h(double mu = 1.0) { return hamiltonian_from_lagrangian(builtin_model("klein_gordon", {{"mu", mu}})); }

double derivative_error(int n) {
  const auto g = make_grid(n);
  const auto d = spatial_derivative(g, on_grid(g, [](double x) { return std::sin(kTwoPi * x); }));
  return max_diff(d, on_grid(g, [](double x) { return kTwoPi * std::cos(kTwoPi * x); }));
}

TangentVariation random_var(const CauchyGrid& g, std::mt19937_64& rng, bool k = false) {
  return random_variation({1, 1}, g, rng, k);
}

}  // namespace

TEST_CASE("make_grid examples") {
  auto g = make_grid(4, 1.0);
  CHECK(g.h == 0.25);
  for (double w : g.w) CHECK(w == 0.25);
  CHECK(g.x[3] == 0.75);

  auto p = make_grid(1, 1.0, 0);
  CHECK(p.size() == 1);
  CHECK(p.w[0] == 1.0);

  for (int n : {3, 7, 64, 129}) {
    auto q = make_grid(n, 2.5);
    double s = 0.0;
    for (double w : q.w) s += w;
    CHECK(s == doctest::Approx(2.5).epsilon(1e-14));
  }
  CHECK_THROWS_AS(make_grid(0), ValidationError);
  CHECK_THROWS_AS(make_grid(2, 1.0, 0), ValidationError);
  CHECK_THROWS_AS(make_grid(8, -1.0), ValidationError);
}

TEST_CASE("spatial_derivative examples") {
  CHECK(derivative_error(128) <= 1e-2);
  const auto g = make_grid(32);
  for (double v : spatial_derivative(g, std::vector<double>(32, 3.25))) CHECK(v == 0.0);
  const double r = derivative_error(64) / derivative_error(128);
  CHECK(r > 3.9);
  CHECK(r < 4.1);
  CHECK_THROWS_AS(spatial_derivative(g, std::vector<double>(31, 0.0)), ValidationError);
}

TEST_CASE("spatial_derivative_adjoint is the matrix transpose") {
  const auto g = make_grid(9, 1.3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<double> a(9), b(9);
  for (auto& v : a) v = U(rng);
  for (auto& v : b) v = U(rng);
  const auto da = spatial_derivative(g, a);
  const auto dtb = spatial_derivative_adjoint(g, b);
  double lhs = 0.0, rhs = 0.0;
  for (int j = 0; j < 9; ++j) {
    lhs += b[j] * da[j];
    rhs += dtb[j] * a[j];
  }
  CHECK(std::abs(lhs - rhs) < 1e-13);
}

TEST_CASE("integrate_density examples and summation by parts") {
  auto g = make_grid(64);
  CHECK(integrate_density(g, std::vector<double>(64, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(integrate_density(g, on_grid(g, [](double x) { return std::sin(kTwoPi * x); }))) <= 1e-12);
  CHECK(std::abs(integrate_density(g, on_grid(g, [](double x) { return std::pow(std::sin(kTwoPi * x), 2); })) - 0.5) <=
        1e-12);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int s = 0; s < 10; ++s) {
    std::vector<double> f(64), h(64), dens(64);
    for (auto& v : f) v = U(rng);
    for (auto& v : h) v = U(rng);
    const auto df = spatial_derivative(g, f);
    const auto dh = spatial_derivative(g, h);
    for (int j = 0; j < 64; ++j) dens[j] = f[j] * dh[j] + h[j] * df[j];
    CHECK(std::abs(integrate_density(g, dens)) < 1e-12);
  }
}

TEST_CASE("recover_spatial_momenta examples") {
  const auto g = make_grid(64);
  CauchyState s = CauchyState::zeros({1, 1}, g);
  s.u = on_grid(g, [](double x) { return std::sin(kTwoPi * x); });
  const auto px = recover_spatial_momenta(wave_h(), g, s);
  const auto dxu = spatial_derivative(g, s.u);
  for (int j = 0; j < 64; ++j) CHECK(std::abs(px[j] + dxu[j]) <= 1e-12);
  // Truncation bound of the central difference: (2 pi)^3 h^2 / 6.
  const double bound = std::pow(kTwoPi, 3) * g.h * g.h / 6.0;
  CHECK(max_diff(px, on_grid(g, [](double x) { return -kTwoPi * std::cos(kTwoPi * x); })) <= 1.001 * bound);
  CHECK(recover_spatial_momenta(kg_h(), g, s) == px);

  s.u.assign(64, 2.0);
  for (double v : recover_spatial_momenta(wave_h(), g, s)) CHECK(v == 0.0);
}

TEST_CASE("hdw_rhs examples") {
  const auto g = make_grid(16);
  CauchyState s = CauchyState::zeros({1, 1}, g);
  s.u.assign(16, 1.0);
  auto r = hdw_rhs(kg_h(), g, s);
  for (int j = 0; j < 16; ++j) {
    CHECK(r.u_dot[j] == 0.0);
    CHECK(r.pt_dot[j] == doctest::Approx(-1.0));
    CHECK(r.p_x[j] == 0.0);
  }

  auto z = hdw_rhs(wave_h(), g, CauchyState::zeros({1, 1}, g));
  CHECK(max_abs(z.u_dot) == 0.0);
  CHECK(max_abs(z.pt_dot) == 0.0);

  const auto g2 = make_grid(128);
  CauchyState w = CauchyState::zeros({1, 1}, g2);
  w.u = on_grid(g2, [](double x) { return std::sin(kTwoPi * x); });
  auto rw = hdw_rhs(wave_h(), g2, w);
  const auto d2 = spatial_derivative(g2, spatial_derivative(g2, w.u));
  CHECK(max_diff(rw.pt_dot, d2) < 1e-12);
  CHECK(max_diff(rw.pt_dot, on_grid(g2, [](double x) { return -kTwoPi * kTwoPi * std::sin(kTwoPi * x); })) < 0.1);
}

TEST_CASE("step_rk4 and simulate examples") {
  const auto g = make_grid(8);
  CauchyState s = CauchyState::zeros({1, 1}, g);
  s.u.assign(8, 1.0);
  auto frames = simulate(kg_h(), g, s, 1e-3, 1000, 100);
  CHECK(frames.size() == 11);
  CHECK(frames.back().t == doctest::Approx(1.0).epsilon(1e-15));
  for (double v : frames.back().u) CHECK(std::abs(v - std::cos(1.0)) <= 1e-9);

  auto zero = step_rk4(wave_h(), g, CauchyState::zeros({1, 1}, g), 1e-2);
  CHECK(max_abs(zero.u) == 0.0);
  CHECK(max_abs(zero.p_t) == 0.0);

  const auto g2 = make_grid(128);
  auto run = simulate(wave_h(), g2, test::wave_state(g2, 0.0), 1e-3, 1000, 1000);
  const double err = max_diff(run.back().u, on_grid(g2, [](double x) { return std::sin(kTwoPi * (x - 1.0)); }));
  // Phase lag of the semi-discrete wave: omega_h = sin(k h) / h, so after T = 1
  // the error is about k (k - sin(k h) / h) ~ k^3 h^2 / 6.
  const double k = kTwoPi;
  const double lag = k - std::sin(k * g2.h) / g2.h;
  CHECK(err == doctest::Approx(std::abs(std::sin(lag))).epsilon(1e-3));
}

TEST_CASE("simulate reports the failing step") {
  HamiltonianModel bad({1, 1}, [](const ReducedMomentumSample& s) {
    return 0.5 * s.p_t[0] * s.p_t[0] - 0.5 * s.p_x[0] * s.p_x[0] + std::exp(50.0 * s.u[0]);
  });
  const auto g = make_grid(4);
  CauchyState s = CauchyState::zeros({1, 1}, g);
  s.u.assign(4, 10.0);
  try {
    simulate(bad, g, s, 0.1, 10);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("presymplectic_pairing examples") {
  const auto g = make_grid(16);
  const auto st = test::wave_state(g, 0.2);
  auto X = TangentVariation::zeros({1, 1}, g);
  auto Y = TangentVariation::zeros({1, 1}, g);
  X.du.assign(16, 1.0);
  Y.dp_t.assign(16, 1.0);
  CHECK(presymplectic_pairing(wave_h(), g, st, X, Y) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(12);
  for (int s = 0; s < 10; ++s) {
    auto Z = random_var(g, rng, true);
    CHECK(std::abs(presymplectic_pairing(kg_h(), g, st, Z, Z)) < 1e-13);
  }
}

TEST_CASE("property: pairing is bilinear, antisymmetric and matches its covector") {
  const auto g = make_grid(24, 1.7);
  auto st = test::wave_state(g, 0.1);
  std::mt19937_64 rng(13);
  const PresymplecticForm form(kg_h(0.7), g, st);
  for (int s = 0; s < 20; ++s) {
    auto X = random_var(g, rng, true);
    auto Y = random_var(g, rng, true);
    auto Z = random_var(g, rng, true);
    const double a = 0.37, b = -1.3;
    auto aXbZ = X;
    aXbZ.k = a * X.k + b * Z.k;
    for (std::size_t i = 0; i < X.du.size(); ++i) {
      aXbZ.du[i] = a * X.du[i] + b * Z.du[i];
      aXbZ.dp_t[i] = a * X.dp_t[i] + b * Z.dp_t[i];
      aXbZ.dp_x[i] = a * X.dp_x[i] + b * Z.dp_x[i];
    }
    const double xy = form.pair(X, Y);
    CHECK(std::abs(xy + form.pair(Y, X)) < 1e-13);
    CHECK(std::abs(form.pair(aXbZ, Y) - (a * xy + b * form.pair(Z, Y))) < 1e-12);
    CHECK(std::abs(form.contract(X).apply(Y) - xy) < 1e-12);
  }
}

TEST_CASE("property: vertical pairing is the canonical bilinear") {
  const auto g = make_grid(20);
  std::mt19937_64 rng(14);
  auto st = test::wave_state(g, 0.0);
  for (int s = 0; s < 10; ++s) {
    auto X = random_var(g, rng);
    auto Y = random_var(g, rng);
    std::vector<double> dens(20);
    for (int j = 0; j < 20; ++j) dens[j] = X.du[j] * Y.dp_t[j] - X.dp_t[j] * Y.du[j];
    CHECK(std::abs(presymplectic_pairing(wave_h(), g, st, X, Y) - integrate_density(g, dens)) < 1e-13);
  }
}

TEST_CASE("property: indicator contraction vanishes iff the split Hamilton equations hold") {
  const auto g = make_grid(12);
  const Dimensions d{1, 1};
  auto H = kg_h(1.2);
  auto st = test::wave_state(g, 0.3);
  st = with_recovered_momenta(H, g, st);
  const auto rhs = hdw_rhs(H, g, st);
  auto vel = TangentVariation::zeros(d, g, 1.0);
  vel.du = rhs.u_dot;
  vel.dp_t = rhs.pt_dot;
  VariationSet indicators;
  for (const auto& xi : indicators.materialize(d, g)) CHECK(std::abs(presymplectic_pairing(H, g, st, vel, xi)) < 1e-12);

  auto off = vel;
  off.du[5] += 0.1;
  double worst = 0.0;
  for (const auto& xi : indicators.materialize(d, g))
    worst = std::max(worst, std::abs(presymplectic_pairing(H, g, st, off, xi)));
  CHECK(worst == doctest::Approx(0.1 * g.w[5]).epsilon(1e-10));
}

TEST_CASE("dynamical_trajectory_residual examples") {
  const Dimensions d{1, 1};
  const auto g = make_grid(16);
  auto H = kg_h();
  const auto tests = standard_test_set(d, g, 42);

  CauchyState s = CauchyState::zeros(d, g, 0.4);
  s.u.assign(16, std::cos(0.4));
  s.p_t.assign(16, -std::sin(0.4));
  auto v = TangentVariation::zeros(d, g, 1.0);
  v.du.assign(16, -std::sin(0.4));
  v.dp_t.assign(16, -std::cos(0.4));
  CHECK(dynamical_trajectory_residual(H, g, s, v, tests) <= 1e-10);

  std::mt19937_64 rng(99);
  auto junk = random_var(g, rng);
  junk.k = 1.0;
  CHECK(dynamical_trajectory_residual(H, g, s, junk, tests) > 0.1);
}

TEST_CASE("random_variation and test sets are seeded") {
  const Dimensions d{1, 2};
  const auto g = make_grid(10);
  std::mt19937_64 a(5), b(5);
  auto x = random_variation(d, g, a, true);
  auto y = random_variation(d, g, b, true);
  CHECK(x.du == y.du);
  CHECK(x.k == y.k);
  CHECK(x.k != 0.0);
  const auto s1 = standard_test_set(d, g, 42);
  const auto s2 = standard_test_set(d, g, 42);
  CHECK(s1.extra.size() == 8);
  CHECK(s1.extra[3].dp_x == s2.extra[3].dp_x);
  CHECK(s1.materialize(d, g).size() == 8 + 3 * 2 * 10);
}

TEST_CASE("time_stencil differentiates quartics exactly") {
  const double dt = 0.1;
  const std::size_t count = 9;
  auto f = [](double t) { return 1.0 + 2.0 * t - t * t + 0.5 * t * t * t - 0.25 * t * t * t * t; };
  auto df = [](double t) { return 2.0 - 2.0 * t + 1.5 * t * t - t * t * t; };
  for (std::size_t i = 0; i < count; ++i) {
    const auto st = time_stencil(i, count, dt);
    double v = 0.0;
    for (int q = 0; q < 5; ++q) v += st.weights[q] * f((st.first + q) * dt);
    CHECK(std::abs(v - df(i * dt)) < 1e-11);
  }
  CHECK_THROWS_AS(time_stencil(0, 4, dt), ValidationError);
  CHECK_THROWS_AS(uniform_frame_spacing({0.0, 0.1, 0.2, 0.35, 0.4}), ValidationError);
}

TEST_CASE("property: serial and parallel kernels are bit-identical") {
  const Dimensions d{1, 2};
  const auto g = make_grid(257);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<double> in(2 * 257), a(2 * 257), b(2 * 257);
  for (auto& v : in) v = U(rng);
  kernels::central_difference_serial(in, 257, g.h, a);
  kernels::central_difference_parallel(in, 257, g.h, b);
  CHECK(a == b);
  kernels::central_difference_adjoint_serial(in, 257, g.h, a);
  kernels::central_difference_adjoint_parallel(in, 257, g.h, b);
  CHECK(a == b);

  auto H = hamiltonian_from_lagrangian(builtin_model("scalar_potential", {{"n", 2.0}, {"c2", 0.5}, {"c4", 0.3}}));
  CauchyState s = CauchyState::zeros(d, g, 0.0);
  for (auto& v : s.u) v = U(rng);
  for (auto& v : s.p_t) v = U(rng);
  const auto rs = hdw_rhs(H, g, s, Execution::serial);
  const auto rp = hdw_rhs(H, g, s, Execution::parallel);
  CHECK(rs.u_dot == rp.u_dot);
  CHECK(rs.pt_dot == rp.pt_dot);
  CHECK(rs.p_x == rp.p_x);

  const auto fs = simulate(H, g, s, 1e-3, 5, 1, Execution::serial);
  const auto fp = simulate(H, g, s, 1e-3, 5, 1, Execution::parallel);
  CHECK(fs.back().u == fp.back().u);

  const auto st = with_recovered_momenta(H, g, s);
  auto X = random_variation(d, g, rng, true);
  auto Y = random_variation(d, g, rng, true);
  CHECK(presymplectic_pairing(H, g, st, X, Y, Execution::serial) ==
        presymplectic_pairing(H, g, st, X, Y, Execution::parallel));
  const auto cs = PresymplecticForm(H, g, st, Execution::serial).contract(X);
  const auto cp = PresymplecticForm(H, g, st, Execution::parallel).contract(X);
  CHECK(cs.du == cp.du);
  CHECK(cs.k == cp.k);
}

TEST_CASE("state and variation shape checks") {
  const auto g = make_grid(8);
  CauchyState s = CauchyState::zeros({1, 1}, g);
  s.p_x.pop_back();
  CHECK_THROWS_AS(s.check({1, 1}, g), ValidationError);
  s = CauchyState::zeros({1, 1}, g);
  s.u.pop_back();
  CHECK_THROWS_AS(hdw_rhs(wave_h(), g, s), ValidationError);
  auto v = TangentVariation::zeros({1, 1}, g);
  v.du.push_back(1.0);
  CHECK_THROWS_AS(v.check({1, 1}, g), ValidationError);
}

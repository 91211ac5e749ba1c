#include "dhj/hamilton_jacobi.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dhj;
using dhj::test::kTwoPi;
using dhj::test::max_abs;
using dhj::test::on_grid;

namespace {

const Dimensions kWave{1, 1};

HamiltonianModel wave_h() { return hamiltonian_from_lagrangian(builtin_model("free_wave")); }
HamiltonianModel kg_h(double mu = 1.0) { return hamiltonian_from_lagrangian(builtin_model("klein_gordon", {{"mu", mu}})); }
HamiltonianModel osc_h(double omega = 1.0) {
  return hamiltonian_from_lagrangian(builtin_model("mechanics_oscillator", {{"omega", omega}}));
}

BundlePoint pt(double t, double x, double u) { return {t, {x}, {u}}; }

std::vector<BundlePoint> box_samples(const Dimensions& d, int count, std::uint64_t seed, double t_max = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> T(0, t_max), X(0, 1), U(-2, 2);
  std::vector<BundlePoint> out;
  for (int i = 0; i < count; ++i) {
    BundlePoint p;
    p.t = T(rng);
    p.x.resize(d.m);
    for (auto& v : p.x) v = X(rng);
    p.u.resize(d.n);
    for (auto& v : p.u) v = U(rng);
    out.push_back(p);
  }
  return out;
}

CharacteristicRun osc_run(const HamiltonianModel& H, const HJSection& g, const CauchyGrid& grid, double u0) {
  return evolve_characteristics(H, g, grid, std::vector<double>(grid.size(), u0), 0.0, 1e-3, 1.0, 10);
}

}  // namespace

TEST_CASE("gamma families evaluate as documented") {
  auto lin = linear_gamma(kWave, 0.5, 0.1, 0.5, 0.2, 3.0);
  auto v = lin.eval(pt(0.1, 0.2, 2.0));
  CHECK(v.p == 3.0);
  CHECK(v.p_t[0] == doctest::Approx(1.1));
  CHECK(v.p_x[0] == doctest::Approx(1.2));

  auto osc = oscillator_gamma(kWave, 1.0);
  CHECK(osc.eval(pt(0.0, 0.3, 1.0)).p_t[0] == 0.0);
  CHECK(osc.eval(pt(0.5, 0.3, 2.0)).p_t[0] == doctest::Approx(-std::tan(0.5) * 2.0));
  CHECK_THROWS_AS(osc.eval(pt(std::numbers::pi / 2 - 5e-4, 0.0, 1.0)), DomainError);
  CHECK_NOTHROW(osc.eval(pt(std::numbers::pi / 2 - 2e-3, 0.0, 1.0)));

  CHECK_THROWS_AS(gamma_family("quadratic_gamma", kWave, {}), ValidationError);
  try {
    gamma_family("quadratic_gamma", kWave, {});
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("oscillator_gamma") != std::string::npos);
  }
}

TEST_CASE("property: analytic gamma Jacobians match finite differences") {
  std::mt19937_64 rng(31);
  for (const auto& g : {linear_gamma({1, 2}, 0.3, 0.1, -0.7, 0.4), oscillator_gamma({1, 2}, 1.3, 0.2)}) {
    for (const auto& p : box_samples(g.dims(), 20, 32)) {
      const auto a = g.jacobian(p);
      auto fd = bundle_jacobian_fd(
          g.dims(),
          [&](const BundlePoint& q) {
            auto val = g.eval(q);
            std::vector<double> row{val.p};
            row.insert(row.end(), val.p_t.begin(), val.p_t.end());
            row.insert(row.end(), val.p_x.begin(), val.p_x.end());
            return row;
          },
          p, 1e-5);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - fd[i]) < 1e-6 * (1.0 + std::abs(a[i])));
    }
  }
}

TEST_CASE("gamma_closedness_residual examples") {
  auto lin = linear_gamma(kWave, 0.5, 0.0, 0.5, 0.0, 1.0);
  for (const auto& r : gamma_closedness_residual(lin, box_samples(kWave, 50, 1))) CHECK(r.sup() == 0.0);

  HJSection tu(kWave, [](const BundlePoint& p) { return GammaValue{0.0, {p.t * p.u[0]}, {0.0}}; });
  auto r = gamma_closedness_residual(tu, {pt(0.7, 0.1, 2.0)});
  CHECK(r[0].divergence[0] == doctest::Approx(-2.0).epsilon(1e-8));

  const Dimensions two{1, 2};
  HJSection sq(two, [](const BundlePoint& p) { return GammaValue{0.0, {p.u[1], 0.0}, {0.0, 0.0}}; });
  auto s = gamma_closedness_residual(sq, {BundlePoint{0.1, {0.2}, {0.3, 0.4}}});
  CHECK(s[0].symmetry[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("hj_residual examples") {
  auto lin = linear_gamma(kWave, 0.5, 0.0, 0.5, 0.0);
  for (const auto& p : box_samples(kWave, 100, 2)) CHECK(max_abs(hj_residual(wave_h(), lin, p)) <= 1e-12);

  auto z = zero_gamma(kWave);
  for (const auto& p : box_samples(kWave, 100, 3)) CHECK(hj_residual(kg_h(1.0), z, p)[0] == doctest::Approx(p.u[0]));
  CHECK(hj_residual(kg_h(2.0), z, pt(0, 0, 1.5))[0] == doctest::Approx(6.0));

  const Dimensions mech{0, 1};
  auto osc = oscillator_gamma(mech, 1.0);
  CHECK(std::abs(hj_residual(osc_h(1.0), osc, BundlePoint{0.3, {}, {1.3}})[0]) <= 1e-12);
  for (const auto& p : box_samples(mech, 100, 4)) CHECK(std::abs(hj_residual(osc_h(1.0), osc, p)[0]) <= 1e-12);
  auto osc2 = oscillator_gamma(mech, 2.0, 0.1);
  for (const auto& p : box_samples(mech, 100, 5, 0.6)) CHECK(std::abs(hj_residual(osc_h(2.0), osc2, p)[0]) <= 1e-11);
}

TEST_CASE("property: hj_residual of linear_gamma is invariant under shifts with ab = cd") {
  for (double a : {0.5, -0.5}) {
    const double c = 0.5;
    for (double b : {-1.0, 0.3, 2.0}) {
      const double d_ok = a * b / c;
      auto ok = linear_gamma(kWave, a, b, c, d_ok);
      auto bad = linear_gamma(kWave, a, b, c, d_ok + 0.5);
      for (const auto& p : box_samples(kWave, 20, 6)) {
        CHECK(std::abs(hj_residual(wave_h(), ok, p)[0]) <= 1e-12);
        CHECK(std::abs(hj_residual(wave_h(), bad, p)[0]) > 0.1);
      }
    }
  }
}

TEST_CASE("reduced_connection examples") {
  auto conn = reduced_connection(wave_h(), linear_gamma(kWave, 0.5, 0.0, 0.5, 0.0));
  auto v = conn.values(pt(0.2, 0.3, 2.0));
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(-1.0));

  auto z = reduced_connection(wave_h(), zero_gamma(kWave)).values(pt(0.4, 0.1, 1.0));
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);

  CHECK(reduced_connection(kg_h(), oscillator_gamma(kWave, 1.0)).values(pt(0.0, 0.5, 1.0))[0] == 0.0);
}

TEST_CASE("property: closed HJ sections induce flat connections") {
  struct Case {
    HamiltonianModel H;
    HJSection g;
    double t_max;
  };
  std::vector<Case> cases = {{wave_h(), linear_gamma(kWave, 0.5, 0.0, 0.5, 0.0), 1.0},
                             {wave_h(), linear_gamma(kWave, -0.5, 0.2, 0.5, -0.2), 1.0},
                             {kg_h(1.0), oscillator_gamma(kWave, 1.0), 1.0}};
  for (const auto& c : cases) {
    const auto conn = reduced_connection(c.H, c.g);
    for (const auto& p : box_samples(kWave, 200, 7, c.t_max)) {
      CHECK(gamma_closedness_residual(c.g, {p})[0].sup() <= 1e-12);
      CHECK(max_abs(hj_residual(c.H, c.g, p)) <= 1e-12);
      CHECK(max_abs(flatness_residual(conn, p)) <= 1e-12);
    }
  }
}

TEST_CASE("restricted_connection_residual examples") {
  const auto g = make_grid(64);
  std::vector<double> cst(64, 0.8);
  CHECK(max_abs(restricted_connection_residual(wave_h(), zero_gamma(kWave), g, cst, 0.0)) == 0.0);
  CHECK(max_abs(restricted_connection_residual(kg_h(), oscillator_gamma(kWave, 1.0), g, cst, 0.4)) == 0.0);

  const auto s = on_grid(g, [](double x) { return std::sin(kTwoPi * x); });
  const auto r = restricted_connection_residual(wave_h(), zero_gamma(kWave), g, s, 0.0);
  const double bound = std::pow(kTwoPi, 3) * g.h * g.h / 6.0;
  CHECK(test::max_diff(r, on_grid(g, [](double x) { return kTwoPi * std::cos(kTwoPi * x); })) <= 1.001 * bound);
}

TEST_CASE("evolve_characteristics examples") {
  const Dimensions mech{0, 1};
  auto run = osc_run(osc_h(), oscillator_gamma(mech, 1.0), make_grid(1, 1.0, 0), 1.0);
  CHECK(run.times.back() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(run.u.back()[0] - std::cos(1.0)) <= 1e-9);

  const auto g = make_grid(32);
  auto kg = osc_run(kg_h(), oscillator_gamma(kWave, 1.0), g, 1.0);
  for (double v : kg.u.back()) CHECK(std::abs(v - std::cos(1.0)) <= 1e-9);
  CHECK(kg.times.size() == 101);

  std::vector<double> u0 = on_grid(g, [](double x) { return std::sin(kTwoPi * x); });
  auto still = evolve_characteristics(wave_h(), zero_gamma(kWave), g, u0, 0.0, 0.1, 1.0);
  CHECK(still.u.back() == u0);
}

TEST_CASE("evolve_characteristics refuses to cross a pole") {
  const Dimensions mech{0, 1};
  CHECK_THROWS_AS(evolve_characteristics(osc_h(), oscillator_gamma(mech, 1.0), make_grid(1, 1.0, 0), std::vector<double>{1.0},
                                         0.0, 1e-2, 2.0),
                  DomainError);
}

TEST_CASE("lift_by_gamma examples") {
  const auto g = make_grid(8);
  std::vector<double> two(8, 2.0);
  auto z = lift_by_gamma(zero_gamma(kWave), 0.3, g, two);
  CHECK(max_abs(z.p_t) == 0.0);
  CHECK(max_abs(z.p_x) == 0.0);
  auto l = lift_by_gamma(linear_gamma(kWave, 0.5, 0.0, 0.5, 0.0), 0.0, g, two);
  for (int j = 0; j < 8; ++j) {
    CHECK(l.p_t[j] == 1.0);
    CHECK(l.p_x[j] == 1.0);
  }
  CHECK(max_abs(lift_by_gamma(oscillator_gamma(kWave, 1.0), 0.0, g, two).p_t) == 0.0);
}

TEST_CASE("hj_lift_solution_check examples") {
  const auto g = make_grid(32);
  auto H = kg_h();
  auto gamma = oscillator_gamma(kWave, 1.0);
  auto run = evolve_characteristics(H, gamma, g, std::vector<double>(32, 1.0), 0.0, 1e-3, 1.0);
  auto rep = hj_lift_solution_check(H, gamma, g, run);
  CHECK(rep.hdw_split <= 1e-6);
  CHECK(rep.contraction <= 1e-6);
  CHECK(rep.pullback <= 1e-6);
  CHECK(rep.seed == 42);

  auto z = zero_gamma(kWave);
  auto zrun = evolve_characteristics(H, z, g, std::vector<double>(32, 1.0), 0.0, 1e-2, 0.1);
  CHECK(hj_lift_solution_check(H, z, g, zrun).contraction >= 0.1);

  auto wrun = evolve_characteristics(wave_h(), z, g, std::vector<double>(32, 0.3), 0.0, 1e-2, 0.1);
  auto wrep = hj_lift_solution_check(wave_h(), z, g, wrun);
  CHECK(wrep.hdw_split <= 1e-14);
  CHECK(wrep.contraction == 0.0);
  CHECK(wrep.pullback == 0.0);

  auto sine = on_grid(g, [](double x) { return std::sin(kTwoPi * x); });
  auto srun = evolve_characteristics(wave_h(), z, g, sine, 0.0, 1e-2, 0.1);
  CHECK_THROWS_AS(hj_lift_solution_check(wave_h(), z, g, srun), CertificationError);
}

TEST_CASE("property: characteristic kernels are bit-identical serial and parallel") {
  const auto g = make_grid(64);
  auto H = kg_h();
  auto gamma = oscillator_gamma(kWave, 1.0);
  auto u0 = on_grid(g, [](double x) { return 1.0 + 0.1 * std::sin(kTwoPi * x); });
  auto a = evolve_characteristics(H, gamma, g, u0, 0.0, 1e-2, 0.5, 1, 1e8, Execution::serial);
  auto b = evolve_characteristics(H, gamma, g, u0, 0.0, 1e-2, 0.5, 1, 1e8, Execution::parallel);
  CHECK(a.u.back() == b.u.back());
  CHECK(restricted_connection_residual(H, gamma, g, u0, 0.2, Execution::serial) ==
        restricted_connection_residual(H, gamma, g, u0, 0.2, Execution::parallel));
}

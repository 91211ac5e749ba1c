#ifndef DHJ_TESTS_SUPPORT_HPP
#define DHJ_TESTS_SUPPORT_HPP

#include "dhj/cauchy_space.hpp"
#include "dhj/fields_core.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace dhj::test {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline JetSample random_jet(const Dimensions& d, std::mt19937_64& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> U(-scale, scale);
  JetSample j = JetSample::zeros(d);
  j.t = U(rng);
  for (auto& v : j.x) v = U(rng);
  for (auto& v : j.u) v = U(rng);
  for (auto& v : j.u_t) v = U(rng);
  for (auto& v : j.u_x) v = U(rng);
  return j;
}

inline ReducedMomentumSample random_momentum(const Dimensions& d, std::mt19937_64& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> U(-scale, scale);
  ReducedMomentumSample s = ReducedMomentumSample::zeros(d);
  s.t = U(rng);
  for (auto& v : s.x) v = U(rng);
  for (auto& v : s.u) v = U(rng);
  for (auto& v : s.p_t) v = U(rng);
  for (auto& v : s.p_x) v = U(rng);
  return s;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <class F>
std::vector<double> on_grid(const CauchyGrid& g, F f) {
  std::vector<double> v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) v[j] = f(g.x[j]);
  return v;
}

/// State of the free wave u = sin(2 pi (x - t)) with p_t = u_t and the
/// discrete constraint p_x = -D_x u.
inline CauchyState wave_state(const CauchyGrid& g, double t) {
  CauchyState s = CauchyState::zeros({1, 1}, g, t);
  for (std::size_t j = 0; j < g.size(); ++j) {
    s.u[j] = std::sin(kTwoPi * (g.x[j] - t));
    s.p_t[j] = -kTwoPi * std::cos(kTwoPi * (g.x[j] - t));
  }
  const auto dxu = spatial_derivative(g, s.u);
  for (std::size_t j = 0; j < g.size(); ++j) s.p_x[j] = -dxu[j];
  return s;
}

}  // namespace dhj::test

#endif  // DHJ_TESTS_SUPPORT_HPP

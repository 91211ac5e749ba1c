#include "dhj/cotangent_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dhj {

namespace {

void expect_size(const char* what, std::size_t got, std::size_t want) {
  if (got != want)
    throw ValidationError(std::string(what) + " has " + std::to_string(got) + " entries, expected " +
                          std::to_string(want));
}

// Jet at every node with u_x = D_x u and u_t solving pi = dL/du_t.
std::vector<JetSample> node_jets(const LagrangianModel& L, const CauchyGrid& grid, const CotangentState& cs,
                                 Execution exec) {
  const Dimensions& d = L.dims();
  cs.check(d, grid);
  const std::size_t n = grid.size();
  std::vector<double> dxu;
  if (d.m == 1) dxu = spatial_derivative(grid, cs.u, exec);
  std::vector<JetSample> jets(n);
  for_each_node(exec, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    JetSample jet = JetSample::zeros(d);
    jet.t = cs.t;
    if (d.m == 1) jet.x[0] = grid.x[j];
    double scale = 0.0;
    for (int a = 0; a < d.n; ++a) {
      jet.u[a] = cs.u[a * n + j];
      for (int k = 0; k < d.m; ++k) jet.u_x[a * d.m + k] = dxu[(a * d.m + k) * n + j];
      scale = std::max(scale, std::abs(cs.pi[a * n + j]));
    }
    const double tol = 1e-12 * (1.0 + scale);
    auto residual = [&](const JetSample& q) {
      const auto g = eval_with_partials(L, q);
      Eigen::VectorXd r(d.n);
      for (int a = 0; a < d.n; ++a) r(a) = g.d_ut[a] - cs.pi[a * n + j];
      return r;
    };
    Eigen::VectorXd r = residual(jet);
    for (int it = 0;; ++it) {
      const double norm = r.lpNorm<Eigen::Infinity>();
      if (norm <= tol) break;
      if (it == 50) throw NumericalError("time Legendre inversion did not converge at node " + std::to_string(j));
      const Eigen::MatrixXd full = L.velocity_hessian(jet);
      Eigen::MatrixXd jac(d.n, d.n);
      for (int a = 0; a < d.n; ++a)
        for (int b = 0; b < d.n; ++b) jac(a, b) = full(d.slot(a, 0), d.slot(b, 0));
      Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
      if (!lu.isInvertible())
        throw NumericalError("time Legendre inversion: dL/du_t is singular at node " + std::to_string(j));
      const Eigen::VectorXd step = lu.solve(-r);
      double damping = 1.0;
      for (int tries = 0; tries < 30; ++tries, damping *= 0.5) {
        JetSample trial = jet;
        for (int a = 0; a < d.n; ++a) trial.u_t[a] += damping * step(a);
        const Eigen::VectorXd rt = residual(trial);
        if (rt.lpNorm<Eigen::Infinity>() <= norm || tries == 29) {
          jet = std::move(trial);
          r = rt;
          break;
        }
      }
    }
    jets[j] = std::move(jet);
  });
  return jets;
}

double hamiltonian_from_jets(const LagrangianModel& L, const CauchyGrid& grid, const CotangentState& cs,
                             const std::vector<JetSample>& jets) {
  const Dimensions& d = L.dims();
  const std::size_t n = grid.size();
  std::vector<double> density(n);
  for (std::size_t j = 0; j < n; ++j) {
    double v = -L.eval(jets[j]);
    for (int a = 0; a < d.n; ++a) v += cs.pi[a * n + j] * jets[j].u_t[a];
    density[j] = v;
  }
  return integrate_density(grid, density);
}

}  // namespace

void CotangentState::check(const Dimensions& dims, const CauchyGrid& grid) const {
  if (dims.m != grid.m) throw ValidationError("grid and model disagree on m");
  expect_size("cotangent u", u.size(), static_cast<std::size_t>(dims.n) * grid.size());
  expect_size("cotangent pi", pi.size(), static_cast<std::size_t>(dims.n) * grid.size());
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!std::isfinite(t) || !finite(u) || !finite(pi)) throw NumericalError("non-finite cotangent state");
}

CotangentVariation CotangentVariation::zeros(const Dimensions& dims, const CauchyGrid& grid, double k) {
  CotangentVariation v;
  v.k = k;
  v.du.assign(static_cast<std::size_t>(dims.n) * grid.size(), 0.0);
  v.dpi.assign(static_cast<std::size_t>(dims.n) * grid.size(), 0.0);
  return v;
}

void CotangentVariation::check(const Dimensions& dims, const CauchyGrid& grid) const {
  expect_size("variation du", du.size(), static_cast<std::size_t>(dims.n) * grid.size());
  expect_size("variation dpi", dpi.size(), static_cast<std::size_t>(dims.n) * grid.size());
}

CotangentState restriction_map_R(const CauchyState& state) { return {state.t, state.u, state.p_t}; }

CotangentVariation restriction_tangent(const TangentVariation& v) { return {v.k, v.du, v.dp_t}; }

std::vector<double> time_velocities(const LagrangianModel& L, const CauchyGrid& grid, const CotangentState& cs,
                                    Execution exec) {
  const auto jets = node_jets(L, grid, cs, exec);
  const std::size_t n = grid.size();
  std::vector<double> ut(cs.u.size());
  for (std::size_t j = 0; j < n; ++j)
    for (int a = 0; a < L.dims().n; ++a) ut[a * n + j] = jets[j].u_t[a];
  return ut;
}

double instantaneous_hamiltonian(const LagrangianModel& L, const CauchyGrid& grid, const CotangentState& cs,
                                 Execution exec) {
  return hamiltonian_from_jets(L, grid, cs, node_jets(L, grid, cs, exec));
}

VariationalDerivative variational_derivative(const LagrangianModel& L, const CauchyGrid& grid,
                                             const CotangentState& cs, Execution exec) {
  const Dimensions& d = L.dims();
  const std::size_t n = grid.size();
  const auto jets = node_jets(L, grid, cs, exec);
  VariationalDerivative vd;
  vd.d_u.resize(cs.u.size());
  vd.d_pi.resize(cs.u.size());
  std::vector<double> l_ux(static_cast<std::size_t>(d.n * d.m) * n);
  for_each_node(exec, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto g = eval_with_partials(L, jets[j]);
    for (int a = 0; a < d.n; ++a) {
      vd.d_u[a * n + j] = -g.d_u[a];
      vd.d_pi[a * n + j] = jets[j].u_t[a];
      for (int k = 0; k < d.m; ++k) l_ux[(a * d.m + k) * n + j] = g.d_ux[a * d.m + k];
    }
  });
  if (d.m == 1) {
    const auto adj = spatial_derivative_adjoint(grid, l_ux, exec);
    for (std::size_t i = 0; i < vd.d_u.size(); ++i) vd.d_u[i] -= adj[i];
  }
  if (!L.is_autonomous()) {
    const double step = L.fd_step();
    CotangentState plus = cs, minus = cs;
    plus.t += step;
    minus.t -= step;
    vd.d_t = (instantaneous_hamiltonian(L, grid, plus, exec) - instantaneous_hamiltonian(L, grid, minus, exec)) /
             (2.0 * step);
  }
  return vd;
}

double omega_pairing(const CauchyGrid& grid, const CotangentVariation& x, const CotangentVariation& y) {
  if (x.du.size() != y.du.size() || x.dpi.size() != y.dpi.size() || x.du.size() != x.dpi.size() ||
      x.du.size() % grid.size() != 0)
    throw ValidationError("variations do not match the grid");
  std::vector<double> density(x.du.size());
  for (std::size_t i = 0; i < density.size(); ++i) density[i] = x.du[i] * y.dpi[i] - x.dpi[i] * y.du[i];
  return integrate_density(grid, density);
}

double extended_form_pairing(const LagrangianModel& L, const CauchyGrid& grid, const CotangentState& cs,
                             const CotangentVariation& x, const CotangentVariation& y, Execution exec) {
  x.check(L.dims(), grid);
  y.check(L.dims(), grid);
  const auto vd = variational_derivative(L, grid, cs, exec);
  auto derivative_along = [&](const CotangentVariation& v) {
    std::vector<double> density(v.du.size());
    for (std::size_t i = 0; i < density.size(); ++i) density[i] = vd.d_u[i] * v.du[i] + vd.d_pi[i] * v.dpi[i];
    return integrate_density(grid, density) + v.k * vd.d_t;
  };
  return omega_pairing(grid, x, y) + derivative_along(x) * y.k - derivative_along(y) * x.k;
}

double cotangent_trajectory_residual(const LagrangianModel& L, const CauchyGrid& grid,
                                     const std::vector<CotangentState>& frames, std::uint64_t seed, int n_random,
                                     Execution exec) {
  const Dimensions& d = L.dims();
  std::vector<double> times;
  for (const auto& f : frames) {
    f.check(d, grid);
    times.push_back(f.t);
  }
  const double dt = uniform_frame_spacing(times);
  const std::size_t n = grid.size();

  std::vector<CotangentVariation> tests;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_random; ++i) tests.push_back(restriction_tangent(random_variation(d, grid, rng)));
  auto norm = [&](const CotangentVariation& v) {
    double s = v.k * v.k;
    for (std::size_t i = 0; i < v.du.size(); ++i) s += grid.w[i % n] * (v.du[i] * v.du[i] + v.dpi[i] * v.dpi[i]);
    return std::sqrt(s);
  };

  double worst = 0.0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const TimeStencil st = time_stencil(f, frames.size(), dt);
    std::vector<double> u_dot(frames[f].u.size(), 0.0), pi_dot(frames[f].u.size(), 0.0);
    for (int q = 0; q < 5; ++q) {
      const auto& src = frames[st.first + q];
      for (std::size_t i = 0; i < u_dot.size(); ++i) {
        u_dot[i] += st.weights[q] * src.u[i];
        pi_dot[i] += st.weights[q] * src.pi[i];
      }
    }
    const auto vd = variational_derivative(L, grid, frames[f], exec);
    // i_{c_dot}(omega + dh ^ dt) with k = 1, evaluated on vertical xi.
    std::vector<double> c_u(u_dot.size()), c_pi(u_dot.size());
    for (std::size_t i = 0; i < u_dot.size(); ++i) {
      const double w = grid.w[i % n];
      c_u[i] = w * (-pi_dot[i] - vd.d_u[i]);
      c_pi[i] = w * (u_dot[i] - vd.d_pi[i]);
      const double ind = 1.0 + std::sqrt(w);
      worst = std::max({worst, std::abs(c_u[i]) / ind, std::abs(c_pi[i]) / ind});
    }
    for (const auto& xi : tests) {
      double acc = 0.0;
      for (std::size_t i = 0; i < c_u.size(); ++i) acc += c_u[i] * xi.du[i] + c_pi[i] * xi.dpi[i];
      worst = std::max(worst, std::abs(acc) / (1.0 + norm(xi)));
    }
  }
  return worst;
}

double legendre_constraint_residual(const LagrangianModel& L, const CauchyGrid& grid, const CauchyState& state,
                                    Execution exec) {
  const Dimensions& d = L.dims();
  state.check(d, grid);
  if (d.m == 0) return 0.0;
  const auto jets = node_jets(L, grid, restriction_map_R(state), exec);
  const std::size_t n = grid.size();
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto g = eval_with_partials(L, jets[j]);
    for (int c = 0; c < d.n * d.m; ++c) worst = std::max(worst, std::abs(state.p_x[c * n + j] - g.d_ux[c]));
  }
  return worst;
}

CauchyState project_to_legendre_image(const LagrangianModel& L, const CauchyGrid& grid, const CauchyState& state,
                                      Execution exec) {
  const Dimensions& d = L.dims();
  state.check(d, grid);
  CauchyState out = state;
  if (d.m == 0) return out;
  const auto jets = node_jets(L, grid, restriction_map_R(state), exec);
  const std::size_t n = grid.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto g = eval_with_partials(L, jets[j]);
    for (int c = 0; c < d.n * d.m; ++c) out.p_x[c * n + j] = g.d_ux[c];
  }
  return out;
}

double pullback_identity_residual(const LagrangianModel& L, const HamiltonianModel& H, const CauchyGrid& grid,
                                  const CauchyState& state, const TangentVariation& x, const TangentVariation& y,
                                  Execution exec) {
  const double off = legendre_constraint_residual(L, grid, state, exec);
  if (off > kConstraintTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "state is off the Legendre image: constraint residual " << off << " exceeds " << kConstraintTolerance;
    throw CertificationError(os.str());
  }
  const double lhs = extended_form_pairing(L, grid, restriction_map_R(state), restriction_tangent(x),
                                           restriction_tangent(y), exec);
  const double rhs = presymplectic_pairing(H, grid, state, x, y, exec);
  return std::abs(lhs - rhs);
}

CotangentState hat_gamma(const HJSection& gamma, double t, const CauchyGrid& grid, std::span<const double> u,
                         Execution exec) {
  return restriction_map_R(lift_by_gamma(gamma, t, grid, u, exec));
}

}  // namespace dhj

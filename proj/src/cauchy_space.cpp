#include "dhj/cauchy_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dhj {

namespace {

void expect_size(const char* what, std::size_t got, std::size_t want) {
  if (got != want)
    throw ValidationError(std::string(what) + " has " + std::to_string(got) + " entries, expected " +
                          std::to_string(want));
}

bool finite_all(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::size_t blocks(const Dimensions& d, int per_alpha) { return static_cast<std::size_t>(d.n * per_alpha); }

void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

}  // namespace

CauchyGrid make_grid(int n_nodes, double length, int m) {
  if (n_nodes < 1) throw ValidationError("grid needs at least one node");
  if (!(length > 0.0) || !std::isfinite(length)) throw ValidationError("grid length must be positive");
  if (m != 0 && m != 1) throw ValidationError("grid supports m = 0 or m = 1");
  CauchyGrid g;
  g.m = m;
  g.n_nodes = n_nodes;
  g.length = length;
  if (m == 0) {
    if (n_nodes != 1) throw ValidationError("m = 0 grids have exactly one node");
    g.h = 1.0;
    g.x = {0.0};
    g.w = {1.0};
    return g;
  }
  g.h = length / n_nodes;
  g.x.resize(n_nodes);
  g.w.assign(n_nodes, g.h);
  for (int j = 0; j < n_nodes; ++j) g.x[j] = j * g.h;
  return g;
}

CauchyState CauchyState::zeros(const Dimensions& dims, const CauchyGrid& grid, double t) {
  CauchyState s;
  s.t = t;
  s.u.assign(blocks(dims, 1) * grid.size(), 0.0);
  s.p_t.assign(blocks(dims, 1) * grid.size(), 0.0);
  s.p_x.assign(blocks(dims, dims.m) * grid.size(), 0.0);
  return s;
}

void CauchyState::check(const Dimensions& dims, const CauchyGrid& grid) const {
  if (dims.m != grid.m) throw ValidationError("grid and model disagree on m");
  expect_size("state u", u.size(), blocks(dims, 1) * grid.size());
  expect_size("state p_t", p_t.size(), blocks(dims, 1) * grid.size());
  expect_size("state p_x", p_x.size(), blocks(dims, dims.m) * grid.size());
  if (!std::isfinite(t) || !finite_all(u) || !finite_all(p_t) || !finite_all(p_x))
    throw NumericalError("non-finite Cauchy state");
}

ReducedMomentumSample CauchyState::node(const Dimensions& dims, const CauchyGrid& grid, int j) const {
  const std::size_t n = grid.size();
  ReducedMomentumSample s = ReducedMomentumSample::zeros(dims);
  s.t = t;
  if (dims.m == 1) s.x[0] = grid.x[j];
  for (int a = 0; a < dims.n; ++a) {
    s.u[a] = u[a * n + j];
    s.p_t[a] = p_t[a * n + j];
    for (int k = 0; k < dims.m; ++k) s.p_x[a * dims.m + k] = p_x[(a * dims.m + k) * n + j];
  }
  return s;
}

TangentVariation TangentVariation::zeros(const Dimensions& dims, const CauchyGrid& grid, double k) {
  TangentVariation v;
  v.k = k;
  v.du.assign(blocks(dims, 1) * grid.size(), 0.0);
  v.dp_t.assign(blocks(dims, 1) * grid.size(), 0.0);
  v.dp_x.assign(blocks(dims, dims.m) * grid.size(), 0.0);
  return v;
}

void TangentVariation::check(const Dimensions& dims, const CauchyGrid& grid) const {
  expect_size("variation du", du.size(), blocks(dims, 1) * grid.size());
  expect_size("variation dp_t", dp_t.size(), blocks(dims, 1) * grid.size());
  expect_size("variation dp_x", dp_x.size(), blocks(dims, dims.m) * grid.size());
}

double variation_norm(const CauchyGrid& grid, const TangentVariation& v) {
  auto sq = [&](const std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += grid.w[k % grid.size()] * a[k] * a[k];
    return s;
  };
  return std::sqrt(v.k * v.k + sq(v.du) + sq(v.dp_t) + sq(v.dp_x));
}

std::vector<double> spatial_derivative(const CauchyGrid& grid, std::span<const double> values, Execution exec) {
  if (grid.m != 1) throw ValidationError("spatial derivative needs m = 1");
  if (grid.n_nodes < 3) throw ValidationError("spatial derivative needs at least 3 nodes");
  if (values.size() % grid.size() != 0) throw ValidationError("values do not match the grid");
  std::vector<double> out(values.size());
  kernels::central_difference(exec, values, grid.size(), grid.h, out);
  return out;
}

std::vector<double> spatial_derivative_adjoint(const CauchyGrid& grid, std::span<const double> values,
                                               Execution exec) {
  if (grid.m != 1) throw ValidationError("spatial derivative needs m = 1");
  if (grid.n_nodes < 3) throw ValidationError("spatial derivative needs at least 3 nodes");
  if (values.size() % grid.size() != 0) throw ValidationError("values do not match the grid");
  std::vector<double> out(values.size());
  kernels::central_difference_adjoint(exec, values, grid.size(), grid.h, out);
  return out;
}

double integrate_density(const CauchyGrid& grid, std::span<const double> values) {
  if (values.size() % grid.size() != 0) throw ValidationError("density does not match the grid");
  return kernels::weighted_sum(values, grid.w);
}

// ---------------------------------------------------------------------------

std::vector<double> recover_spatial_momenta(const HamiltonianModel& H, const CauchyGrid& grid,
                                            const CauchyState& state, std::span<const double> guess,
                                            Execution exec) {
  const Dimensions& d = H.dims();
  if (d.m == 0) return {};
  expect_size("state u", state.u.size(), blocks(d, 1) * grid.size());
  expect_size("state p_t", state.p_t.size(), blocks(d, 1) * grid.size());
  const std::size_t n = grid.size();
  const int ns = d.n * d.m;
  const auto target = spatial_derivative(grid, state.u, exec);
  const bool warm = guess.size() == blocks(d, d.m) * n;

  std::vector<int> space_slots;
  for (int a = 0; a < d.n; ++a)
    for (int k = 0; k < d.m; ++k) space_slots.push_back(d.slot(a, k + 1));

  std::vector<double> out(blocks(d, d.m) * n);
  for_each_node(exec, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    ReducedMomentumSample s = ReducedMomentumSample::zeros(d);
    s.t = state.t;
    s.x[0] = grid.x[j];
    double scale = 0.0;
    Eigen::VectorXd tgt(ns);
    for (int a = 0; a < d.n; ++a) {
      s.u[a] = state.u[a * n + j];
      s.p_t[a] = state.p_t[a * n + j];
      for (int k = 0; k < d.m; ++k) {
        const std::size_t c = static_cast<std::size_t>(a * d.m + k);
        s.p_x[c] = warm ? guess[c * n + j] : 0.0;
        tgt(c) = target[c * n + j];
        scale = std::max(scale, std::abs(tgt(c)));
      }
    }
    const double tol = 1e-12 * (1.0 + scale);
    auto residual = [&](const ReducedMomentumSample& q) {
      const auto g = eval_with_partials(H, q);
      Eigen::VectorXd r(ns);
      for (int c = 0; c < ns; ++c) r(c) = g.d_px[c] - tgt(c);
      return r;
    };

    Eigen::VectorXd r = residual(s);
    for (int it = 0;; ++it) {
      const double norm = r.lpNorm<Eigen::Infinity>();
      if (norm <= tol) break;
      if (it == 50) throw NumericalError("spatial momentum recovery did not converge at node " + std::to_string(j));
      const Eigen::MatrixXd full = H.momentum_hessian(s);
      Eigen::MatrixXd jac(ns, ns);
      for (int r0 = 0; r0 < ns; ++r0)
        for (int c0 = 0; c0 < ns; ++c0) jac(r0, c0) = full(space_slots[r0], space_slots[c0]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
      if (!lu.isInvertible())
        throw NumericalError("spatial momentum recovery: dH/dp_x is singular at node " + std::to_string(j));
      const Eigen::VectorXd step = lu.solve(-r);
      double damping = 1.0;
      for (int tries = 0; tries < 30; ++tries, damping *= 0.5) {
        ReducedMomentumSample trial = s;
        for (int c = 0; c < ns; ++c) trial.p_x[c] += damping * step(c);
        const Eigen::VectorXd rt = residual(trial);
        if (rt.lpNorm<Eigen::Infinity>() <= norm || tries == 29) {
          s = std::move(trial);
          r = rt;
          break;
        }
      }
    }
    for (int c = 0; c < ns; ++c) out[static_cast<std::size_t>(c) * n + j] = s.p_x[c];
  });
  return out;
}

HdwRhs hdw_rhs(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state, Execution exec) {
  const Dimensions& d = H.dims();
  if (grid.m != d.m) throw ValidationError("grid and model disagree on m");
  const std::size_t n = grid.size();
  HdwRhs rhs;
  rhs.p_x = recover_spatial_momenta(H, grid, state, state.p_x, exec);
  std::vector<double> div;
  if (d.m == 1) div = spatial_derivative(grid, rhs.p_x, exec);
  rhs.u_dot.resize(blocks(d, 1) * n);
  rhs.pt_dot.resize(blocks(d, 1) * n);

  CauchyState full{state.t, state.u, state.p_t, rhs.p_x};
  for_each_node(exec, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto g = eval_with_partials(H, full.node(d, grid, static_cast<int>(j)));
    for (int a = 0; a < d.n; ++a) {
      double dpx = 0.0;
      for (int k = 0; k < d.m; ++k) dpx += div[(a * d.m + k) * n + j];
      rhs.u_dot[a * n + j] = g.d_pt[a];
      rhs.pt_dot[a * n + j] = -g.d_u[a] - dpx;
    }
  });
  return rhs;
}

CauchyState with_recovered_momenta(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state,
                                   Execution exec) {
  CauchyState out = state;
  out.p_x = recover_spatial_momenta(H, grid, state, state.p_x, exec);
  return out;
}

CauchyState step_rk4(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state, double dt,
                     Execution exec) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  state.check(H.dims(), grid);

  auto stage = [&](const HdwRhs& k, double c) {
    CauchyState s = state;
    s.t = state.t + c * dt;
    axpy(s.u, c * dt, k.u_dot);
    axpy(s.p_t, c * dt, k.pt_dot);
    s.p_x = k.p_x;
    return s;
  };
  const HdwRhs k1 = hdw_rhs(H, grid, state, exec);
  const HdwRhs k2 = hdw_rhs(H, grid, stage(k1, 0.5), exec);
  const HdwRhs k3 = hdw_rhs(H, grid, stage(k2, 0.5), exec);
  const HdwRhs k4 = hdw_rhs(H, grid, stage(k3, 1.0), exec);

  CauchyState next = state;
  next.t = state.t + dt;
  for (std::size_t i = 0; i < next.u.size(); ++i) {
    next.u[i] += dt / 6.0 * (k1.u_dot[i] + 2.0 * k2.u_dot[i] + 2.0 * k3.u_dot[i] + k4.u_dot[i]);
    next.p_t[i] += dt / 6.0 * (k1.pt_dot[i] + 2.0 * k2.pt_dot[i] + 2.0 * k3.pt_dot[i] + k4.pt_dot[i]);
  }
  next.p_x = k4.p_x;
  if (!finite_all(next.u) || !finite_all(next.p_t)) throw NumericalError("RK4 step produced non-finite values");
  next.p_x = recover_spatial_momenta(H, grid, next, next.p_x, exec);
  return next;
}

std::vector<CauchyState> simulate(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& initial,
                                  double dt, int steps, int stride, Execution exec) {
  if (steps < 0) throw ValidationError("step count must be non-negative");
  if (stride < 1) throw ValidationError("output stride must be at least 1");
  std::vector<CauchyState> frames;
  CauchyState s = with_recovered_momenta(H, grid, initial, exec);
  const double t0 = initial.t;
  frames.push_back(s);
  for (int i = 1; i <= steps; ++i) {
    try {
      s = step_rk4(H, grid, s, dt, exec);
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(i) + ": " + e.what());
    }
    s.t = t0 + i * dt;  // no accumulated drift in the clock
    if (i % stride == 0 || i == steps) frames.push_back(s);
  }
  return frames;
}

// ---------------------------------------------------------------------------

double PairingCovector::apply(const TangentVariation& y) const {
  double acc = k * y.k;
  for (std::size_t i = 0; i < du.size(); ++i) acc += du[i] * y.du[i];
  for (std::size_t i = 0; i < dp_t.size(); ++i) acc += dp_t[i] * y.dp_t[i];
  for (std::size_t i = 0; i < dp_x.size(); ++i) acc += dp_x[i] * y.dp_x[i];
  return acc;
}

PresymplecticForm::PresymplecticForm(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state,
                                     Execution exec)
    : dims_(H.dims()), grid_(grid), exec_(exec) {
  state.check(dims_, grid_);
  const std::size_t n = grid_.size();
  const Dimensions d = dims_;
  h_t_.resize(n);
  h_u_.resize(blocks(d, 1) * n);
  h_pt_.resize(blocks(d, 1) * n);
  h_px_.resize(blocks(d, d.m) * n);
  for_each_node(exec, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto g = eval_with_partials(H, state.node(d, grid_, static_cast<int>(j)));
    h_t_[j] = g.d_t;
    for (int a = 0; a < d.n; ++a) {
      h_u_[a * n + j] = g.d_u[a];
      h_pt_[a * n + j] = g.d_pt[a];
      for (int k = 0; k < d.m; ++k) h_px_[(a * d.m + k) * n + j] = g.d_px[a * d.m + k];
    }
  });
  dx_px_.assign(blocks(d, 1) * n, 0.0);
  if (d.m == 1) {
    dx_u_ = spatial_derivative(grid_, state.u, exec);
    dx_px_ = spatial_derivative(grid_, state.p_x, exec);
  }
}

double PresymplecticForm::pair(const TangentVariation& x, const TangentVariation& y) const {
  x.check(dims_, grid_);
  y.check(dims_, grid_);
  const Dimensions d = dims_;
  const std::size_t n = grid_.size();
  std::vector<double> density(n);
  for_each_node(exec_, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    double xh = x.k * h_t_[j];
    double yh = y.k * h_t_[j];
    double canonical = 0.0;
    double kx_part = 0.0;
    double ky_part = 0.0;
    for (int a = 0; a < d.n; ++a) {
      const std::size_t i = a * n + j;
      xh += h_u_[i] * x.du[i] + h_pt_[i] * x.dp_t[i];
      yh += h_u_[i] * y.du[i] + h_pt_[i] * y.dp_t[i];
      canonical += x.du[i] * y.dp_t[i] - x.dp_t[i] * y.du[i];
      kx_part -= y.du[i] * dx_px_[i];
      ky_part -= x.du[i] * dx_px_[i];
      for (int k = 0; k < d.m; ++k) {
        const std::size_t c = (a * d.m + k) * n + j;
        xh += h_px_[c] * x.dp_x[c];
        yh += h_px_[c] * y.dp_x[c];
        kx_part += y.dp_x[c] * dx_u_[c];
        ky_part += x.dp_x[c] * dx_u_[c];
      }
    }
    density[j] = (xh * y.k - yh * x.k) + canonical + x.k * kx_part - y.k * ky_part;
  });
  return integrate_density(grid_, density);
}

PairingCovector PresymplecticForm::contract(const TangentVariation& x) const {
  x.check(dims_, grid_);
  const Dimensions d = dims_;
  const std::size_t n = grid_.size();
  PairingCovector c;
  c.du.resize(blocks(d, 1) * n);
  c.dp_t.resize(blocks(d, 1) * n);
  c.dp_x.resize(blocks(d, d.m) * n);
  std::vector<double> k_density(n);
  for_each_node(exec_, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    const double w = grid_.w[j];
    double kd = 0.0;
    for (int a = 0; a < d.n; ++a) {
      const std::size_t i = a * n + j;
      c.du[i] = w * (-x.k * h_u_[i] - x.dp_t[i] - x.k * dx_px_[i]);
      c.dp_t[i] = w * (-x.k * h_pt_[i] + x.du[i]);
      kd += h_u_[i] * x.du[i] + h_pt_[i] * x.dp_t[i] + x.du[i] * dx_px_[i];
      for (int k = 0; k < d.m; ++k) {
        const std::size_t q = (a * d.m + k) * n + j;
        c.dp_x[q] = w * (-x.k * h_px_[q] + x.k * dx_u_[q]);
        kd += h_px_[q] * x.dp_x[q] - x.dp_x[q] * dx_u_[q];
      }
    }
    k_density[j] = kd;
  });
  c.k = integrate_density(grid_, k_density);
  return c;
}

double presymplectic_pairing(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state,
                             const TangentVariation& x, const TangentVariation& y, Execution exec) {
  return PresymplecticForm(H, grid, state, exec).pair(x, y);
}

// ---------------------------------------------------------------------------

std::vector<TangentVariation> VariationSet::materialize(const Dimensions& dims, const CauchyGrid& grid) const {
  std::vector<TangentVariation> out;
  if (node_indicators) {
    const TangentVariation zero = TangentVariation::zeros(dims, grid);
    for (auto member : {&TangentVariation::du, &TangentVariation::dp_t, &TangentVariation::dp_x}) {
      for (std::size_t i = 0; i < (zero.*member).size(); ++i) {
        TangentVariation v = zero;
        (v.*member)[i] = 1.0;
        out.push_back(std::move(v));
      }
    }
  }
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

TangentVariation random_variation(const Dimensions& dims, const CauchyGrid& grid, std::mt19937_64& rng,
                                  bool with_time_component) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  TangentVariation v = TangentVariation::zeros(dims, grid);
  if (with_time_component) v.k = unif(rng);
  const std::size_t n = grid.size();
  const double two_pi = 2.0 * std::numbers::pi;
  for (auto* arr : {&v.du, &v.dp_t, &v.dp_x}) {
    for (std::size_t b = 0; b < arr->size() / n; ++b) {
      const double a0 = unif(rng);
      std::array<double, 4> ca{}, cb{};
      for (int k = 1; k <= 3; ++k) {
        ca[k] = unif(rng);
        cb[k] = unif(rng);
      }
      for (std::size_t j = 0; j < n; ++j) {
        double f = a0;
        for (int k = 1; k <= 3; ++k) {
          const double ph = two_pi * k * grid.x[j] / grid.length;
          f += (ca[k] * std::cos(ph) + cb[k] * std::sin(ph)) / (1.0 + k);
        }
        (*arr)[b * n + j] = f;
      }
    }
  }
  return v;
}

VariationSet standard_test_set(const Dimensions& dims, const CauchyGrid& grid, std::uint64_t seed, int n_random) {
  VariationSet set;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_random; ++i) set.extra.push_back(random_variation(dims, grid, rng));
  return set;
}

double dynamical_trajectory_residual(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state,
                                     const TangentVariation& state_dot, const VariationSet& test_set,
                                     Execution exec) {
  if (!test_set.node_indicators && test_set.extra.empty()) throw ValidationError("test set is empty");
  const PresymplecticForm form(H, grid, state, exec);
  TangentVariation xdot = state_dot;
  xdot.k = 1.0;
  const PairingCovector cov = form.contract(xdot);
  const std::size_t n = grid.size();
  double worst = 0.0;
  if (test_set.node_indicators) {
    for (const auto* arr : {&cov.du, &cov.dp_t, &cov.dp_x})
      for (std::size_t i = 0; i < arr->size(); ++i)
        worst = std::max(worst, std::abs((*arr)[i]) / (1.0 + std::sqrt(grid.w[i % n])));
  }
  for (const auto& xi : test_set.extra) {
    xi.check(H.dims(), grid);
    worst = std::max(worst, std::abs(cov.apply(xi)) / (1.0 + variation_norm(grid, xi)));
  }
  return worst;
}

// ---------------------------------------------------------------------------

TimeStencil time_stencil(std::size_t i, std::size_t count, double dt) {
  if (count < 5) throw ValidationError("time differencing needs at least 5 frames");
  if (i >= count) throw ValidationError("frame index out of range");
  const double s = 1.0 / (12.0 * dt);
  TimeStencil st;
  if (i == 0) {
    st.first = 0;
    st.weights = {-25 * s, 48 * s, -36 * s, 16 * s, -3 * s};
  } else if (i == 1) {
    st.first = 0;
    st.weights = {-3 * s, -10 * s, 18 * s, -6 * s, 1 * s};
  } else if (i == count - 2) {
    st.first = count - 5;
    st.weights = {-1 * s, 6 * s, -18 * s, 10 * s, 3 * s};
  } else if (i == count - 1) {
    st.first = count - 5;
    st.weights = {3 * s, -16 * s, 36 * s, -48 * s, 25 * s};
  } else {
    st.first = i - 2;
    st.weights = {1 * s, -8 * s, 0.0, 8 * s, -1 * s};
  }
  return st;
}

double uniform_frame_spacing(const std::vector<double>& times) {
  if (times.size() < 5) throw ValidationError("time differencing needs at least 5 frames");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw ValidationError("frame times must increase");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * dt)
      throw ValidationError("frames must be equally spaced in time");
  return dt;
}

std::vector<TangentVariation> frame_velocities(const Dimensions& dims, const CauchyGrid& grid,
                                               const std::vector<CauchyState>& frames) {
  std::vector<double> times;
  for (const auto& f : frames) {
    f.check(dims, grid);
    times.push_back(f.t);
  }
  const double dt = uniform_frame_spacing(times);
  std::vector<TangentVariation> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const TimeStencil st = time_stencil(i, frames.size(), dt);
    TangentVariation v = TangentVariation::zeros(dims, grid, 1.0);
    for (int q = 0; q < 5; ++q) {
      const auto& f = frames[st.first + q];
      axpy(v.du, st.weights[q], f.u);
      axpy(v.dp_t, st.weights[q], f.p_t);
      axpy(v.dp_x, st.weights[q], f.p_x);
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace dhj

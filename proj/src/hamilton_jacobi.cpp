#include "dhj/hamilton_jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dhj {

namespace {

double param_or(const ParameterMap& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

int z_t() { return 0; }
int z_x(int k) { return 1 + k; }
int z_u(const Dimensions& d, int alpha) { return 1 + d.m + alpha; }

ReducedMomentumSample momentum_on_gamma(const Dimensions& d, const BundlePoint& p, const GammaValue& g) {
  ReducedMomentumSample s;
  s.t = p.t;
  s.x = p.x;
  s.u = p.u;
  s.p_t = g.p_t;
  s.p_x = g.p_x;
  s.check(d);
  return s;
}

}  // namespace

BundlePoint bundle_point(double t, std::span<const double> x, std::span<const double> u) {
  return {t, std::vector<double>(x.begin(), x.end()), std::vector<double>(u.begin(), u.end())};
}

HJSection::HJSection(Dimensions dims, ValueFn value, std::string name)
    : dims_(dims), value_(std::move(value)), name_(std::move(name)) {
  dims_.validate();
  if (!value_) throw ValidationError("section needs an evaluation procedure");
}

HJSection& HJSection::with_jacobian(JacobianFn fn) {
  jacobian_ = std::move(fn);
  return *this;
}

HJSection& HJSection::with_fd_step(double step) {
  if (!(step > 0.0)) throw ValidationError("finite difference step must be positive");
  fd_step_ = step;
  return *this;
}

GammaValue HJSection::eval(const BundlePoint& p) const {
  if (static_cast<int>(p.x.size()) != dims_.m || static_cast<int>(p.u.size()) != dims_.n)
    throw ValidationError("bundle point does not match section dimensions");
  GammaValue g = value_(p);
  if (static_cast<int>(g.p_t.size()) != dims_.n || static_cast<int>(g.p_x.size()) != dims_.n * dims_.m)
    throw ValidationError("section '" + name_ + "' returned misshaped components");
  bool ok = std::isfinite(g.p);
  for (double v : g.p_t) ok = ok && std::isfinite(v);
  for (double v : g.p_x) ok = ok && std::isfinite(v);
  if (!ok) throw NumericalError("section '" + name_ + "' is not finite at t = " + std::to_string(p.t));
  return g;
}

std::vector<double> HJSection::jacobian(const BundlePoint& p) const {
  const int nz = dims_.bundle_coords();
  std::vector<double> jac;
  if (jacobian_) {
    jac = jacobian_(p);
  } else {
    auto flat = [this](const BundlePoint& q) {
      const GammaValue g = eval(q);
      std::vector<double> v{g.p};
      v.insert(v.end(), g.p_t.begin(), g.p_t.end());
      v.insert(v.end(), g.p_x.begin(), g.p_x.end());
      return v;
    };
    jac = bundle_jacobian_fd(dims_, flat, p, fd_step_);
  }
  if (static_cast<int>(jac.size()) != rows() * nz) throw ValidationError("section Jacobian is misshaped");
  return jac;
}

// ---------------------------------------------------------------------------

HJSection linear_gamma(const Dimensions& dims, double a, double b, double c, double d, double p0) {
  for (double v : {a, b, c, d, p0})
    if (!std::isfinite(v)) throw ValidationError("linear_gamma parameters must be finite");
  auto value = [dims, a, b, c, d, p0](const BundlePoint& p) {
    GammaValue g;
    g.p = p0;
    g.p_t.resize(dims.n);
    g.p_x.resize(static_cast<std::size_t>(dims.n * dims.m));
    for (int al = 0; al < dims.n; ++al) {
      g.p_t[al] = a * p.u[al] + b;
      for (int k = 0; k < dims.m; ++k) g.p_x[al * dims.m + k] = c * p.u[al] + d;
    }
    return g;
  };
  HJSection s(dims, value, "linear_gamma");
  const int nz = dims.bundle_coords();
  s.with_jacobian([dims, a, c, nz, rows = s.rows()](const BundlePoint&) {
    std::vector<double> j(static_cast<std::size_t>(rows * nz), 0.0);
    for (int al = 0; al < dims.n; ++al) {
      j[(1 + al) * nz + z_u(dims, al)] = a;
      for (int k = 0; k < dims.m; ++k) j[(1 + dims.n + al * dims.m + k) * nz + z_u(dims, al)] = c;
    }
    return j;
  });
  return s;
}

namespace {

double pole_distance(double theta) {
  return std::abs(std::remainder(theta - 0.5 * std::numbers::pi, std::numbers::pi));
}

void guard_pole(double omega, double phi, double t) {
  const double theta = omega * t + phi;
  if (pole_distance(theta) < kPoleGuard) {
    std::ostringstream os;
    os.precision(17);
    os << "oscillator_gamma: omega t + phi = " << theta << " at t = " << t
       << " is within " << kPoleGuard << " of a pole of tan";
    throw DomainError(os.str());
  }
}

}  // namespace

HJSection oscillator_gamma(const Dimensions& dims, double omega, double phi) {
  if (!std::isfinite(omega) || !std::isfinite(phi)) throw ValidationError("oscillator_gamma parameters must be finite");
  auto value = [dims, omega, phi](const BundlePoint& p) {
    guard_pole(omega, phi, p.t);
    const double th = omega * p.t + phi;
    const double tn = std::tan(th);
    const double sec2 = 1.0 / (std::cos(th) * std::cos(th));
    GammaValue g;
    g.p_t.resize(dims.n);
    g.p_x.assign(static_cast<std::size_t>(dims.n * dims.m), 0.0);
    double usq = 0.0;
    for (int al = 0; al < dims.n; ++al) {
      g.p_t[al] = -omega * tn * p.u[al];
      usq += p.u[al] * p.u[al];
    }
    g.p = -0.5 * omega * omega * sec2 * usq;
    return g;
  };
  HJSection s(dims, value, "oscillator_gamma");
  const int nz = dims.bundle_coords();
  s.with_jacobian([dims, omega, phi, nz, rows = s.rows()](const BundlePoint& p) {
    guard_pole(omega, phi, p.t);
    const double th = omega * p.t + phi;
    const double tn = std::tan(th);
    const double sec2 = 1.0 / (std::cos(th) * std::cos(th));
    std::vector<double> j(static_cast<std::size_t>(rows * nz), 0.0);
    double usq = 0.0;
    for (int al = 0; al < dims.n; ++al) {
      usq += p.u[al] * p.u[al];
      j[z_u(dims, al)] = -omega * omega * sec2 * p.u[al];
      j[(1 + al) * nz + z_t()] = -omega * omega * sec2 * p.u[al];
      j[(1 + al) * nz + z_u(dims, al)] = -omega * tn;
    }
    j[z_t()] = -omega * omega * omega * sec2 * tn * usq;
    return j;
  });
  return s;
}

HJSection zero_gamma(const Dimensions& dims) {
  return linear_gamma(dims, 0.0, 0.0, 0.0, 0.0, 0.0);
}

const std::vector<std::string>& gamma_family_names() {
  static const std::vector<std::string> names = {"linear_gamma", "oscillator_gamma", "zero"};
  return names;
}

HJSection gamma_family(const std::string& name, const Dimensions& dims, const ParameterMap& params) {
  if (name == "linear_gamma")
    return linear_gamma(dims, param_or(params, "a", 0.0), param_or(params, "b", 0.0), param_or(params, "c", 0.0),
                        param_or(params, "d", 0.0), param_or(params, "p0", 0.0));
  if (name == "oscillator_gamma")
    return oscillator_gamma(dims, param_or(params, "omega", 1.0), param_or(params, "phi", 0.0));
  if (name == "zero") return zero_gamma(dims);
  std::string msg = "unknown gamma family '" + name + "'; known families:";
  for (const auto& n : gamma_family_names()) msg += " " + n;
  throw ValidationError(msg);
}

// ---------------------------------------------------------------------------

double ClosednessResidual::sup() const { return std::max(sup_abs(symmetry), sup_abs(divergence)); }

std::vector<ClosednessResidual> gamma_closedness_residual(const HJSection& gamma,
                                                          const std::vector<BundlePoint>& samples) {
  const Dimensions& d = gamma.dims();
  const int nz = d.bundle_coords();
  std::vector<ClosednessResidual> out;
  out.reserve(samples.size());
  for (const auto& p : samples) {
    const auto j = gamma.jacobian(p);
    auto at = [&](int row, int z) { return j[row * nz + z]; };
    ClosednessResidual r;
    for (int a = 0; a < d.n; ++a)
      for (int b = a + 1; b < d.n; ++b) {
        r.symmetry.push_back(at(gamma.row_pt(a), z_u(d, b)) - at(gamma.row_pt(b), z_u(d, a)));
        for (int k = 0; k < d.m; ++k)
          r.symmetry.push_back(at(gamma.row_px(a, k), z_u(d, b)) - at(gamma.row_px(b, k), z_u(d, a)));
      }
    r.divergence.resize(d.n);
    for (int a = 0; a < d.n; ++a) {
      double v = at(0, z_u(d, a)) - at(gamma.row_pt(a), z_t());
      for (int k = 0; k < d.m; ++k) v -= at(gamma.row_px(a, k), z_x(k));
      r.divergence[a] = v;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> hj_residual(const HamiltonianModel& H, const HJSection& gamma, const BundlePoint& p) {
  const Dimensions& d = H.dims();
  if (!(d == gamma.dims())) throw ValidationError("Hamiltonian and section dimensions differ");
  const int nz = d.bundle_coords();
  const GammaValue g = gamma.eval(p);
  const auto j = gamma.jacobian(p);
  const auto hg = eval_with_partials(H, momentum_on_gamma(d, p, g));
  auto at = [&](int row, int z) { return j[row * nz + z]; };
  std::vector<double> r(d.n);
  for (int a = 0; a < d.n; ++a) {
    double v = hg.d_u[a] + at(gamma.row_pt(a), z_t());
    for (int b = 0; b < d.n; ++b) {
      v += hg.d_pt[b] * at(gamma.row_pt(b), z_u(d, a));
      for (int k = 0; k < d.m; ++k) v += hg.d_px[b * d.m + k] * at(gamma.row_px(b, k), z_u(d, a));
    }
    for (int k = 0; k < d.m; ++k) v += at(gamma.row_px(a, k), z_x(k));
    r[a] = v;
  }
  return r;
}

ConnectionCoefficients reduced_connection(const HamiltonianModel& H, const HJSection& gamma) {
  const Dimensions d = H.dims();
  if (!(d == gamma.dims())) throw ValidationError("Hamiltonian and section dimensions differ");
  ConnectionCoefficients c;
  c.dims = d;
  c.values = [H, gamma, d](const BundlePoint& p) {
    const auto hg = eval_with_partials(H, momentum_on_gamma(d, p, gamma.eval(p)));
    return hg.momentum_gradient(d);
  };
  c.partials = [H, gamma, d](const BundlePoint& p) {
    const int nz = d.bundle_coords();
    const int ns = d.slots();
    const auto s = momentum_on_gamma(d, p, gamma.eval(p));
    const Eigen::MatrixXd hpp = H.momentum_hessian(s);
    const auto j = gamma.jacobian(p);
    // Row of the section Jacobian holding the momentum in each slot.
    std::vector<int> row_of(ns);
    for (int a = 0; a < d.n; ++a) {
      row_of[d.slot(a, 0)] = gamma.row_pt(a);
      for (int k = 0; k < d.m; ++k) row_of[d.slot(a, k + 1)] = gamma.row_px(a, k);
    }
    // Explicit (t, x, u) dependence of dH/dp at fixed momenta.
    const double step = kDefaultFdStep;
    Eigen::MatrixXd mixed(ns, nz);
    for (int z = 0; z < nz; ++z) {
      auto plus = s, minus = s;
      auto shift = [&](ReducedMomentumSample& q, double delta) {
        if (z == 0)
          q.t += delta;
        else if (z <= d.m)
          q.x[z - 1] += delta;
        else
          q.u[z - 1 - d.m] += delta;
      };
      shift(plus, step);
      shift(minus, -step);
      const auto gp = eval_with_partials(H, plus).momentum_gradient(d);
      const auto gm = eval_with_partials(H, minus).momentum_gradient(d);
      for (int r = 0; r < ns; ++r) mixed(r, z) = (gp[r] - gm[r]) / (2.0 * step);
    }
    std::vector<double> out(static_cast<std::size_t>(ns * nz));
    for (int r = 0; r < ns; ++r)
      for (int z = 0; z < nz; ++z) {
        double v = mixed(r, z);
        for (int q = 0; q < ns; ++q) v += hpp(r, q) * j[row_of[q] * nz + z];
        out[r * nz + z] = v;
      }
    return out;
  };
  return c;
}

std::vector<double> restricted_connection_residual(const HamiltonianModel& H, const HJSection& gamma,
                                                   const CauchyGrid& grid, std::span<const double> u, double t,
                                                   Execution exec) {
  const Dimensions& d = H.dims();
  const std::size_t n = grid.size();
  if (u.size() != static_cast<std::size_t>(d.n) * n) throw ValidationError("field array does not match the grid");
  if (d.m == 0) return std::vector<double>(u.size(), 0.0);
  const auto dxu = spatial_derivative(grid, u, exec);
  const auto conn = reduced_connection(H, gamma);
  std::vector<double> r(static_cast<std::size_t>(d.n * d.m) * n);
  for_each_node(exec, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    BundlePoint p{t, {grid.x[j]}, std::vector<double>(d.n)};
    for (int a = 0; a < d.n; ++a) p.u[a] = u[a * n + j];
    const auto g = conn.values(p);
    for (int a = 0; a < d.n; ++a)
      for (int k = 0; k < d.m; ++k) {
        const std::size_t c = static_cast<std::size_t>(a * d.m + k);
        r[c * n + j] = dxu[c * n + j] - g[d.slot(a, k + 1)];
      }
  });
  return r;
}

CharacteristicRun evolve_characteristics(const HamiltonianModel& H, const HJSection& gamma, const CauchyGrid& grid,
                                         std::span<const double> u0, double t0, double dt, double t_final,
                                         int stride, double blowup_bound, Execution exec) {
  const Dimensions d = H.dims();
  const std::size_t n = grid.size();
  if (u0.size() != static_cast<std::size_t>(d.n) * n) throw ValidationError("initial field does not match the grid");
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  if (!(t_final >= t0 + dt)) throw ValidationError("final time must be at least one step after the start");
  if (stride < 1) throw ValidationError("output stride must be at least 1");
  const long steps = std::lround((t_final - t0) / dt);
  if (std::abs(steps * dt - (t_final - t0)) > 1e-9 * std::max(1.0, std::abs(t_final)))
    throw ValidationError("time span is not a whole number of steps");

  CharacteristicRun run;
  for (long i = 0; i <= steps; ++i)
    if (i % stride == 0 || i == steps) run.times.push_back(t0 + static_cast<double>(i) * dt);
  run.u.assign(run.times.size(), std::vector<double>(u0.size()));

  const auto conn = reduced_connection(H, gamma);
  for_each_node(exec, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    BundlePoint p;
    if (d.m == 1) p.x = {grid.x[j]};
    std::vector<double> u(d.n);
    for (int a = 0; a < d.n; ++a) u[a] = u0[a * n + j];
    auto rate = [&](double t, const std::vector<double>& v) {
      p.t = t;
      p.u = v;
      const auto g = conn.values(p);
      std::vector<double> out(d.n);
      for (int a = 0; a < d.n; ++a) out[a] = g[d.slot(a, 0)];
      return out;
    };
    auto shifted = [&](const std::vector<double>& k, double c) {
      std::vector<double> v = u;
      for (int a = 0; a < d.n; ++a) v[a] += c * k[a];
      return v;
    };
    std::size_t frame = 0;
    auto store = [&] {
      for (int a = 0; a < d.n; ++a) run.u[frame][a * n + j] = u[a];
      ++frame;
    };
    store();
    for (long i = 1; i <= steps; ++i) {
      const double t = t0 + static_cast<double>(i - 1) * dt;
      const auto k1 = rate(t, u);
      const auto k2 = rate(t + 0.5 * dt, shifted(k1, 0.5 * dt));
      const auto k3 = rate(t + 0.5 * dt, shifted(k2, 0.5 * dt));
      const auto k4 = rate(t + dt, shifted(k3, dt));
      for (int a = 0; a < d.n; ++a) {
        u[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        if (!std::isfinite(u[a]) || std::abs(u[a]) > blowup_bound)
          throw NumericalError("characteristic blow-up at node " + std::to_string(j) + ", step " +
                               std::to_string(i));
      }
      if (i % stride == 0 || i == steps) store();
    }
  });
  return run;
}

CauchyState lift_by_gamma(const HJSection& gamma, double t, const CauchyGrid& grid, std::span<const double> u,
                          Execution exec) {
  const Dimensions& d = gamma.dims();
  const std::size_t n = grid.size();
  if (d.m != grid.m) throw ValidationError("grid and section disagree on m");
  if (u.size() != static_cast<std::size_t>(d.n) * n) throw ValidationError("field array does not match the grid");
  CauchyState s = CauchyState::zeros(d, grid, t);
  s.u.assign(u.begin(), u.end());
  for_each_node(exec, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    BundlePoint p{t, {}, std::vector<double>(d.n)};
    if (d.m == 1) p.x = {grid.x[j]};
    for (int a = 0; a < d.n; ++a) p.u[a] = u[a * n + j];
    const GammaValue g = gamma.eval(p);
    for (int a = 0; a < d.n; ++a) {
      s.p_t[a * n + j] = g.p_t[a];
      for (int k = 0; k < d.m; ++k) s.p_x[(a * d.m + k) * n + j] = g.p_x[a * d.m + k];
    }
  });
  return s;
}

namespace {

// T gamma applied to (k, du) at every node of a lifted frame.
TangentVariation push_forward(const HJSection& gamma, const CauchyGrid& grid, const CauchyState& frame, double k,
                              const std::vector<double>& du, Execution exec) {
  const Dimensions& d = gamma.dims();
  const std::size_t n = grid.size();
  const int nz = d.bundle_coords();
  TangentVariation v = TangentVariation::zeros(d, grid, k);
  v.du = du;
  for_each_node(exec, static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t jj) {
    const auto j = static_cast<std::size_t>(jj);
    BundlePoint p{frame.t, {}, std::vector<double>(d.n)};
    if (d.m == 1) p.x = {grid.x[j]};
    for (int a = 0; a < d.n; ++a) p.u[a] = frame.u[a * n + j];
    const auto jac = gamma.jacobian(p);
    auto along = [&](int row) {
      double v0 = k * jac[row * nz + z_t()];
      for (int b = 0; b < d.n; ++b) v0 += jac[row * nz + z_u(d, b)] * du[b * n + j];
      return v0;
    };
    for (int a = 0; a < d.n; ++a) {
      v.dp_t[a * n + j] = along(gamma.row_pt(a));
      for (int q = 0; q < d.m; ++q) v.dp_x[(a * d.m + q) * n + j] = along(gamma.row_px(a, q));
    }
  });
  return v;
}

}  // namespace

HJLiftReport hj_lift_solution_check(const HamiltonianModel& H, const HJSection& gamma, const CauchyGrid& grid,
                                    const CharacteristicRun& run, const HJLiftOptions& options, Execution exec) {
  const Dimensions d = H.dims();
  const std::size_t n = grid.size();
  if (run.u.size() != run.times.size() || run.u.size() < 5)
    throw ValidationError("lift check needs at least 5 stored frames");

  HJLiftReport rep;
  rep.seed = options.seed;
  rep.compatibility_tolerance = d.m == 1 ? 10.0 * grid.h * grid.h : 0.0;
  rep.restricted_initial = sup_abs(restricted_connection_residual(H, gamma, grid, run.u.front(), run.times.front(), exec));
  if (rep.restricted_initial > rep.compatibility_tolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "initial data is not an integral section of the restricted connection: residual "
       << rep.restricted_initial << " exceeds " << rep.compatibility_tolerance;
    throw CertificationError(os.str());
  }

  std::vector<CauchyState> frames;
  frames.reserve(run.u.size());
  for (std::size_t i = 0; i < run.u.size(); ++i) frames.push_back(lift_by_gamma(gamma, run.times[i], grid, run.u[i], exec));
  const auto velocities = frame_velocities(d, grid, frames);
  const VariationSet tests = standard_test_set(d, grid, options.seed, options.n_random);
  const auto conn = reduced_connection(H, gamma);

  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::pair<TangentVariation, TangentVariation>> pairs;
  for (int i = 0; i < options.n_pairs; ++i) {
    auto v = random_variation(d, grid, rng, true);
    auto w = random_variation(d, grid, rng, true);
    pairs.emplace_back(std::move(v), std::move(w));
  }

  for (std::size_t f = 0; f < frames.size(); ++f) {
    const CauchyState& st = frames[f];
    const PresymplecticForm form(H, grid, st, exec);

    rep.hdw_split = std::max(rep.hdw_split, dynamical_trajectory_residual(H, grid, st, velocities[f], tests, exec));

    // Horizontal lift of d/dt pushed through gamma.
    std::vector<double> gamma0(st.u.size());
    for (std::size_t j = 0; j < n; ++j) {
      BundlePoint p{st.t, {}, std::vector<double>(d.n)};
      if (d.m == 1) p.x = {grid.x[j]};
      for (int a = 0; a < d.n; ++a) p.u[a] = st.u[a * n + j];
      const auto g = conn.values(p);
      for (int a = 0; a < d.n; ++a) gamma0[a * n + j] = g[d.slot(a, 0)];
    }
    const TangentVariation xh = push_forward(gamma, grid, st, 1.0, gamma0, exec);
    const PairingCovector cov = form.contract(xh);
    double worst = 0.0;
    for (const auto* arr : {&cov.du, &cov.dp_t, &cov.dp_x}) worst = std::max(worst, sup_abs(*arr));
    for (const auto& xi : tests.extra) worst = std::max(worst, std::abs(cov.apply(xi)));
    rep.contraction = std::max(rep.contraction, worst);

    for (const auto& [v, w] : pairs) {
      const auto tv = push_forward(gamma, grid, st, v.k, v.du, exec);
      const auto tw = push_forward(gamma, grid, st, w.k, w.du, exec);
      rep.pullback = std::max(rep.pullback, std::abs(form.pair(tv, tw)));
    }
  }
  return rep;
}

}  // namespace dhj

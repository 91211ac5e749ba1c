#include "dhj/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dhj {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

JetSample jet_at(const ReducedMomentumSample& r, const Dimensions& d) {
  JetSample j = JetSample::zeros(d);
  j.t = r.t;
  j.x = r.x;
  j.u = r.u;
  return j;
}

// d/dz (dL/dv) for z over the bundle coordinates (t, x, u); rows are velocity
// slots, columns bundle coordinates.
Eigen::MatrixXd mixed_velocity_partials(const LagrangianModel& L, const JetSample& j) {
  const auto& d = L.dims();
  const double h = L.fd_step();
  Eigen::MatrixXd out(d.slots(), d.bundle_coords());
  for (int z = 0; z < d.bundle_coords(); ++z) {
    JetSample plus = j;
    JetSample minus = j;
    auto shift = [&](JetSample& s, double delta) {
      if (z == 0)
        s.t += delta;
      else if (z <= d.m)
        s.x[z - 1] += delta;
      else
        s.u[z - 1 - d.m] += delta;
    };
    shift(plus, h);
    shift(minus, -h);
    const auto gp = L.gradient(plus).velocity_gradient(d);
    const auto gm = L.gradient(minus).velocity_gradient(d);
    for (int r = 0; r < d.slots(); ++r) out(r, z) = (gp[r] - gm[r]) / (2.0 * h);
  }
  return out;
}

// Total derivatives D_k (dL/dv_s) along the section, rows s, columns k.
Eigen::MatrixXd total_velocity_gradient_derivatives(const LagrangianModel& L, const JetSectionPoint& pt) {
  const auto& d = L.dims();
  const int b = d.base();
  const Eigen::MatrixXd mixed = mixed_velocity_partials(L, pt.jet);
  const Eigen::MatrixXd hess = L.velocity_hessian(pt.jet);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d.slots(), b);
  for (int s = 0; s < d.slots(); ++s) {
    for (int k = 0; k < b; ++k) {
      double acc = mixed(s, k);  // explicit t / x^k dependence
      for (int beta = 0; beta < d.n; ++beta) {
        acc += mixed(s, 1 + d.m + beta) * pt.jet.velocity(d, beta, k);
        for (int l = 0; l < b; ++l)
          acc += hess(s, d.slot(beta, l)) * pt.second[(beta * b + l) * b + k];
      }
      out(s, k) = acc;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

PoincareCartanCoefficients poincare_cartan_coefficients(const LagrangianModel& L, const JetSample& j) {
  const auto& d = L.dims();
  const auto g = eval_with_partials(L, j);
  PoincareCartanCoefficients c;
  c.momentum = g.velocity_gradient(d);
  const auto v = j.velocities(d);
  double contraction = 0.0;
  for (int s = 0; s < d.slots(); ++s) contraction += v[s] * c.momentum[s];
  c.volume = g.value - contraction;
  return c;
}

ExtendedMomentumSample legendre_extended(const LagrangianModel& L, const JetSample& j) {
  const auto& d = L.dims();
  const auto c = poincare_cartan_coefficients(L, j);
  ExtendedMomentumSample e;
  e.t = j.t;
  e.x = j.x;
  e.u = j.u;
  e.p = c.volume;
  ReducedMomentumSample r = ReducedMomentumSample::zeros(d);
  r.set_momenta(d, c.momentum);
  e.p_t = std::move(r.p_t);
  e.p_x = std::move(r.p_x);
  return e;
}

ReducedMomentumSample legendre_reduced(const LagrangianModel& L, const JetSample& j) {
  return legendre_extended(L, j).reduced();
}

RegularityReport regularity_check(const LagrangianModel& L, const JetSample& j) {
  j.check(L.dims());
  const Eigen::MatrixXd hess = L.velocity_hessian(j);
  RegularityReport r;
  r.determinant = hess.determinant();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(hess);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  r.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  r.regular = std::abs(r.determinant) >= kDegenerateDeterminant;
  return r;
}

JetSample inverse_legendre(const LagrangianModel& L, const ReducedMomentumSample& r,
                           std::span<const double> velocity_guess) {
  const auto& d = L.dims();
  r.check(d);
  const auto target = r.momenta(d);
  const double base_tol = L.has_analytic_gradient() ? kNewtonTolerance : kNewtonToleranceFd;
  const double tol = base_tol * (1.0 + max_abs(target));

  JetSample j = jet_at(r, d);
  if (!velocity_guess.empty()) {
    if (static_cast<int>(velocity_guess.size()) != d.slots())
      throw ValidationError("velocity guess has wrong length");
    if (std::any_of(velocity_guess.begin(), velocity_guess.end(), [](double v) { return !std::isfinite(v); }))
      throw ValidationError("velocity guess must be finite");
    j.set_velocities(d, velocity_guess);
  }

  auto residual_of = [&](const JetSample& s) {
    const auto g = eval_with_partials(L, s).velocity_gradient(d);
    Eigen::VectorXd f(d.slots());
    for (int k = 0; k < d.slots(); ++k) f(k) = g[k] - target[k];
    return f;
  };

  Eigen::VectorXd f = residual_of(j);
  for (int it = 0; it <= kNewtonMaxIterations; ++it) {
    const double norm = f.lpNorm<Eigen::Infinity>();
    if (norm <= tol) return j;
    if (it == kNewtonMaxIterations) break;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(L.velocity_hessian(j));
    if (!lu.isInvertible())
      throw NumericalError("inverse Legendre: singular velocity Hessian (Lagrangian not regular)");
    const Eigen::VectorXd step = lu.solve(-f);
    const auto v0 = j.velocities(d);

    // Damped update: halve the step while the residual grows.
    double scale = 1.0;
    for (int tries = 0; tries < 30; ++tries, scale *= 0.5) {
      JetSample trial = j;
      auto v = v0;
      for (int k = 0; k < d.slots(); ++k) v[k] += scale * step(k);
      trial.set_velocities(d, v);
      const Eigen::VectorXd ft = residual_of(trial);
      if (ft.lpNorm<Eigen::Infinity>() <= norm || tries == 29) {
        j = std::move(trial);
        f = ft;
        break;
      }
    }
  }
  throw NumericalError("inverse Legendre: Newton did not converge in 50 iterations");
}

HamiltonianModel hamiltonian_via_inverse_legendre(const LagrangianModel& L) {
  const Dimensions d = L.dims();
  auto solve = [L](const ReducedMomentumSample& r) { return inverse_legendre(L, r); };
  auto value_from = [d](const LagrangianModel& lag, const ReducedMomentumSample& r, const JetSample& j) {
    const auto p = r.momenta(d);
    const auto v = j.velocities(d);
    double h = -lag.eval(j);
    for (int k = 0; k < d.slots(); ++k) h += p[k] * v[k];
    return h;
  };
  auto eval = [L, solve, value_from](const ReducedMomentumSample& r) {
    return value_from(L, r, solve(r));
  };
  auto grad = [L, d, solve, value_from](const ReducedMomentumSample& r) {
    const JetSample j = solve(r);
    const auto lg = eval_with_partials(L, j);
    HamiltonianGradient g;
    g.value = value_from(L, r, j);
    g.d_t = -lg.d_t;
    g.d_x.resize(d.m);
    for (int k = 0; k < d.m; ++k) g.d_x[k] = -lg.d_x[k];
    g.d_u.resize(d.n);
    for (int a = 0; a < d.n; ++a) g.d_u[a] = -lg.d_u[a];
    g.d_pt = j.u_t;
    g.d_px = j.u_x;
    return g;
  };
  auto hess = [L, solve](const ReducedMomentumSample& r) {
    const Eigen::MatrixXd vh = L.velocity_hessian(solve(r));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(vh);
    if (!lu.isInvertible()) throw NumericalError("momentum Hessian: singular velocity Hessian");
    return Eigen::MatrixXd(lu.inverse());
  };
  HamiltonianModel h(d, eval, L.name() + ":legendre");
  h.with_gradient(grad).with_hessian(hess).autonomous(L.is_autonomous());
  return h;
}

HamiltonianModel hamiltonian_from_lagrangian(const LagrangianModel& L) {
  if (L.closed_form_hamiltonian()) return L.closed_form_hamiltonian()();
  return hamiltonian_via_inverse_legendre(L);
}

// ---------------------------------------------------------------------------

JetSection sample_jet_section(const Dimensions& dims,
                              const std::function<std::vector<double>(double, std::span<const double>)>& u,
                              const std::vector<std::vector<double>>& base_points, double step) {
  dims.validate();
  const int b = dims.base();
  auto at = [&](std::vector<double> y) {
    std::span<const double> xs(y.data() + 1, y.size() - 1);
    auto v = u(y[0], xs);
    if (static_cast<int>(v.size()) != dims.n) throw ValidationError("section returned wrong component count");
    return v;
  };
  JetSection out;
  out.reserve(base_points.size());
  for (const auto& y : base_points) {
    if (static_cast<int>(y.size()) != b) throw ValidationError("base point must have m + 1 coordinates");
    JetSectionPoint pt;
    pt.jet = JetSample::zeros(dims);
    pt.jet.t = y[0];
    for (int k = 0; k < dims.m; ++k) pt.jet.x[k] = y[1 + k];
    pt.jet.u = at(y);
    pt.second.assign(static_cast<std::size_t>(dims.n * b * b), 0.0);
    for (int i = 0; i < b; ++i) {
      auto yp = y, ym = y;
      yp[i] += step;
      ym[i] -= step;
      const auto fp = at(yp), fm = at(ym);
      for (int a = 0; a < dims.n; ++a) {
        const double deriv = (fp[a] - fm[a]) / (2.0 * step);
        if (i == 0)
          pt.jet.u_t[a] = deriv;
        else
          pt.jet.u_x[a * dims.m + i - 1] = deriv;
        pt.second[(a * b + i) * b + i] = (fp[a] - 2.0 * pt.jet.u[a] + fm[a]) / (step * step);
      }
      for (int k = i + 1; k < b; ++k) {
        auto ypp = y, ypm = y, ymp = y, ymm = y;
        ypp[i] += step, ypp[k] += step;
        ypm[i] += step, ypm[k] -= step;
        ymp[i] -= step, ymp[k] += step;
        ymm[i] -= step, ymm[k] -= step;
        const auto a1 = at(ypp), a2 = at(ypm), a3 = at(ymp), a4 = at(ymm);
        for (int a = 0; a < dims.n; ++a) {
          const double mixed = (a1[a] - a2[a] - a3[a] + a4[a]) / (4.0 * step * step);
          pt.second[(a * b + i) * b + k] = mixed;
          pt.second[(a * b + k) * b + i] = mixed;
        }
      }
    }
    out.push_back(std::move(pt));
  }
  return out;
}

MomentumSection legendre_section(const LagrangianModel& L, const JetSection& s) {
  const auto& d = L.dims();
  const int b = d.base();
  MomentumSection out;
  out.reserve(s.size());
  for (const auto& pt : s) {
    pt.jet.check(d);
    if (static_cast<int>(pt.second.size()) != d.n * b * b)
      throw ValidationError("section point is missing second derivatives");
    MomentumSectionPoint mp;
    mp.state = legendre_reduced(L, pt.jet);
    mp.du = pt.jet.velocities(d);
    const Eigen::MatrixXd dp = total_velocity_gradient_derivatives(L, pt);
    mp.dp.resize(static_cast<std::size_t>(d.slots() * b));
    for (int sl = 0; sl < d.slots(); ++sl)
      for (int k = 0; k < b; ++k) mp.dp[sl * b + k] = dp(sl, k);
    out.push_back(std::move(mp));
  }
  return out;
}

std::vector<std::vector<double>> euler_lagrange_residual(const LagrangianModel& L, const JetSection& s) {
  const auto& d = L.dims();
  const int b = d.base();
  std::vector<std::vector<double>> out;
  out.reserve(s.size());
  for (const auto& pt : s) {
    pt.jet.check(d);
    if (static_cast<int>(pt.second.size()) != d.n * b * b)
      throw ValidationError("euler_lagrange_residual: section point is missing second derivatives");
    const auto g = eval_with_partials(L, pt.jet);
    const Eigen::MatrixXd dp = total_velocity_gradient_derivatives(L, pt);
    std::vector<double> r(d.n);
    for (int a = 0; a < d.n; ++a) {
      double div = 0.0;
      for (int k = 0; k < b; ++k) div += dp(d.slot(a, k), k);
      r[a] = g.d_u[a] - div;
    }
    out.push_back(std::move(r));
  }
  return out;
}

double HdwResidual::sup() const {
  return std::max(max_abs(configuration), max_abs(momentum));
}

std::vector<HdwResidual> hdw_residual(const HamiltonianModel& H, const MomentumSection& s) {
  const auto& d = H.dims();
  const int b = d.base();
  std::vector<HdwResidual> out;
  out.reserve(s.size());
  for (const auto& pt : s) {
    if (static_cast<int>(pt.du.size()) != d.slots() || static_cast<int>(pt.dp.size()) != d.slots() * b)
      throw ValidationError("hdw_residual: section derivative shapes do not match dimensions");
    const auto g = eval_with_partials(H, pt.state);
    const auto dh_dp = g.momentum_gradient(d);
    HdwResidual r;
    r.configuration.resize(d.slots());
    for (int sl = 0; sl < d.slots(); ++sl) r.configuration[sl] = pt.du[sl] - dh_dp[sl];
    r.momentum.resize(d.n);
    for (int a = 0; a < d.n; ++a) {
      double div = 0.0;
      for (int i = 0; i < b; ++i) div += pt.dp[d.slot(a, i) * b + i];
      r.momentum[a] = div + g.d_u[a];
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> bundle_jacobian_fd(const Dimensions& dims,
                                       const std::function<std::vector<double>(const BundlePoint&)>& f,
                                       const BundlePoint& p, double step) {
  const int nz = dims.bundle_coords();
  std::vector<double> jac;
  std::size_t rows = 0;
  for (int z = 0; z < nz; ++z) {
    BundlePoint plus = p, minus = p;
    auto shift = [&](BundlePoint& q, double delta) {
      if (z == 0)
        q.t += delta;
      else if (z <= dims.m)
        q.x[z - 1] += delta;
      else
        q.u[z - 1 - dims.m] += delta;
    };
    shift(plus, step);
    shift(minus, -step);
    const auto fp = f(plus);
    const auto fm = f(minus);
    if (z == 0) {
      rows = fp.size();
      jac.assign(rows * nz, 0.0);
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const double v = (fp[r] - fm[r]) / (2.0 * step);
      if (!std::isfinite(v)) throw NumericalError("non-finite finite-difference partial");
      jac[r * nz + z] = v;
    }
  }
  return jac;
}

std::vector<double> ConnectionCoefficients::eval_partials(const BundlePoint& p) const {
  if (partials) return partials(p);
  if (!values) throw ValidationError("connection has no coefficient procedure");
  return bundle_jacobian_fd(dims, values, p, fd_step);
}

std::vector<double> flatness_residual(const ConnectionCoefficients& c, const BundlePoint& p) {
  const auto& d = c.dims;
  const int b = d.base();
  const int nz = d.bundle_coords();
  if (!c.values) throw ValidationError("flatness_residual: missing connection coefficients");
  const auto gam = c.values(p);
  const auto dg = c.eval_partials(p);
  if (static_cast<int>(gam.size()) != d.n * b || static_cast<int>(dg.size()) != d.n * b * nz)
    throw ValidationError("flatness_residual: missing or misshaped partials");

  auto partial = [&](int alpha, int j, int z) { return dg[(alpha * b + j) * nz + z]; };
  // T^alpha_{ij} = d_i Gamma^alpha_j + Gamma^beta_i d_{u^beta} Gamma^alpha_j
  auto transport = [&](int alpha, int i, int j) {
    double acc = partial(alpha, j, i);  // base coordinate z = i (t or x^i)
    for (int beta = 0; beta < d.n; ++beta) acc += gam[beta * b + i] * partial(alpha, j, 1 + d.m + beta);
    return acc;
  };
  std::vector<double> r(static_cast<std::size_t>(d.n * b * b), 0.0);
  for (int a = 0; a < d.n; ++a)
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < b; ++j) r[(a * b + i) * b + j] = transport(a, i, j) - transport(a, j, i);
  return r;
}

}  // namespace dhj

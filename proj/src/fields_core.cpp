#include "dhj/fields_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dhj {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_size(const char* what, std::size_t got, std::size_t want) {
  if (got != want) {
    std::ostringstream os;
    os << what << " has " << got << " entries, expected " << want;
    throw ValidationError(os.str());
  }
}

double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
  return v;
}

double param_or(const ParameterMap& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

void Dimensions::validate() const {
  if (m < 0 || m > 1) throw ValidationError("spatial dimension m must be 0 or 1");
  if (n < 1) throw ValidationError("field count n must be at least 1");
}

// ---------------------------------------------------------------------------

JetSample JetSample::zeros(const Dimensions& dims) {
  JetSample j;
  j.x.assign(dims.m, 0.0);
  j.u.assign(dims.n, 0.0);
  j.u_t.assign(dims.n, 0.0);
  j.u_x.assign(static_cast<std::size_t>(dims.n * dims.m), 0.0);
  return j;
}

double JetSample::velocity(const Dimensions& dims, int alpha, int i) const {
  return i == 0 ? u_t[alpha] : u_x[alpha * dims.m + (i - 1)];
}

std::vector<double> JetSample::velocities(const Dimensions& dims) const {
  std::vector<double> v(dims.slots());
  for (int a = 0; a < dims.n; ++a)
    for (int i = 0; i <= dims.m; ++i) v[dims.slot(a, i)] = velocity(dims, a, i);
  return v;
}

void JetSample::set_velocities(const Dimensions& dims, std::span<const double> v) {
  for (int a = 0; a < dims.n; ++a) {
    u_t[a] = v[dims.slot(a, 0)];
    for (int j = 0; j < dims.m; ++j) u_x[a * dims.m + j] = v[dims.slot(a, j + 1)];
  }
}

void JetSample::check(const Dimensions& dims) const {
  check_size("jet x", x.size(), dims.m);
  check_size("jet u", u.size(), dims.n);
  check_size("jet u_t", u_t.size(), dims.n);
  check_size("jet u_x", u_x.size(), static_cast<std::size_t>(dims.n * dims.m));
}

ReducedMomentumSample ReducedMomentumSample::zeros(const Dimensions& dims) {
  ReducedMomentumSample s;
  s.x.assign(dims.m, 0.0);
  s.u.assign(dims.n, 0.0);
  s.p_t.assign(dims.n, 0.0);
  s.p_x.assign(static_cast<std::size_t>(dims.n * dims.m), 0.0);
  return s;
}

double ReducedMomentumSample::momentum(const Dimensions& dims, int alpha, int i) const {
  return i == 0 ? p_t[alpha] : p_x[alpha * dims.m + (i - 1)];
}

std::vector<double> ReducedMomentumSample::momenta(const Dimensions& dims) const {
  std::vector<double> p(dims.slots());
  for (int a = 0; a < dims.n; ++a)
    for (int i = 0; i <= dims.m; ++i) p[dims.slot(a, i)] = momentum(dims, a, i);
  return p;
}

void ReducedMomentumSample::set_momenta(const Dimensions& dims, std::span<const double> p) {
  for (int a = 0; a < dims.n; ++a) {
    p_t[a] = p[dims.slot(a, 0)];
    for (int j = 0; j < dims.m; ++j) p_x[a * dims.m + j] = p[dims.slot(a, j + 1)];
  }
}

void ReducedMomentumSample::check(const Dimensions& dims) const {
  check_size("momentum x", x.size(), dims.m);
  check_size("momentum u", u.size(), dims.n);
  check_size("momentum p_t", p_t.size(), dims.n);
  check_size("momentum p_x", p_x.size(), static_cast<std::size_t>(dims.n * dims.m));
}

std::vector<double> LagrangianGradient::velocity_gradient(const Dimensions& dims) const {
  std::vector<double> g(dims.slots());
  for (int a = 0; a < dims.n; ++a) {
    g[dims.slot(a, 0)] = d_ut[a];
    for (int j = 0; j < dims.m; ++j) g[dims.slot(a, j + 1)] = d_ux[a * dims.m + j];
  }
  return g;
}

std::vector<double> HamiltonianGradient::momentum_gradient(const Dimensions& dims) const {
  std::vector<double> g(dims.slots());
  for (int a = 0; a < dims.n; ++a) {
    g[dims.slot(a, 0)] = d_pt[a];
    for (int j = 0; j < dims.m; ++j) g[dims.slot(a, j + 1)] = d_px[a * dims.m + j];
  }
  return g;
}

double finite_difference_partial(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> point, int axis, double step) {
  if (!(step > 0.0)) throw ValidationError("finite difference step must be positive");
  if (axis < 0 || static_cast<std::size_t>(axis) >= point.size())
    throw ValidationError("finite difference axis out of range");
  std::vector<double> z(point.begin(), point.end());
  z[axis] = point[axis] + step;
  const double fp = f(z);
  z[axis] = point[axis] - step;
  const double fm = f(z);
  if (!std::isfinite(fp) || !std::isfinite(fm))
    throw NumericalError("non-finite function value in finite difference");
  return (fp - fm) / (2.0 * step);
}

// ---------------------------------------------------------------------------
// Flattening helpers for the finite-difference fallbacks. Coordinates are
// laid out as (t, x, u, then velocities or momenta).

namespace {

std::vector<double> flatten(const JetSample& j) {
  std::vector<double> z;
  z.reserve(1 + j.x.size() + j.u.size() + j.u_t.size() + j.u_x.size());
  z.push_back(j.t);
  z.insert(z.end(), j.x.begin(), j.x.end());
  z.insert(z.end(), j.u.begin(), j.u.end());
  z.insert(z.end(), j.u_t.begin(), j.u_t.end());
  z.insert(z.end(), j.u_x.begin(), j.u_x.end());
  return z;
}

JetSample unflatten_jet(const Dimensions& d, std::span<const double> z) {
  JetSample j;
  auto it = z.begin();
  j.t = *it++;
  j.x.assign(it, it + d.m);
  it += d.m;
  j.u.assign(it, it + d.n);
  it += d.n;
  j.u_t.assign(it, it + d.n);
  it += d.n;
  j.u_x.assign(it, it + d.n * d.m);
  return j;
}

std::vector<double> flatten(const ReducedMomentumSample& s) {
  std::vector<double> z;
  z.push_back(s.t);
  z.insert(z.end(), s.x.begin(), s.x.end());
  z.insert(z.end(), s.u.begin(), s.u.end());
  z.insert(z.end(), s.p_t.begin(), s.p_t.end());
  z.insert(z.end(), s.p_x.begin(), s.p_x.end());
  return z;
}

ReducedMomentumSample unflatten_momentum(const Dimensions& d, std::span<const double> z) {
  ReducedMomentumSample s;
  auto it = z.begin();
  s.t = *it++;
  s.x.assign(it, it + d.m);
  it += d.m;
  s.u.assign(it, it + d.n);
  it += d.n;
  s.p_t.assign(it, it + d.n);
  it += d.n;
  s.p_x.assign(it, it + d.n * d.m);
  return s;
}

// Splits a flat gradient back into (t, x, u, slot-block-1, slot-block-2).
template <class Grad>
void split_flat_gradient(const Dimensions& d, const std::vector<double>& g, Grad& out,
                         std::vector<double> Grad::*first, std::vector<double> Grad::*second) {
  auto it = g.begin();
  out.d_t = *it++;
  out.d_x.assign(it, it + d.m);
  it += d.m;
  out.d_u.assign(it, it + d.n);
  it += d.n;
  (out.*first).assign(it, it + d.n);
  it += d.n;
  (out.*second).assign(it, it + d.n * d.m);
}

}  // namespace

// ---------------------------------------------------------------------------

LagrangianModel::LagrangianModel(Dimensions dims, EvalFn eval, std::string name)
    : dims_(dims), eval_(std::move(eval)), name_(std::move(name)) {
  dims_.validate();
  if (!eval_) throw ValidationError("Lagrangian needs an evaluation procedure");
}

LagrangianModel& LagrangianModel::with_gradient(GradientFn fn) {
  gradient_ = std::move(fn);
  return *this;
}
LagrangianModel& LagrangianModel::with_hessian(HessianFn fn) {
  hessian_ = std::move(fn);
  return *this;
}
LagrangianModel& LagrangianModel::with_fd_step(double step) {
  if (!(step > 0.0)) throw ValidationError("finite difference step must be positive");
  fd_step_ = step;
  return *this;
}
LagrangianModel& LagrangianModel::with_closed_form_hamiltonian(HamiltonianFactory factory) {
  hamiltonian_ = std::move(factory);
  return *this;
}
LagrangianModel& LagrangianModel::autonomous(bool value) {
  autonomous_ = value;
  return *this;
}

double LagrangianModel::eval(const JetSample& j) const {
  return require_finite(eval_(j), "Lagrangian value");
}

LagrangianGradient LagrangianModel::fd_gradient(const JetSample& j) const {
  const auto z = flatten(j);
  auto f = [this](std::span<const double> w) { return eval_(unflatten_jet(dims_, w)); };
  std::vector<double> g(z.size());
  for (std::size_t k = 0; k < z.size(); ++k)
    g[k] = finite_difference_partial(f, z, static_cast<int>(k), fd_step_);
  LagrangianGradient out;
  out.value = eval(j);
  split_flat_gradient(dims_, g, out, &LagrangianGradient::d_ut, &LagrangianGradient::d_ux);
  return out;
}

LagrangianGradient LagrangianModel::gradient(const JetSample& j) const {
  return gradient_ ? gradient_(j) : fd_gradient(j);
}

Eigen::MatrixXd LagrangianModel::velocity_hessian(const JetSample& j) const {
  if (hessian_) return hessian_(j);
  const int s = dims_.slots();
  Eigen::MatrixXd hess(s, s);
  const auto v0 = j.velocities(dims_);
  JetSample probe = j;
  for (int c = 0; c < s; ++c) {
    auto v = v0;
    v[c] = v0[c] + fd_step_;
    probe.set_velocities(dims_, v);
    const auto gp = gradient(probe).velocity_gradient(dims_);
    v[c] = v0[c] - fd_step_;
    probe.set_velocities(dims_, v);
    const auto gm = gradient(probe).velocity_gradient(dims_);
    for (int r = 0; r < s; ++r) hess(r, c) = (gp[r] - gm[r]) / (2.0 * fd_step_);
  }
  return 0.5 * (hess + hess.transpose());
}

// ---------------------------------------------------------------------------

HamiltonianModel::HamiltonianModel(Dimensions dims, EvalFn eval, std::string name)
    : dims_(dims), eval_(std::move(eval)), name_(std::move(name)) {
  dims_.validate();
  if (!eval_) throw ValidationError("Hamiltonian needs an evaluation procedure");
}

HamiltonianModel& HamiltonianModel::with_gradient(GradientFn fn) {
  gradient_ = std::move(fn);
  return *this;
}
HamiltonianModel& HamiltonianModel::with_hessian(HessianFn fn) {
  hessian_ = std::move(fn);
  return *this;
}
HamiltonianModel& HamiltonianModel::with_fd_step(double step) {
  if (!(step > 0.0)) throw ValidationError("finite difference step must be positive");
  fd_step_ = step;
  return *this;
}
HamiltonianModel& HamiltonianModel::autonomous(bool value) {
  autonomous_ = value;
  return *this;
}

double HamiltonianModel::eval(const ReducedMomentumSample& s) const {
  return require_finite(eval_(s), "Hamiltonian value");
}

HamiltonianGradient HamiltonianModel::fd_gradient(const ReducedMomentumSample& s) const {
  const auto z = flatten(s);
  auto f = [this](std::span<const double> w) { return eval_(unflatten_momentum(dims_, w)); };
  std::vector<double> g(z.size());
  for (std::size_t k = 0; k < z.size(); ++k)
    g[k] = finite_difference_partial(f, z, static_cast<int>(k), fd_step_);
  HamiltonianGradient out;
  out.value = eval(s);
  split_flat_gradient(dims_, g, out, &HamiltonianGradient::d_pt, &HamiltonianGradient::d_px);
  return out;
}

HamiltonianGradient HamiltonianModel::gradient(const ReducedMomentumSample& s) const {
  return gradient_ ? gradient_(s) : fd_gradient(s);
}

Eigen::MatrixXd HamiltonianModel::momentum_hessian(const ReducedMomentumSample& s) const {
  if (hessian_) return hessian_(s);
  const int n = dims_.slots();
  Eigen::MatrixXd hess(n, n);
  const auto p0 = s.momenta(dims_);
  ReducedMomentumSample probe = s;
  for (int c = 0; c < n; ++c) {
    auto p = p0;
    p[c] = p0[c] + fd_step_;
    probe.set_momenta(dims_, p);
    const auto gp = gradient(probe).momentum_gradient(dims_);
    p[c] = p0[c] - fd_step_;
    probe.set_momenta(dims_, p);
    const auto gm = gradient(probe).momentum_gradient(dims_);
    for (int r = 0; r < n; ++r) hess(r, c) = (gp[r] - gm[r]) / (2.0 * fd_step_);
  }
  return 0.5 * (hess + hess.transpose());
}

// ---------------------------------------------------------------------------

LagrangianGradient eval_with_partials(const LagrangianModel& model, const JetSample& j) {
  j.check(model.dims());
  auto g = model.gradient(j);
  const auto& d = model.dims();
  check_size("dL/dx", g.d_x.size(), d.m);
  check_size("dL/du", g.d_u.size(), d.n);
  check_size("dL/du_t", g.d_ut.size(), d.n);
  check_size("dL/du_x", g.d_ux.size(), static_cast<std::size_t>(d.n * d.m));
  if (!std::isfinite(g.value) || !std::isfinite(g.d_t) || !all_finite(g.d_x) ||
      !all_finite(g.d_u) || !all_finite(g.d_ut) || !all_finite(g.d_ux))
    throw NumericalError("non-finite Lagrangian evaluation");
  return g;
}

HamiltonianGradient eval_with_partials(const HamiltonianModel& model,
                                       const ReducedMomentumSample& s) {
  s.check(model.dims());
  auto g = model.gradient(s);
  const auto& d = model.dims();
  check_size("dH/dx", g.d_x.size(), d.m);
  check_size("dH/du", g.d_u.size(), d.n);
  check_size("dH/dp_t", g.d_pt.size(), d.n);
  check_size("dH/dp_x", g.d_px.size(), static_cast<std::size_t>(d.n * d.m));
  if (!std::isfinite(g.value) || !std::isfinite(g.d_t) || !all_finite(g.d_x) ||
      !all_finite(g.d_u) || !all_finite(g.d_pt) || !all_finite(g.d_px))
    throw NumericalError("non-finite Hamiltonian evaluation");
  return g;
}

// ---------------------------------------------------------------------------
// Built-in models. All share the quadratic kinetic part
//   K = 1/2 sum_a (u_t^a)^2 - 1/2 sum_a |u_x^a|^2
// and differ by a potential V(u) = sum_a P(u^a) with P a polynomial.

namespace {

struct Polynomial {
  std::vector<double> c;  // P(z) = sum c_k z^k

  double value(double z) const {
    double r = 0.0;
    for (auto k = c.size(); k-- > 0;) r = r * z + c[k];
    return r;
  }
  double derivative(double z) const {
    double r = 0.0;
    for (auto k = c.size(); k-- > 1;) r = r * z + static_cast<double>(k) * c[k];
    return r;
  }
};

Eigen::MatrixXd signature_matrix(const Dimensions& d) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d.slots(), d.slots());
  for (int a = 0; a < d.n; ++a)
    for (int i = 0; i <= d.m; ++i) h(d.slot(a, i), d.slot(a, i)) = i == 0 ? 1.0 : -1.0;
  return h;
}

HamiltonianModel quadratic_hamiltonian(const Dimensions& d, const Polynomial& pot,
                                       const std::string& name) {
  auto eval = [d, pot](const ReducedMomentumSample& s) {
    double h = 0.0;
    for (int a = 0; a < d.n; ++a) {
      h += 0.5 * s.p_t[a] * s.p_t[a] + pot.value(s.u[a]);
      for (int j = 0; j < d.m; ++j) h -= 0.5 * s.p_x[a * d.m + j] * s.p_x[a * d.m + j];
    }
    return h;
  };
  auto grad = [d, eval, pot](const ReducedMomentumSample& s) {
    HamiltonianGradient g;
    g.value = eval(s);
    g.d_x.assign(d.m, 0.0);
    g.d_u.resize(d.n);
    g.d_pt.resize(d.n);
    g.d_px.resize(static_cast<std::size_t>(d.n * d.m));
    for (int a = 0; a < d.n; ++a) {
      g.d_u[a] = pot.derivative(s.u[a]);
      g.d_pt[a] = s.p_t[a];
      for (int j = 0; j < d.m; ++j) g.d_px[a * d.m + j] = -s.p_x[a * d.m + j];
    }
    return g;
  };
  const Eigen::MatrixXd hess = signature_matrix(d);
  HamiltonianModel h(d, eval, name);
  h.with_gradient(grad)
      .with_hessian([hess](const ReducedMomentumSample&) { return hess; })
      .autonomous(true);
  return h;
}

LagrangianModel quadratic_lagrangian(const Dimensions& d, const Polynomial& pot,
                                     const std::string& name) {
  auto eval = [d, pot](const JetSample& j) {
    double l = 0.0;
    for (int a = 0; a < d.n; ++a) {
      l += 0.5 * j.u_t[a] * j.u_t[a] - pot.value(j.u[a]);
      for (int k = 0; k < d.m; ++k) l -= 0.5 * j.u_x[a * d.m + k] * j.u_x[a * d.m + k];
    }
    return l;
  };
  auto grad = [d, eval, pot](const JetSample& j) {
    LagrangianGradient g;
    g.value = eval(j);
    g.d_x.assign(d.m, 0.0);
    g.d_u.resize(d.n);
    g.d_ut.resize(d.n);
    g.d_ux.resize(static_cast<std::size_t>(d.n * d.m));
    for (int a = 0; a < d.n; ++a) {
      g.d_u[a] = -pot.derivative(j.u[a]);
      g.d_ut[a] = j.u_t[a];
      for (int k = 0; k < d.m; ++k) g.d_ux[a * d.m + k] = -j.u_x[a * d.m + k];
    }
    return g;
  };
  const Eigen::MatrixXd hess = signature_matrix(d);
  LagrangianModel l(d, eval, name);
  l.with_gradient(grad)
      .with_hessian([hess](const JetSample&) { return hess; })
      .with_closed_form_hamiltonian([d, pot, name] { return quadratic_hamiltonian(d, pot, name); })
      .autonomous(true);
  return l;
}

}  // namespace

const std::vector<std::string>& builtin_model_names() {
  static const std::vector<std::string> names = {"free_wave", "klein_gordon", "scalar_potential",
                                                 "mechanics_oscillator"};
  return names;
}

Dimensions builtin_default_dims(const std::string& name) {
  if (name == "mechanics_oscillator") return {0, 1};
  return {1, 1};
}

LagrangianModel builtin_model(const std::string& name, const ParameterMap& params) {
  const auto& names = builtin_model_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string msg = "unknown model '" + name + "'; known models:";
    for (const auto& n : names) msg += " " + n;
    throw ValidationError(msg);
  }
  Dimensions d = builtin_default_dims(name);
  d.m = static_cast<int>(param_or(params, "m", d.m));
  d.n = static_cast<int>(param_or(params, "n", d.n));
  d.validate();

  Polynomial pot;
  if (name == "free_wave") {
    pot.c = {0.0};
  } else if (name == "klein_gordon") {
    const double mu = param_or(params, "mu", 1.0);
    if (mu < 0.0) throw ValidationError("klein_gordon mass mu must be non-negative");
    pot.c = {0.0, 0.0, 0.5 * mu * mu};
  } else if (name == "scalar_potential") {
    pot.c.assign(9, 0.0);
    for (int k = 0; k < 9; ++k) pot.c[k] = param_or(params, "c" + std::to_string(k), 0.0);
  } else {  // mechanics_oscillator
    if (d.m != 0) throw ValidationError("mechanics_oscillator requires m = 0");
    const double omega = param_or(params, "omega", 1.0);
    pot.c = {0.0, 0.0, 0.5 * omega * omega};
  }
  return quadratic_lagrangian(d, pot, name);
}

}  // namespace dhj

#ifndef DHJ_FIELDS_CORE_HPP
#define DHJ_FIELDS_CORE_HPP

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhj {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: shapes, parameters, configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, Newton failures, blow-up.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested outside the domain of a section (e.g. near a tan pole).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis needed to certify a result does not hold (incompatible
/// initial data, state off the Legendre image, ...).
class CertificationError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Dimensions and samples
// ---------------------------------------------------------------------------

/// Base dimension is m + 1 (time plus m spatial axes); n field components.
/// Slot index i = 0 is always the time axis.
struct Dimensions {
  int m = 1;
  int n = 1;

  int base() const { return m + 1; }
  /// Number of first-order velocity (or momentum) slots, n * (m + 1).
  int slots() const { return n * (m + 1); }
  /// Index of the velocity/momentum slot for component alpha along base axis i.
  int slot(int alpha, int i) const { return alpha * (m + 1) + i; }
  /// Number of coordinates (t, x^1..x^m, u^1..u^n) on the configuration bundle.
  int bundle_coords() const { return 1 + m + n; }

  void validate() const;
  bool operator==(const Dimensions&) const = default;
};

/// Point (t, x, u) of the configuration bundle.
struct BundlePoint {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> u;
};

/// First-jet point; u_x is stored component-major, u_x[alpha * m + j].
struct JetSample {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> u_t;
  std::vector<double> u_x;

  static JetSample zeros(const Dimensions& dims);
  /// Velocity along base axis i (0 = time).
  double velocity(const Dimensions& dims, int alpha, int i) const;
  /// All velocities flattened by Dimensions::slot.
  std::vector<double> velocities(const Dimensions& dims) const;
  void set_velocities(const Dimensions& dims, std::span<const double> v);
  void check(const Dimensions& dims) const;
};

struct ReducedMomentumSample {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> p_t;
  std::vector<double> p_x;  // p_x[alpha * m + j]

  static ReducedMomentumSample zeros(const Dimensions& dims);
  double momentum(const Dimensions& dims, int alpha, int i) const;
  std::vector<double> momenta(const Dimensions& dims) const;
  void set_momenta(const Dimensions& dims, std::span<const double> p);
  void check(const Dimensions& dims) const;
};

struct ExtendedMomentumSample {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> u;
  double p = 0.0;
  std::vector<double> p_t;
  std::vector<double> p_x;

  ReducedMomentumSample reduced() const { return {t, x, u, p_t, p_x}; }
};

// ---------------------------------------------------------------------------
// Value-and-gradient records
// ---------------------------------------------------------------------------

struct LagrangianGradient {
  double value = 0.0;
  double d_t = 0.0;
  std::vector<double> d_x;   // m
  std::vector<double> d_u;   // n
  std::vector<double> d_ut;  // n
  std::vector<double> d_ux;  // n * m

  /// dL/dv flattened by Dimensions::slot.
  std::vector<double> velocity_gradient(const Dimensions& dims) const;
};

struct HamiltonianGradient {
  double value = 0.0;
  double d_t = 0.0;
  std::vector<double> d_x;   // m
  std::vector<double> d_u;   // n
  std::vector<double> d_pt;  // n
  std::vector<double> d_px;  // n * m

  std::vector<double> momentum_gradient(const Dimensions& dims) const;
};

/// Central difference (f(z + h e) - f(z - h e)) / (2 h) along one axis.
double finite_difference_partial(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> point, int axis, double step);

inline constexpr double kDefaultFdStep = 1e-5;

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

class HamiltonianModel;

/// Lagrangian L(t, x, u, u_t, u_x). Partials come from analytic procedures
/// when attached, otherwise from central differences.
class LagrangianModel {
 public:
  using EvalFn = std::function<double(const JetSample&)>;
  using GradientFn = std::function<LagrangianGradient(const JetSample&)>;
  using HessianFn = std::function<Eigen::MatrixXd(const JetSample&)>;
  using HamiltonianFactory = std::function<HamiltonianModel()>;

  LagrangianModel(Dimensions dims, EvalFn eval, std::string name = "custom");

  LagrangianModel& with_gradient(GradientFn fn);
  LagrangianModel& with_hessian(HessianFn fn);
  LagrangianModel& with_fd_step(double step);
  LagrangianModel& with_closed_form_hamiltonian(HamiltonianFactory factory);
  LagrangianModel& autonomous(bool value);

  const Dimensions& dims() const { return dims_; }
  const std::string& name() const { return name_; }
  double fd_step() const { return fd_step_; }
  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }
  bool has_analytic_hessian() const { return static_cast<bool>(hessian_); }
  bool is_autonomous() const { return autonomous_; }
  const HamiltonianFactory& closed_form_hamiltonian() const { return hamiltonian_; }

  double eval(const JetSample& j) const;
  LagrangianGradient gradient(const JetSample& j) const;
  /// d2L / dv dv over all velocity slots, ordered by Dimensions::slot.
  Eigen::MatrixXd velocity_hessian(const JetSample& j) const;

 private:
  LagrangianGradient fd_gradient(const JetSample& j) const;

  Dimensions dims_;
  EvalFn eval_;
  GradientFn gradient_;
  HessianFn hessian_;
  HamiltonianFactory hamiltonian_;
  std::string name_;
  double fd_step_ = kDefaultFdStep;
  bool autonomous_ = false;
};

/// Hamiltonian H(t, x, u, p_t, p_x) of the Hamiltonian section p = -H.
class HamiltonianModel {
 public:
  using EvalFn = std::function<double(const ReducedMomentumSample&)>;
  using GradientFn = std::function<HamiltonianGradient(const ReducedMomentumSample&)>;
  using HessianFn = std::function<Eigen::MatrixXd(const ReducedMomentumSample&)>;

  HamiltonianModel(Dimensions dims, EvalFn eval, std::string name = "custom");

  HamiltonianModel& with_gradient(GradientFn fn);
  HamiltonianModel& with_hessian(HessianFn fn);
  HamiltonianModel& with_fd_step(double step);
  HamiltonianModel& autonomous(bool value);

  const Dimensions& dims() const { return dims_; }
  const std::string& name() const { return name_; }
  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }
  bool has_analytic_hessian() const { return static_cast<bool>(hessian_); }
  bool is_autonomous() const { return autonomous_; }

  double eval(const ReducedMomentumSample& s) const;
  HamiltonianGradient gradient(const ReducedMomentumSample& s) const;
  /// d2H / dp dp over all momentum slots, ordered by Dimensions::slot.
  Eigen::MatrixXd momentum_hessian(const ReducedMomentumSample& s) const;

 private:
  HamiltonianGradient fd_gradient(const ReducedMomentumSample& s) const;

  Dimensions dims_;
  EvalFn eval_;
  GradientFn gradient_;
  HessianFn hessian_;
  std::string name_;
  double fd_step_ = kDefaultFdStep;
  bool autonomous_ = false;
};

/// Value plus all first partials, checked for shape and finiteness.
LagrangianGradient eval_with_partials(const LagrangianModel& model, const JetSample& j);
HamiltonianGradient eval_with_partials(const HamiltonianModel& model,
                                       const ReducedMomentumSample& s);

using ParameterMap = std::map<std::string, double>;

/// Built-in models: free_wave, klein_gordon (mu), scalar_potential (c0..c8,
/// V(u) = sum c_k u^k), mechanics_oscillator (omega, m = 0). Optional
/// parameters "m" and "n" override the default dimensions.
LagrangianModel builtin_model(const std::string& name, const ParameterMap& params = {});

/// Names accepted by builtin_model.
const std::vector<std::string>& builtin_model_names();

/// Default dimensions of a built-in model before "m"/"n" overrides.
Dimensions builtin_default_dims(const std::string& name);

}  // namespace dhj

#endif  // DHJ_FIELDS_CORE_HPP

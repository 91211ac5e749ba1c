#ifndef DHJ_HAMILTON_JACOBI_HPP
#define DHJ_HAMILTON_JACOBI_HPP

#include "dhj/cauchy_space.hpp"
#include "dhj/fields_core.hpp"
#include "dhj/legendre.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dhj {

struct GammaValue {
  double p = 0.0;
  std::vector<double> p_t;  // n
  std::vector<double> p_x;  // n * m
};

/// Section gamma(t, x, u) = (gamma_p, gamma_pt, gamma_px). The Jacobian has
/// one row per component, ordered [p, p_t^1..p_t^n, p_x^(alpha,k)...], and one
/// column per bundle coordinate (t, x, u).
class HJSection {
 public:
  using ValueFn = std::function<GammaValue(const BundlePoint&)>;
  using JacobianFn = std::function<std::vector<double>(const BundlePoint&)>;

  HJSection(Dimensions dims, ValueFn value, std::string name = "custom");

  HJSection& with_jacobian(JacobianFn fn);
  HJSection& with_fd_step(double step);

  const Dimensions& dims() const { return dims_; }
  const std::string& name() const { return name_; }
  bool has_analytic_jacobian() const { return static_cast<bool>(jacobian_); }

  int rows() const { return 1 + dims_.n + dims_.n * dims_.m; }
  int row_pt(int alpha) const { return 1 + alpha; }
  int row_px(int alpha, int k) const { return 1 + dims_.n + alpha * dims_.m + k; }

  GammaValue eval(const BundlePoint& p) const;
  std::vector<double> jacobian(const BundlePoint& p) const;

 private:
  Dimensions dims_;
  ValueFn value_;
  JacobianFn jacobian_;
  std::string name_;
  double fd_step_ = kDefaultFdStep;
};

/// gamma_pt = a u + b, gamma_px = c u + d (every component), gamma_p = p0.
HJSection linear_gamma(const Dimensions& dims, double a, double b, double c, double d, double p0 = 0.0);

/// gamma_pt = -omega tan(omega t + phi) u, gamma_px = 0,
/// gamma_p = -1/2 omega^2 sec^2(omega t + phi) |u|^2. Throws DomainError
/// within kPoleGuard of a pole.
HJSection oscillator_gamma(const Dimensions& dims, double omega, double phi = 0.0);

HJSection zero_gamma(const Dimensions& dims);

inline constexpr double kPoleGuard = 1e-3;

const std::vector<std::string>& gamma_family_names();

/// linear_gamma (a, b, c, d, p0), oscillator_gamma (omega, phi), zero.
HJSection gamma_family(const std::string& name, const Dimensions& dims, const ParameterMap& params);

BundlePoint bundle_point(double t, std::span<const double> x, std::span<const double> u);

// ---------------------------------------------------------------------------

struct ClosednessResidual {
  /// d_{u^b} gamma_alpha - d_{u^a} gamma_beta for alpha < beta, for the p_t
  /// components and then each p_x component.
  std::vector<double> symmetry;
  /// d_u gamma_p - d_t gamma_pt - sum_k d_{x^k} gamma_px, per alpha.
  std::vector<double> divergence;
  double sup() const;
};

std::vector<ClosednessResidual> gamma_closedness_residual(const HJSection& gamma,
                                                          const std::vector<BundlePoint>& samples);

/// Per alpha: dH/du + dH/dp_x . d_u gamma_px + dH/dp_t . d_u gamma_pt
///            + d_x gamma_px + d_t gamma_pt, with H evaluated on gamma.
std::vector<double> hj_residual(const HamiltonianModel& H, const HJSection& gamma, const BundlePoint& p);

/// Gamma^alpha_i = dH/dp^i_alpha o gamma, with chain-rule partials.
ConnectionCoefficients reduced_connection(const HamiltonianModel& H, const HJSection& gamma);

/// D_x u - Gamma_x at every node (zeros for m = 0).
std::vector<double> restricted_connection_residual(const HamiltonianModel& H, const HJSection& gamma,
                                                   const CauchyGrid& grid, std::span<const double> u, double t,
                                                   Execution exec = Execution::parallel);

struct CharacteristicRun {
  std::vector<double> times;
  std::vector<std::vector<double>> u;  // one n * N frame per time
};

/// RK4 on u_dot = Gamma_0(t, x_j, u) independently at every node.
CharacteristicRun evolve_characteristics(const HamiltonianModel& H, const HJSection& gamma, const CauchyGrid& grid,
                                         std::span<const double> u0, double t0, double dt, double t_final,
                                         int stride = 1, double blowup_bound = 1e8,
                                         Execution exec = Execution::parallel);

CauchyState lift_by_gamma(const HJSection& gamma, double t, const CauchyGrid& grid, std::span<const double> u,
                          Execution exec = Execution::parallel);

struct HJLiftReport {
  double restricted_initial = 0.0;  // sup of the restricted-connection residual at t0
  double compatibility_tolerance = 0.0;
  double hdw_split = 0.0;           // dynamical trajectory residual of the lifted frames
  double contraction = 0.0;         // |Omega(T gamma (X^h), xi)| over the test set
  double pullback = 0.0;            // |Omega(T gamma V, T gamma W)| over random pairs
  std::uint64_t seed = 0;
};

struct HJLiftOptions {
  std::uint64_t seed = 42;
  int n_random = 8;
  int n_pairs = 8;
};

/// Lifts every frame by gamma and evaluates the three residual classes.
/// Throws CertificationError when the initial data is not an integral
/// section of the restricted connection (residual above 10 h^2).
HJLiftReport hj_lift_solution_check(const HamiltonianModel& H, const HJSection& gamma, const CauchyGrid& grid,
                                    const CharacteristicRun& run, const HJLiftOptions& options = {},
                                    Execution exec = Execution::parallel);

}  // namespace dhj

#endif  // DHJ_HAMILTON_JACOBI_HPP

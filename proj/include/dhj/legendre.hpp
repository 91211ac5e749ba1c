#ifndef DHJ_LEGENDRE_HPP
#define DHJ_LEGENDRE_HPP

#include "dhj/fields_core.hpp"

#include <functional>
#include <vector>

namespace dhj {

inline constexpr double kNewtonTolerance = 1e-12;
/// Models without an analytic gradient cannot resolve 1e-12 through central differences.
inline constexpr double kNewtonToleranceFd = 1e-9;
inline constexpr int kNewtonMaxIterations = 50;
inline constexpr double kDegenerateDeterminant = 1e-10;

ExtendedMomentumSample legendre_extended(const LagrangianModel& L, const JetSample& j);
ReducedMomentumSample legendre_reduced(const LagrangianModel& L, const JetSample& j);

struct RegularityReport {
  double determinant = 0.0;
  double condition = 0.0;  // 2-norm condition number, +inf when singular
  bool regular = false;    // |det| >= kDegenerateDeterminant
};

RegularityReport regularity_check(const LagrangianModel& L, const JetSample& j);

/// Newton solve of dL/dv = momenta for the velocities at fixed (t, x, u).
/// Throws NumericalError on a singular Hessian or after kNewtonMaxIterations.
JetSample inverse_legendre(const LagrangianModel& L, const ReducedMomentumSample& r,
                           std::span<const double> velocity_guess = {});

/// H(p) = p . v - L with v = leg^{-1}(p). Built-in Lagrangians hand back their
/// closed form; others evaluate through inverse_legendre.
HamiltonianModel hamiltonian_from_lagrangian(const LagrangianModel& L);

/// Always goes through the Newton inversion, even for built-in models.
HamiltonianModel hamiltonian_via_inverse_legendre(const LagrangianModel& L);

// ---------------------------------------------------------------------------
// Sections sampled at points of the base.

/// Jet of a section at one base point plus its second derivatives
/// d2u^alpha / dx^i dx^k stored at [(alpha * (m+1) + i) * (m+1) + k].
struct JetSectionPoint {
  JetSample jet;
  std::vector<double> second;
};

/// Momentum section (u, p) at one base point plus first derivatives:
/// du[alpha * (m+1) + i] = du^alpha/dx^i and
/// dp[(alpha * (m+1) + i) * (m+1) + k] = dp^i_alpha / dx^k.
struct MomentumSectionPoint {
  ReducedMomentumSample state;
  std::vector<double> du;
  std::vector<double> dp;
};

using JetSection = std::vector<JetSectionPoint>;
using MomentumSection = std::vector<MomentumSectionPoint>;

/// Samples u(t, x) and its first and second derivatives by central differences.
JetSection sample_jet_section(const Dimensions& dims,
                              const std::function<std::vector<double>(double, std::span<const double>)>& u,
                              const std::vector<std::vector<double>>& base_points, double step = 1e-4);

/// Legendre image of a jet section; momentum derivatives by the chain rule.
MomentumSection legendre_section(const LagrangianModel& L, const JetSection& s);

/// Per point, per alpha: dL/du - sum_i D_i (dL/du_i).
std::vector<std::vector<double>> euler_lagrange_residual(const LagrangianModel& L, const JetSection& s);

struct HdwResidual {
  std::vector<double> configuration;  // n * (m+1): du/dx^i - dH/dp^i
  std::vector<double> momentum;       // n: sum_i dp^i/dx^i + dH/du
  double sup() const;
};

std::vector<HdwResidual> hdw_residual(const HamiltonianModel& H, const MomentumSection& s);

struct PoincareCartanCoefficients {
  double volume = 0.0;            // L - v . dL/dv
  std::vector<double> momentum;   // dL/dv by Dimensions::slot
};

PoincareCartanCoefficients poincare_cartan_coefficients(const LagrangianModel& L, const JetSample& j);

// ---------------------------------------------------------------------------
// Ehresmann connections on E -> M.

/// Horizontal-lift coefficients Gamma^alpha_i (i = 0 time), stored
/// [alpha * (m+1) + i], with partials in the bundle coordinates (t, x, u) at
/// [(alpha * (m+1) + i) * (1+m+n) + z].
struct ConnectionCoefficients {
  Dimensions dims;
  std::function<std::vector<double>(const BundlePoint&)> values;
  std::function<std::vector<double>(const BundlePoint&)> partials;
  double fd_step = kDefaultFdStep;

  std::vector<double> eval_partials(const BundlePoint& p) const;
};

/// Curvature residual R^alpha_{ij}, stored [(alpha * (m+1) + i) * (m+1) + j].
std::vector<double> flatness_residual(const ConnectionCoefficients& c, const BundlePoint& p);

/// Partials of a vector-valued function of (t, x, u) by central differences.
std::vector<double> bundle_jacobian_fd(const Dimensions& dims,
                                       const std::function<std::vector<double>(const BundlePoint&)>& f,
                                       const BundlePoint& p, double step);

}  // namespace dhj

#endif  // DHJ_LEGENDRE_HPP

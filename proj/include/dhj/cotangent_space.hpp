#ifndef DHJ_COTANGENT_SPACE_HPP
#define DHJ_COTANGENT_SPACE_HPP

#include "dhj/cauchy_space.hpp"
#include "dhj/fields_core.hpp"
#include "dhj/hamilton_jacobi.hpp"

#include <cstdint>
#include <vector>

namespace dhj {

struct CotangentState {
  double t = 0.0;
  std::vector<double> u;   // n * N
  std::vector<double> pi;  // n * N

  void check(const Dimensions& dims, const CauchyGrid& grid) const;
};

struct CotangentVariation {
  double k = 0.0;
  std::vector<double> du;
  std::vector<double> dpi;

  static CotangentVariation zeros(const Dimensions& dims, const CauchyGrid& grid, double k = 0.0);
  void check(const Dimensions& dims, const CauchyGrid& grid) const;
};

/// (u, p_t, p_x) -> (u, pi = p_t); p_x is dropped.
CotangentState restriction_map_R(const CauchyState& state);
/// Tangent map of R: (k, du, dp_t, dp_x) -> (k, du, dpi = dp_t).
CotangentVariation restriction_tangent(const TangentVariation& v);

/// Velocities u_t solving pi = dL/du_t at every node, with u_x = D_x u.
std::vector<double> time_velocities(const LagrangianModel& L, const CauchyGrid& grid, const CotangentState& cs,
                                    Execution exec = Execution::parallel);

/// sum_j w_j (-L + pi . u_t).
double instantaneous_hamiltonian(const LagrangianModel& L, const CauchyGrid& grid, const CotangentState& cs,
                                 Execution exec = Execution::parallel);

struct VariationalDerivative {
  std::vector<double> d_u;   // (1/w_j) d h / d u_j  = -L_u + D_x L_ux
  std::vector<double> d_pi;  // (1/w_j) d h / d pi_j = u_t
  double d_t = 0.0;          // explicit time derivative of h
};

VariationalDerivative variational_derivative(const LagrangianModel& L, const CauchyGrid& grid,
                                             const CotangentState& cs, Execution exec = Execution::parallel);

/// sum_j w_j (X_u Y_pi - X_pi Y_u).
double omega_pairing(const CauchyGrid& grid, const CotangentVariation& x, const CotangentVariation& y);

/// omega(X, Y) + X(h) k_Y - Y(h) k_X.
double extended_form_pairing(const LagrangianModel& L, const CauchyGrid& grid, const CotangentState& cs,
                             const CotangentVariation& x, const CotangentVariation& y,
                             Execution exec = Execution::parallel);

/// max over the test set of |(omega + dh ^ dt)(c_dot, xi)| / (1 + |xi|) over
/// every frame, with c_dot from fourth-order differences of the frames.
/// Test variations are node indicators on (u, pi) plus `n_random` smooth
/// random vertical variations.
double cotangent_trajectory_residual(const LagrangianModel& L, const CauchyGrid& grid,
                                     const std::vector<CotangentState>& frames, std::uint64_t seed = 42,
                                     int n_random = 8, Execution exec = Execution::parallel);

/// Tolerance for membership of a state in the image of the Legendre map.
inline constexpr double kConstraintTolerance = 1e-10;

/// sup |p_x - dL/du_x(u, u_t(pi), D_x u)| over the nodes.
double legendre_constraint_residual(const LagrangianModel& L, const CauchyGrid& grid, const CauchyState& state,
                                    Execution exec = Execution::parallel);

/// Moves a state onto the Legendre image: p_x := dL/du_x(u, u_t(p_t), D_x u).
CauchyState project_to_legendre_image(const LagrangianModel& L, const CauchyGrid& grid, const CauchyState& state,
                                      Execution exec = Execution::parallel);

/// |(omega + dh ^ dt)(TR X, TR Y) - Omega_h(X, Y)|. Throws
/// CertificationError when the state is off the Legendre image.
double pullback_identity_residual(const LagrangianModel& L, const HamiltonianModel& H, const CauchyGrid& grid,
                                  const CauchyState& state, const TangentVariation& x, const TangentVariation& y,
                                  Execution exec = Execution::parallel);

/// R(lift_by_gamma(gamma, t, grid, u)).
CotangentState hat_gamma(const HJSection& gamma, double t, const CauchyGrid& grid, std::span<const double> u,
                         Execution exec = Execution::parallel);

}  // namespace dhj

#endif  // DHJ_COTANGENT_SPACE_HPP

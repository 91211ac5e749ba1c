#ifndef DHJ_CAUCHY_SPACE_HPP
#define DHJ_CAUCHY_SPACE_HPP

#include "dhj/fields_core.hpp"
#include "dhj/kernels.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace dhj {

/// Uniform periodic grid on a circle of length `length`. For m = 0 the grid
/// is a single point of weight 1.
struct CauchyGrid {
  int m = 1;
  int n_nodes = 1;
  double length = 1.0;
  double h = 1.0;
  std::vector<double> x;
  std::vector<double> w;

  std::size_t size() const { return static_cast<std::size_t>(n_nodes); }
};

CauchyGrid make_grid(int n_nodes, double length = 1.0, int m = 1);

// Per-node arrays are component-major: value of component c at node j is
// stored at [c * N + j]. For p_x the component index is alpha * m + k.

struct CauchyState {
  double t = 0.0;
  std::vector<double> u;    // n * N
  std::vector<double> p_t;  // n * N
  std::vector<double> p_x;  // n * m * N

  static CauchyState zeros(const Dimensions& dims, const CauchyGrid& grid, double t = 0.0);
  void check(const Dimensions& dims, const CauchyGrid& grid) const;
  /// Momentum sample at node j.
  ReducedMomentumSample node(const Dimensions& dims, const CauchyGrid& grid, int j) const;
};

struct TangentVariation {
  double k = 0.0;
  std::vector<double> du;
  std::vector<double> dp_t;
  std::vector<double> dp_x;

  static TangentVariation zeros(const Dimensions& dims, const CauchyGrid& grid, double k = 0.0);
  void check(const Dimensions& dims, const CauchyGrid& grid) const;
};

/// sqrt(k^2 + sum_j w_j (du^2 + dp_t^2 + dp_x^2)).
double variation_norm(const CauchyGrid& grid, const TangentVariation& v);

/// Central difference of each block of N values. Needs m = 1 and N >= 3.
std::vector<double> spatial_derivative(const CauchyGrid& grid, std::span<const double> values,
                                       Execution exec = Execution::parallel);
/// Transpose of spatial_derivative as a matrix.
std::vector<double> spatial_derivative_adjoint(const CauchyGrid& grid, std::span<const double> values,
                                               Execution exec = Execution::parallel);

/// sum_j w_j values_j; arrays holding several blocks of N are summed blockwise.
double integrate_density(const CauchyGrid& grid, std::span<const double> values);

/// Solves dH/dp_x = D_x u node by node (Newton, warm started from `guess`
/// when it has the right length).
std::vector<double> recover_spatial_momenta(const HamiltonianModel& H, const CauchyGrid& grid,
                                            const CauchyState& state, std::span<const double> guess = {},
                                            Execution exec = Execution::parallel);

struct HdwRhs {
  std::vector<double> u_dot;   // n * N
  std::vector<double> pt_dot;  // n * N
  std::vector<double> p_x;     // n * m * N, recovered
};

HdwRhs hdw_rhs(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state,
               Execution exec = Execution::parallel);

/// Copy of `state` with p_x replaced by the recovered spatial momenta.
CauchyState with_recovered_momenta(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state,
                                   Execution exec = Execution::parallel);

/// Classical RK4 on (u, p_t); p_x recovered at every stage and in the result.
CauchyState step_rk4(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state, double dt,
                     Execution exec = Execution::parallel);

/// Runs `steps` RK4 steps and keeps every `stride`-th frame (first and last
/// always kept).
std::vector<CauchyState> simulate(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& initial,
                                  double dt, int steps, int stride = 1, Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// Presymplectic pairing

/// Linear form Y -> Omega(X, Y) at a fixed state: the k coefficient plus
/// per-node coefficients already multiplied by the quadrature weights.
struct PairingCovector {
  double k = 0.0;
  std::vector<double> du;
  std::vector<double> dp_t;
  std::vector<double> dp_x;

  double apply(const TangentVariation& y) const;
};

/// Node data the pairing needs: H partials and spatial derivatives of u and
/// p_x at the base state.
class PresymplecticForm {
 public:
  PresymplecticForm(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state,
                    Execution exec = Execution::parallel);

  /// Integrated pairing, evaluated from the node integrand.
  double pair(const TangentVariation& x, const TangentVariation& y) const;
  /// i_X Omega as a covector.
  PairingCovector contract(const TangentVariation& x) const;

  const Dimensions& dims() const { return dims_; }
  const CauchyGrid& grid() const { return grid_; }

 private:
  Dimensions dims_;
  CauchyGrid grid_;
  Execution exec_;
  std::vector<double> h_t_;    // N
  std::vector<double> h_u_;    // n * N
  std::vector<double> h_pt_;   // n * N
  std::vector<double> h_px_;   // n * m * N
  std::vector<double> dx_u_;   // n * m * N
  std::vector<double> dx_px_;  // n * N (sum over spatial axes)
};

double presymplectic_pairing(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state,
                             const TangentVariation& x, const TangentVariation& y,
                             Execution exec = Execution::parallel);

/// Test variations: optional node indicators on every (u, p_t, p_x) entry,
/// plus explicit extra variations.
struct VariationSet {
  bool node_indicators = true;
  std::vector<TangentVariation> extra;

  /// Expands the indicators into explicit variations (for small grids/tests).
  std::vector<TangentVariation> materialize(const Dimensions& dims, const CauchyGrid& grid) const;
};

/// Smooth random variation: each node array is a sum of Fourier modes
/// 0..3 with U(-1,1) coefficients damped by 1/(1+k). Vertical unless
/// `with_time_component`, in which case k ~ U(-1,1).
TangentVariation random_variation(const Dimensions& dims, const CauchyGrid& grid, std::mt19937_64& rng,
                                  bool with_time_component = false);

/// Node indicators plus `n_random` seeded smooth vertical variations.
VariationSet standard_test_set(const Dimensions& dims, const CauchyGrid& grid, std::uint64_t seed,
                               int n_random = 8);

/// max over the test set of |Omega(c_dot, xi)| / (1 + |xi|), with c_dot the
/// given state derivative and k = 1.
double dynamical_trajectory_residual(const HamiltonianModel& H, const CauchyGrid& grid, const CauchyState& state,
                                     const TangentVariation& state_dot, const VariationSet& test_set,
                                     Execution exec = Execution::parallel);

/// Five-point time-derivative weights for frame i of `count` equally spaced
/// frames: centered in the interior, one-sided at the two ends.
struct TimeStencil {
  std::size_t first = 0;
  std::array<double, 5> weights{};
};

TimeStencil time_stencil(std::size_t i, std::size_t count, double dt);

/// Uniform frame spacing, checked to a relative 1e-9; needs >= 5 frames.
double uniform_frame_spacing(const std::vector<double>& times);

/// Velocity (k = 1, du, dp_t, dp_x) of every frame by fourth-order differences.
std::vector<TangentVariation> frame_velocities(const Dimensions& dims, const CauchyGrid& grid,
                                               const std::vector<CauchyState>& frames);

}  // namespace dhj

#endif  // DHJ_CAUCHY_SPACE_HPP

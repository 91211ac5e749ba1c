#ifndef DHJ_SCENARIO_HPP
#define DHJ_SCENARIO_HPP

#include "dhj/cauchy_space.hpp"
#include "dhj/fields_core.hpp"
#include "dhj/hamilton_jacobi.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dhj {

/// Sectioned key = value run description.
///
///   [model]    name, any numeric model parameter (mu, omega, c0..c8, m, n)
///   [grid]     n_nodes, length (1)
///   [time]     dt, t_final
///   [initial]  family = constant | sine | traveling_wave | custom-table, params
///   [gamma]    family = linear_gamma | oscillator_gamma | zero, params
///   [output]   directory (out), precision (17), stride (1)
///   [verify]   t_min t_max x_min x_max u_min u_max, samples (1000), tolerance (1e-10)
///   [pairing]  pairs (20), steps (10), perturb_px (0)
///   [compare]  tolerance (1e-6)
struct Scenario {
  std::string source;

  std::string model;
  ParameterMap model_params;
  Dimensions dims;

  int n_nodes = 1;
  double length = 1.0;

  double dt = 0.0;
  double t_final = 0.0;

  std::string initial_family = "constant";
  ParameterMap initial_params;
  std::vector<std::vector<double>> initial_table;  // custom-table rows: u_1..u_n [, pt_1..pt_n]

  bool has_gamma = false;
  std::string gamma_family;
  ParameterMap gamma_params;

  std::string output_directory = "out";
  int precision = 17;
  int stride = 1;

  double verify_t_min = 0.0, verify_t_max = 1.0;
  double verify_x_min = 0.0, verify_x_max = 1.0;
  double verify_u_min = -2.0, verify_u_max = 2.0;
  int verify_samples = 1000;
  double verify_tolerance = 1e-10;

  int pairing_pairs = 20;
  int pairing_steps = 10;
  double pairing_perturb_px = 0.0;

  double compare_tolerance = 1e-6;

  int steps() const;
  CauchyGrid grid() const;
  LagrangianModel lagrangian() const;
  HJSection gamma() const;
};

const std::vector<std::string>& initial_family_names();

Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<scenario>",
                             const std::string& base_dir = ".");

/// Initial (u, p_t) on the grid at t = 0; p_x left at zero.
CauchyState initial_state(const Scenario& s, const CauchyGrid& grid);

/// Closed-form solution u(t) on the grid when the scenario has one
/// (traveling_wave with speed +-1 on free_wave; spatially constant data on
/// klein_gordon, mechanics_oscillator or free_wave).
std::optional<std::vector<double>> exact_solution(const Scenario& s, const CauchyGrid& grid, double t);

}  // namespace dhj

#endif  // DHJ_SCENARIO_HPP

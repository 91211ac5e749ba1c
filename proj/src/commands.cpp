#include "dhj/commands.hpp"

#include "dhj/cotangent_space.hpp"
#include "dhj/hamilton_jacobi.hpp"
#include "dhj/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace dhj {

std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate", "verify-hj", "characteristics", "compare",
                                                 "pairing-check"};
  return names;
}

namespace {

namespace fs = std::filesystem;

fs::path output_dir(const Scenario& s, const CommandOptions& o) {
  fs::path dir = o.out_dir ? fs::path(*o.out_dir) : fs::path(s.output_directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_csv(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ValidationError("cannot write '" + p.string() + "'");
  return f;
}

void write_fields(const fs::path& p, const Dimensions& d, const CauchyGrid& grid, const std::vector<CauchyState>& frames,
                  int digits) {
  auto f = open_csv(p);
  f << "t,node_index,x";
  for (int a = 1; a <= d.n; ++a) f << ",u_" << a;
  for (int a = 1; a <= d.n; ++a) f << ",pt_" << a;
  for (int c = 1; c <= d.n * d.m; ++c) f << ",px_" << c;
  f << '\n';
  const std::size_t n = grid.size();
  for (const auto& s : frames) {
    for (std::size_t j = 0; j < n; ++j) {
      f << format_number(s.t, digits) << ',' << j << ',' << format_number(grid.x[j], digits);
      for (int a = 0; a < d.n; ++a) f << ',' << format_number(s.u[a * n + j], digits);
      for (int a = 0; a < d.n; ++a) f << ',' << format_number(s.p_t[a * n + j], digits);
      for (int c = 0; c < d.n * d.m; ++c) f << ',' << format_number(s.p_x[c * n + j], digits);
      f << '\n';
    }
  }
}

void write_convergence(const fs::path& p, const std::vector<ConvergenceRow>& rows, int digits) {
  auto f = open_csv(p);
  f << "level,n_nodes,dt,error,ratio\n";
  for (const auto& r : rows)
    f << r.level << ',' << r.n_nodes << ',' << format_number(r.dt, digits) << ',' << format_number(r.error, digits)
      << ',' << format_number(r.ratio, digits) << '\n';
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Max difference at the coarse nodes between a coarse and a finer field.
double coarse_diff(const std::vector<double>& coarse, std::size_t n_coarse, const std::vector<double>& fine,
                   std::size_t n_fine) {
  const std::size_t r = n_fine / n_coarse;
  double m = 0.0;
  for (std::size_t c = 0; c < coarse.size() / n_coarse; ++c)
    for (std::size_t j = 0; j < n_coarse; ++j)
      m = std::max(m, std::abs(coarse[c * n_coarse + j] - fine[c * n_fine + j * r]));
  return m;
}

Scenario refine(const Scenario& s, const std::string& sweep, int level) {
  Scenario r = s;
  const int f = 1 << level;
  if (sweep == "grid") {
    if (s.dims.m == 0) throw ValidationError("--sweep grid needs m = 1");
    r.n_nodes = s.n_nodes * f;
  } else {
    r.dt = s.dt / f;
  }
  r.stride = 1;
  return r;
}

void check_sweep(const CommandOptions& o) {
  if (o.sweep && *o.sweep != "grid" && *o.sweep != "time")
    throw ValidationError("--sweep must be 'grid' or 'time'");
}

std::vector<ConvergenceRow> convergence_table(const Scenario& s, const std::string& sweep,
                                              const std::function<double(const Scenario&)>& error_of,
                                              const std::function<std::vector<double>(const Scenario&)>& field_of,
                                              bool has_reference) {
  std::vector<ConvergenceRow> rows;
  if (has_reference) {
    for (int l = 0; l < 3; ++l) {
      const Scenario r = refine(s, sweep, l);
      rows.push_back({l, r.n_nodes, r.dt, error_of(r), 0.0});
    }
  } else {
    std::vector<std::vector<double>> fields;
    std::vector<Scenario> levels;
    for (int l = 0; l < 4; ++l) {
      levels.push_back(refine(s, sweep, l));
      fields.push_back(field_of(levels.back()));
    }
    for (int l = 0; l < 3; ++l)
      rows.push_back({l, levels[l].n_nodes, levels[l].dt,
                      coarse_diff(fields[l], levels[l].grid().size(), fields[l + 1], levels[l + 1].grid().size()),
                      0.0});
  }
  for (std::size_t i = 1; i < rows.size(); ++i)
    rows[i].ratio = rows[i].error > 0.0 ? rows[i - 1].error / rows[i].error : 0.0;
  return rows;
}

void print_convergence(std::ostream& log, const std::vector<ConvergenceRow>& rows) {
  log << "convergence:\n";
  for (const auto& r : rows)
    log << "  level " << r.level << " n_nodes = " << r.n_nodes << " dt = " << format_number(r.dt)
        << " error = " << format_number(r.error) << " ratio = " << format_number(r.ratio) << '\n';
}

struct DirectRun {
  CauchyGrid grid;
  std::vector<CauchyState> frames;
};

DirectRun direct_run(const Scenario& s, const HamiltonianModel& H, const CauchyState* initial, Execution exec) {
  DirectRun run{s.grid(), {}};
  const CauchyState init = initial ? *initial : initial_state(s, run.grid);
  run.frames = simulate(H, run.grid, init, s.dt, s.steps(), s.stride, exec);
  return run;
}

std::vector<DiagnosticsRow> diagnostics(const LagrangianModel& L, const HamiltonianModel& H, const CauchyGrid& grid,
                                        const std::vector<CauchyState>& frames, std::uint64_t seed, Execution exec) {
  const Dimensions& d = H.dims();
  const std::size_t n = grid.size();
  const VariationSet tests = standard_test_set(d, grid, seed);
  std::vector<TangentVariation> velocities;
  if (frames.size() >= 5) velocities = frame_velocities(d, grid, frames);
  std::vector<DiagnosticsRow> rows;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const CauchyState& st = frames[f];
    DiagnosticsRow row;
    row.t = st.t;
    row.energy = instantaneous_hamiltonian(L, grid, restriction_map_R(st), exec);
    if (d.m == 1) {
      const auto dxu = spatial_derivative(grid, st.u, exec);
      for (std::size_t j = 0; j < n; ++j) {
        const auto g = eval_with_partials(H, st.node(d, grid, static_cast<int>(j)));
        for (int c = 0; c < d.n * d.m; ++c)
          row.constraint_residual = std::max(row.constraint_residual, std::abs(dxu[c * n + j] - g.d_px[c]));
      }
    }
    TangentVariation vel;
    if (!velocities.empty()) {
      vel = velocities[f];
    } else {
      const HdwRhs rhs = hdw_rhs(H, grid, st, exec);
      vel = TangentVariation::zeros(d, grid, 1.0);
      vel.du = rhs.u_dot;
      vel.dp_t = rhs.pt_dot;
    }
    row.trajectory_residual = dynamical_trajectory_residual(H, grid, st, vel, tests, exec);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

// ---------------------------------------------------------------------------

SimulateReport cmd_simulate(const Scenario& s, const CommandOptions& o, std::ostream& log) {
  check_sweep(o);
  const LagrangianModel L = s.lagrangian();
  const HamiltonianModel H = hamiltonian_from_lagrangian(L);
  const DirectRun run = direct_run(s, H, nullptr, o.exec);
  SimulateReport rep;
  rep.diagnostics = diagnostics(L, H, run.grid, run.frames, o.seed, o.exec);
  rep.final_u = run.frames.back().u;
  if (auto ex = exact_solution(s, run.grid, run.frames.back().t)) rep.exact_error = sup_diff(rep.final_u, *ex);

  const fs::path dir = output_dir(s, o);
  write_fields(dir / "fields.csv", s.dims, run.grid, run.frames, s.precision);
  {
    auto f = open_csv(dir / "diagnostics.csv");
    f << "t,energy,constraint_residual,trajectory_residual\n";
    for (const auto& r : rep.diagnostics)
      f << format_number(r.t, s.precision) << ',' << format_number(r.energy, s.precision) << ','
        << format_number(r.constraint_residual, s.precision) << ',' << format_number(r.trajectory_residual, s.precision)
        << '\n';
  }

  if (o.sweep) {
    const bool exact = exact_solution(s, s.grid(), s.t_final).has_value();
    auto final_field = [&](const Scenario& r) {
      return direct_run(r, H, nullptr, o.exec).frames.back().u;
    };
    auto error_of = [&](const Scenario& r) {
      const auto u = final_field(r);
      return sup_diff(u, *exact_solution(r, r.grid(), r.t_final));
    };
    rep.convergence = convergence_table(s, *o.sweep, error_of, final_field, exact);
    write_convergence(dir / "convergence.csv", rep.convergence, s.precision);
  }

  double drift = 0.0, traj = 0.0, cons = 0.0;
  for (const auto& r : rep.diagnostics) {
    drift = std::max(drift, std::abs(r.energy - rep.diagnostics.front().energy));
    traj = std::max(traj, r.trajectory_residual);
    cons = std::max(cons, r.constraint_residual);
  }
  log << "command = simulate\n"
      << "model = " << s.model << "\n"
      << "n_nodes = " << s.n_nodes << "\n"
      << "steps = " << s.steps() << "\n"
      << "seed = " << o.seed << "\n"
      << "final_t = " << format_number(run.frames.back().t) << "\n"
      << "final_u_max = " << format_number(sup_abs(rep.final_u)) << "\n"
      << "energy_drift = " << format_number(drift) << "\n"
      << "max_constraint_residual = " << format_number(cons) << "\n"
      << "max_trajectory_residual = " << format_number(traj) << "\n";
  if (rep.exact_error) log << "exact_error_linf = " << format_number(*rep.exact_error) << "\n";
  if (!rep.convergence.empty()) print_convergence(log, rep.convergence);
  log << "output = " << dir.string() << "\n";
  return rep;
}

namespace {

void check_pole_window(const Scenario& s) {
  if (s.gamma_family != "oscillator_gamma") return;
  const auto& p = s.gamma_params;
  const double omega = p.count("omega") ? p.at("omega") : 1.0;
  const double phi = p.count("phi") ? p.at("phi") : 0.0;
  double lo = omega * s.verify_t_min + phi;
  double hi = omega * s.verify_t_max + phi;
  if (lo > hi) std::swap(lo, hi);
  const double pi = std::numbers::pi;
  const double k = std::ceil((lo - kPoleGuard - 0.5 * pi) / pi);
  const double pole = 0.5 * pi + k * pi;
  if (pole <= hi + kPoleGuard) {
    std::ostringstream os;
    os.precision(17);
    os << "oscillator_gamma has a pole of tan at omega t + phi = " << pole << " (t = " << (pole - phi) / omega
       << ") inside the verification window t in [" << s.verify_t_min << ", " << s.verify_t_max << "]";
    throw DomainError(os.str());
  }
}

}  // namespace

VerifyReport cmd_verify_hj(const Scenario& s, const CommandOptions& o, std::ostream& log) {
  if (o.sweep) throw ValidationError("--sweep applies to simulate and compare only");
  const HJSection gamma = s.gamma();
  check_pole_window(s);
  const LagrangianModel L = s.lagrangian();
  const HamiltonianModel H = hamiltonian_from_lagrangian(L);
  const Dimensions& d = s.dims;
  const ConnectionCoefficients conn = reduced_connection(H, gamma);

  // Box corners first, then uniform samples.
  std::vector<BundlePoint> pts;
  const int nz = d.bundle_coords();
  auto lo = [&](int z) { return z == 0 ? s.verify_t_min : z <= d.m ? s.verify_x_min : s.verify_u_min; };
  auto hi = [&](int z) { return z == 0 ? s.verify_t_max : z <= d.m ? s.verify_x_max : s.verify_u_max; };
  auto make = [&](const std::vector<double>& z) {
    BundlePoint p;
    p.t = z[0];
    p.x.assign(z.begin() + 1, z.begin() + 1 + d.m);
    p.u.assign(z.begin() + 1 + d.m, z.end());
    return p;
  };
  for (int mask = 0; mask < (1 << nz) && static_cast<int>(pts.size()) < s.verify_samples; ++mask) {
    std::vector<double> z(nz);
    for (int q = 0; q < nz; ++q) z[q] = (mask >> q) & 1 ? hi(q) : lo(q);
    pts.push_back(make(z));
  }
  std::mt19937_64 rng(o.seed);
  while (static_cast<int>(pts.size()) < s.verify_samples) {
    std::vector<double> z(nz);
    for (int q = 0; q < nz; ++q) z[q] = std::uniform_real_distribution<double>(lo(q), hi(q))(rng);
    pts.push_back(make(z));
  }

  VerifyReport rep;
  rep.samples = static_cast<int>(pts.size());
  rep.u_max = std::max(std::abs(s.verify_u_min), std::abs(s.verify_u_max));
  for (const auto& r : gamma_closedness_residual(gamma, pts)) rep.closedness_sup = std::max(rep.closedness_sup, r.sup());
  for (const auto& p : pts) {
    rep.hj_sup = std::max(rep.hj_sup, sup_abs(hj_residual(H, gamma, p)));
    rep.flatness_sup = std::max(rep.flatness_sup, sup_abs(flatness_residual(conn, p)));
  }
  rep.passed = rep.closedness_sup <= s.verify_tolerance && rep.hj_sup <= s.verify_tolerance &&
               rep.flatness_sup <= s.verify_tolerance;

  const fs::path dir = output_dir(s, o);
  {
    auto f = open_csv(dir / "verify_hj.csv");
    f << "quantity,value\n"
      << "closedness_sup," << format_number(rep.closedness_sup, s.precision) << '\n'
      << "hj_sup," << format_number(rep.hj_sup, s.precision) << '\n'
      << "flatness_sup," << format_number(rep.flatness_sup, s.precision) << '\n'
      << "u_max," << format_number(rep.u_max, s.precision) << '\n'
      << "samples," << rep.samples << '\n';
  }
  log << "command = verify-hj\n"
      << "model = " << s.model << "\n"
      << "gamma = " << s.gamma_family << "\n"
      << "samples = " << rep.samples << "\n"
      << "seed = " << o.seed << "\n"
      << "closedness_sup = " << format_number(rep.closedness_sup) << "\n"
      << "hj_sup = " << format_number(rep.hj_sup) << "\n"
      << "flatness_sup = " << format_number(rep.flatness_sup) << "\n"
      << "u_max = " << format_number(rep.u_max) << "\n"
      << "tolerance = " << format_number(s.verify_tolerance) << "\n"
      << "verified = " << (rep.passed ? "true" : "false") << "\n";
  return rep;
}

namespace {

void require_compatible(const HamiltonianModel& H, const HJSection& gamma, const CauchyGrid& grid,
                        const std::vector<double>& u0) {
  const double res = sup_abs(restricted_connection_residual(H, gamma, grid, u0, 0.0));
  const double tol = grid.m == 1 ? 10.0 * grid.h * grid.h : 0.0;
  if (res > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "incompatible initial data: restricted connection residual " << res << " exceeds " << tol;
    throw CertificationError(os.str());
  }
}

}  // namespace

CharacteristicsReport cmd_characteristics(const Scenario& s, const CommandOptions& o, std::ostream& log) {
  if (o.sweep) throw ValidationError("--sweep applies to simulate and compare only");
  const HJSection gamma = s.gamma();
  const LagrangianModel L = s.lagrangian();
  const HamiltonianModel H = hamiltonian_from_lagrangian(L);
  const CauchyGrid grid = s.grid();
  const auto u0 = initial_state(s, grid).u;
  require_compatible(H, gamma, grid, u0);
  const CharacteristicRun run = evolve_characteristics(H, gamma, grid, u0, 0.0, s.dt, s.t_final, s.stride, 1e8, o.exec);
  if (run.times.size() < 5) throw ValidationError("characteristics needs at least 5 output frames");
  HJLiftOptions opt;
  opt.seed = o.seed;
  const HJLiftReport lr = hj_lift_solution_check(H, gamma, grid, run, opt, o.exec);

  CharacteristicsReport rep;
  rep.restricted_initial = lr.restricted_initial;
  rep.compatibility_tolerance = lr.compatibility_tolerance;
  rep.hdw_split = lr.hdw_split;
  rep.contraction = lr.contraction;
  rep.pullback = lr.pullback;
  rep.final_u = run.u.back();
  if (auto ex = exact_solution(s, grid, run.times.back())) rep.exact_error = sup_diff(rep.final_u, *ex);

  std::vector<CauchyState> lifted;
  for (std::size_t i = 0; i < run.times.size(); ++i) lifted.push_back(lift_by_gamma(gamma, run.times[i], grid, run.u[i], o.exec));
  const fs::path dir = output_dir(s, o);
  write_fields(dir / "fields.csv", s.dims, grid, lifted, s.precision);

  log << "command = characteristics\n"
      << "model = " << s.model << "\n"
      << "gamma = " << s.gamma_family << "\n"
      << "seed = " << o.seed << "\n"
      << "restricted_initial = " << format_number(rep.restricted_initial) << "\n"
      << "hdw_split_residual = " << format_number(rep.hdw_split) << "\n"
      << "contraction_residual = " << format_number(rep.contraction) << "\n"
      << "pullback_residual = " << format_number(rep.pullback) << "\n"
      << "final_t = " << format_number(run.times.back()) << "\n"
      << "final_u_max = " << format_number(sup_abs(rep.final_u)) << "\n";
  if (rep.exact_error) log << "exact_error_linf = " << format_number(*rep.exact_error) << "\n";
  log << "output = " << dir.string() << "\n";
  return rep;
}

namespace {

std::vector<CompareRow> compare_rows(const Scenario& s, const HamiltonianModel& H, const HJSection& gamma,
                                     Execution exec) {
  const CauchyGrid grid = s.grid();
  const auto u0 = initial_state(s, grid).u;
  require_compatible(H, gamma, grid, u0);
  const CharacteristicRun run = evolve_characteristics(H, gamma, grid, u0, 0.0, s.dt, s.t_final, s.stride, 1e8, exec);
  const CauchyState lifted0 = lift_by_gamma(gamma, 0.0, grid, u0, exec);
  const DirectRun direct = direct_run(s, H, &lifted0, exec);
  std::vector<CompareRow> rows;
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    CompareRow r;
    r.t = run.times[i];
    double sq = 0.0;
    for (std::size_t k = 0; k < run.u[i].size(); ++k) {
      const double diff = run.u[i][k] - direct.frames[i].u[k];
      r.linf = std::max(r.linf, std::abs(diff));
      sq += grid.w[k % n] * diff * diff;
    }
    r.l2 = std::sqrt(sq);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

CompareReport cmd_compare(const Scenario& s, const CommandOptions& o, std::ostream& log) {
  check_sweep(o);
  const HJSection gamma = s.gamma();
  const LagrangianModel L = s.lagrangian();
  const HamiltonianModel H = hamiltonian_from_lagrangian(L);
  CompareReport rep;
  rep.rows = compare_rows(s, H, gamma, o.exec);
  for (const auto& r : rep.rows) rep.max_linf = std::max(rep.max_linf, r.linf);
  rep.flagged = rep.max_linf > s.compare_tolerance;

  const fs::path dir = output_dir(s, o);
  {
    auto f = open_csv(dir / "compare.csv");
    f << "t,linf,l2\n";
    for (const auto& r : rep.rows)
      f << format_number(r.t, s.precision) << ',' << format_number(r.linf, s.precision) << ','
        << format_number(r.l2, s.precision) << '\n';
  }
  if (o.sweep) {
    auto err = [&](const Scenario& r) {
      double m = 0.0;
      for (const auto& row : compare_rows(r, H, gamma, o.exec)) m = std::max(m, row.linf);
      return m;
    };
    rep.convergence = convergence_table(s, *o.sweep, err, {}, true);
    write_convergence(dir / "convergence.csv", rep.convergence, s.precision);
  }
  log << "command = compare\n"
      << "model = " << s.model << "\n"
      << "gamma = " << s.gamma_family << "\n"
      << "max_linf = " << format_number(rep.max_linf) << "\n"
      << "final_linf = " << format_number(rep.rows.back().linf) << "\n"
      << "final_l2 = " << format_number(rep.rows.back().l2) << "\n"
      << "tolerance = " << format_number(s.compare_tolerance) << "\n"
      << "flagged = " << (rep.flagged ? "true" : "false") << "\n";
  if (!rep.convergence.empty()) print_convergence(log, rep.convergence);
  log << "output = " << dir.string() << "\n";
  return rep;
}

PairingReport cmd_pairing_check(const Scenario& s, const CommandOptions& o, std::ostream& log) {
  if (o.sweep) throw ValidationError("--sweep applies to simulate and compare only");
  const LagrangianModel L = s.lagrangian();
  const HamiltonianModel H = hamiltonian_from_lagrangian(L);
  const CauchyGrid grid = s.grid();
  const Dimensions& d = s.dims;
  auto frames = simulate(H, grid, initial_state(s, grid), s.dt, s.pairing_steps, 1, o.exec);
  if (s.pairing_perturb_px != 0.0)
    for (auto& f : frames)
      for (auto& v : f.p_x) v += s.pairing_perturb_px;

  PairingReport rep;
  rep.pairs = s.pairing_pairs;
  std::mt19937_64 rng(o.seed);
  for (const auto& f : frames) {
    rep.constraint_residual = std::max(rep.constraint_residual, legendre_constraint_residual(L, grid, f, o.exec));
    for (int i = 0; i < s.pairing_pairs; ++i) {
      const auto x = random_variation(d, grid, rng, true);
      const auto y = random_variation(d, grid, rng, true);
      rep.pullback_max = std::max(rep.pullback_max, pullback_identity_residual(L, H, grid, f, x, y, o.exec));
    }
  }
  std::vector<CotangentState> cot;
  for (const auto& f : frames) cot.push_back(restriction_map_R(f));
  rep.cotangent_trajectory = cotangent_trajectory_residual(L, grid, cot, o.seed, 8, o.exec);

  const fs::path dir = output_dir(s, o);
  {
    auto f = open_csv(dir / "pairing_check.csv");
    f << "quantity,value\n"
      << "pullback_max," << format_number(rep.pullback_max, s.precision) << '\n'
      << "cotangent_trajectory," << format_number(rep.cotangent_trajectory, s.precision) << '\n'
      << "constraint_residual," << format_number(rep.constraint_residual, s.precision) << '\n';
  }
  log << "command = pairing-check\n"
      << "model = " << s.model << "\n"
      << "seed = " << o.seed << "\n"
      << "frames = " << frames.size() << "\n"
      << "pairs_per_frame = " << rep.pairs << "\n"
      << "constraint_residual = " << format_number(rep.constraint_residual) << "\n"
      << "pullback_residual_max = " << format_number(rep.pullback_max) << "\n"
      << "cotangent_trajectory_residual = " << format_number(rep.cotangent_trajectory) << "\n"
      << "output = " << dir.string() << "\n";
  return rep;
}

int run_command(const std::string& command, const std::string& scenario_path, const CommandOptions& o,
                std::ostream& out, std::ostream& err) {
  try {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end())
      throw ValidationError("unknown command '" + command + "'");
    const Scenario s = parse_scenario(scenario_path);
    if (command == "simulate") {
      cmd_simulate(s, o, out);
    } else if (command == "verify-hj") {
      if (!cmd_verify_hj(s, o, out).passed) {
        err << "error: HJ verification failed: residuals exceed " << format_number(s.verify_tolerance) << '\n';
        return kExitCertification;
      }
    } else if (command == "characteristics") {
      cmd_characteristics(s, o, out);
    } else if (command == "compare") {
      cmd_compare(s, o, out);
    } else {
      cmd_pairing_check(s, o, out);
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "error: refused: " << e.what() << '\n';
    return kExitCertification;
  } catch (const CertificationError& e) {
    err << "error: refused: " << e.what() << '\n';
    return kExitCertification;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace dhj

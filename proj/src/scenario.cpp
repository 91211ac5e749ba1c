#include "dhj/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace dhj {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  Reader(std::string source, std::map<std::string, Section> sections)
      : source_(std::move(source)), sections_(std::move(sections)) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    if (line > 0) throw ValidationError(source_ + ":" + std::to_string(line) + ": " + msg);
    throw ValidationError(source_ + ": " + msg);
  }

  bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
  const Section* section(const std::string& s) const {
    auto it = sections_.find(s);
    return it == sections_.end() ? nullptr : &it->second;
  }

  const Entry* find(const std::string& sec, const std::string& key) const {
    const Section* s = section(sec);
    if (!s) return nullptr;
    auto it = s->find(key);
    return it == s->end() ? nullptr : &it->second;
  }

  int line_of(const std::string& sec, const std::string& key) const {
    const Entry* e = find(sec, key);
    return e ? e->line : 0;
  }

  double number(const std::string& sec, const std::string& key, const Entry& e) const {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(e.value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || trim(e.value.substr(used)) != "" || !std::isfinite(v))
      fail(e.line, sec + "." + key + " expects a finite number, got '" + e.value + "'");
    return v;
  }

  std::optional<double> number(const std::string& sec, const std::string& key) const {
    const Entry* e = find(sec, key);
    if (!e) return std::nullopt;
    return number(sec, key, *e);
  }

  std::optional<int> integer(const std::string& sec, const std::string& key) const {
    const Entry* e = find(sec, key);
    if (!e) return std::nullopt;
    const double v = number(sec, key, *e);
    if (v != std::floor(v) || std::abs(v) > 1e9) fail(e->line, sec + "." + key + " expects an integer");
    return static_cast<int>(v);
  }

  std::optional<std::string> text(const std::string& sec, const std::string& key) const {
    const Entry* e = find(sec, key);
    if (!e) return std::nullopt;
    return e->value;
  }

  void only_keys(const std::string& sec, std::initializer_list<const char*> keys) const {
    const Section* s = section(sec);
    if (!s) return;
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, e] : *s)
      if (!allowed.count(k)) fail(e.line, "unknown key '" + k + "' in [" + sec + "]");
  }

  /// All keys except `skip` as numbers.
  ParameterMap params(const std::string& sec, std::initializer_list<const char*> skip) const {
    ParameterMap out;
    const Section* s = section(sec);
    if (!s) return out;
    const std::set<std::string> skipped(skip.begin(), skip.end());
    for (const auto& [k, e] : *s)
      if (!skipped.count(k)) out[k] = number(sec, k, e);
    return out;
  }

 private:
  std::string source_;
  std::map<std::string, Section> sections_;
};

std::vector<std::vector<double>> read_table(const std::string& path, const Reader& r, int line) {
  std::ifstream in(path);
  if (!in) r.fail(line, "cannot open initial table '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string raw;
  int ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(trim(cell), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || !std::isfinite(v))
        throw ValidationError(path + ":" + std::to_string(ln) + ": table cell '" + trim(cell) + "' is not a number");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double param_or(const ParameterMap& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

const std::vector<std::string>& initial_family_names() {
  static const std::vector<std::string> names = {"constant", "sine", "traveling_wave", "custom-table"};
  return names;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_scenario_text(buf.str(), path, dir.empty() ? "." : dir.string());
}

Scenario parse_scenario_text(const std::string& text, const std::string& source, const std::string& base_dir) {
  static const std::set<std::string> known = {"model", "grid", "time", "initial", "gamma",
                                              "output", "verify", "pairing", "compare"};
  std::map<std::string, Section> sections;
  std::string current;
  std::stringstream in(text);
  std::string raw;
  int line = 0;
  auto fail = [&](int ln, const std::string& msg) -> void {
    throw ValidationError(source + ":" + std::to_string(ln) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
      current = trim(s.substr(1, s.size() - 2));
      if (!known.count(current)) fail(line, "unknown section [" + current + "]");
      if (sections.count(current)) fail(line, "duplicate section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
    if (current.empty()) fail(line, "key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (value.empty()) fail(line, current + "." + key + " has no value");
    if (sections[current].count(key)) fail(line, "duplicate key " + current + "." + key);
    sections[current][key] = {value, line};
  }

  const Reader r(source, std::move(sections));
  Scenario sc;
  sc.source = source;

  // [model]
  if (!r.has_section("model")) r.fail(0, "missing section [model]");
  const auto name = r.text("model", "name");
  if (!name) r.fail(0, "model.name is required");
  sc.model = *name;
  const auto& models = builtin_model_names();
  if (std::find(models.begin(), models.end(), sc.model) == models.end()) {
    std::string msg = "unknown model.name '" + sc.model + "'; known models:";
    for (const auto& m : models) msg += " " + m;
    r.fail(r.line_of("model", "name"), msg);
  }
  sc.model_params = r.params("model", {"name"});
  try {
    sc.dims = builtin_model(sc.model, sc.model_params).dims();
  } catch (const ValidationError& e) {
    r.fail(r.line_of("model", "name"), e.what());
  }

  // [grid]
  r.only_keys("grid", {"n_nodes", "length"});
  if (sc.dims.m == 1) {
    const auto nn = r.integer("grid", "n_nodes");
    if (!nn) r.fail(0, "grid.n_nodes is required");
    if (*nn < 3) r.fail(r.line_of("grid", "n_nodes"), "grid.n_nodes must be at least 3 for m = 1");
    sc.n_nodes = *nn;
  } else {
    const auto nn = r.integer("grid", "n_nodes");
    if (nn && *nn != 1) r.fail(r.line_of("grid", "n_nodes"), "grid.n_nodes must be 1 for m = 0");
    sc.n_nodes = 1;
  }
  if (auto len = r.number("grid", "length")) {
    if (!(*len > 0.0)) r.fail(r.line_of("grid", "length"), "grid.length must be positive");
    sc.length = *len;
  }

  // [time]
  r.only_keys("time", {"dt", "t_final"});
  const auto dt = r.number("time", "dt");
  if (!dt) r.fail(0, "time.dt is required");
  if (!(*dt > 0.0)) r.fail(r.line_of("time", "dt"), "time.dt must be positive");
  sc.dt = *dt;
  const auto tf = r.number("time", "t_final");
  if (!tf) r.fail(0, "time.t_final is required");
  if (*tf < sc.dt) r.fail(r.line_of("time", "t_final"), "time.t_final must be at least time.dt");
  sc.t_final = *tf;
  const double ratio = sc.t_final / sc.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    r.fail(r.line_of("time", "t_final"), "time.t_final must be a whole number of time.dt steps");

  // [initial]
  if (auto fam = r.text("initial", "family")) sc.initial_family = *fam;
  const auto& fams = initial_family_names();
  if (std::find(fams.begin(), fams.end(), sc.initial_family) == fams.end()) {
    std::string msg = "unknown initial.family '" + sc.initial_family + "'; known families:";
    for (const auto& f : fams) msg += " " + f;
    r.fail(r.line_of("initial", "family"), msg);
  }
  if (sc.initial_family == "custom-table") {
    const auto file = r.text("initial", "file");
    if (!file) r.fail(r.line_of("initial", "family"), "initial.file is required for custom-table");
    std::filesystem::path p(*file);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    sc.initial_table = read_table(p.string(), r, r.line_of("initial", "file"));
    const int line_no = r.line_of("initial", "file");
    if (static_cast<int>(sc.initial_table.size()) != sc.n_nodes)
      r.fail(line_no, "initial table has " + std::to_string(sc.initial_table.size()) + " rows, expected " +
                          std::to_string(sc.n_nodes));
    for (const auto& row : sc.initial_table)
      if (static_cast<int>(row.size()) != sc.dims.n && static_cast<int>(row.size()) != 2 * sc.dims.n)
        r.fail(line_no, "initial table rows need n or 2n columns");
    sc.initial_params = r.params("initial", {"family", "file"});
  } else {
    sc.initial_params = r.params("initial", {"family"});
  }
  {
    std::set<std::string> allowed;
    if (sc.initial_family == "constant") allowed = {"value", "pt"};
    if (sc.initial_family == "sine") allowed = {"amplitude", "wavenumber", "phase", "pt"};
    if (sc.initial_family == "traveling_wave") allowed = {"amplitude", "wavenumber", "speed"};
    for (const auto& [k, v] : sc.initial_params)
      if (!allowed.count(k))
        r.fail(r.line_of("initial", k), "unknown parameter initial." + k + " for family " + sc.initial_family);
  }

  // [gamma]
  if (r.has_section("gamma")) {
    const auto fam = r.text("gamma", "family");
    if (!fam) r.fail(0, "gamma.family is required when [gamma] is present");
    const auto& gf = gamma_family_names();
    if (std::find(gf.begin(), gf.end(), *fam) == gf.end()) {
      std::string msg = "unknown gamma.family '" + *fam + "'; known families:";
      for (const auto& f : gf) msg += " " + f;
      r.fail(r.line_of("gamma", "family"), msg);
    }
    sc.has_gamma = true;
    sc.gamma_family = *fam;
    sc.gamma_params = r.params("gamma", {"family"});
    std::set<std::string> allowed;
    if (*fam == "linear_gamma") allowed = {"a", "b", "c", "d", "p0"};
    if (*fam == "oscillator_gamma") allowed = {"omega", "phi"};
    for (const auto& [k, v] : sc.gamma_params)
      if (!allowed.count(k)) r.fail(r.line_of("gamma", k), "unknown parameter gamma." + k + " for family " + *fam);
  }

  // [output]
  r.only_keys("output", {"directory", "precision", "stride"});
  if (auto d = r.text("output", "directory")) sc.output_directory = *d;
  if (auto p = r.integer("output", "precision")) {
    if (*p < 1 || *p > 17) r.fail(r.line_of("output", "precision"), "output.precision must be in 1..17");
    sc.precision = *p;
  }
  if (auto s = r.integer("output", "stride")) {
    if (*s < 1) r.fail(r.line_of("output", "stride"), "output.stride must be at least 1");
    sc.stride = *s;
  }
  if (sc.steps() % sc.stride != 0)
    r.fail(r.line_of("output", "stride"), "output.stride must divide the number of time steps");

  // [verify]
  r.only_keys("verify", {"t_min", "t_max", "x_min", "x_max", "u_min", "u_max", "samples", "tolerance"});
  auto set_num = [&](const char* key, double& dst) {
    if (auto v = r.number("verify", key)) dst = *v;
  };
  set_num("t_min", sc.verify_t_min);
  set_num("t_max", sc.verify_t_max);
  set_num("x_min", sc.verify_x_min);
  set_num("x_max", sc.verify_x_max);
  set_num("u_min", sc.verify_u_min);
  set_num("u_max", sc.verify_u_max);
  set_num("tolerance", sc.verify_tolerance);
  if (auto v = r.integer("verify", "samples")) {
    if (*v < 1) r.fail(r.line_of("verify", "samples"), "verify.samples must be at least 1");
    sc.verify_samples = *v;
  }
  if (sc.verify_t_min > sc.verify_t_max || sc.verify_x_min > sc.verify_x_max || sc.verify_u_min > sc.verify_u_max)
    r.fail(0, "verify box bounds must satisfy min <= max");
  if (!(sc.verify_tolerance > 0.0)) r.fail(r.line_of("verify", "tolerance"), "verify.tolerance must be positive");

  // [pairing]
  r.only_keys("pairing", {"pairs", "steps", "perturb_px"});
  if (auto v = r.integer("pairing", "pairs")) {
    if (*v < 1) r.fail(r.line_of("pairing", "pairs"), "pairing.pairs must be at least 1");
    sc.pairing_pairs = *v;
  }
  if (auto v = r.integer("pairing", "steps")) {
    if (*v < 4) r.fail(r.line_of("pairing", "steps"), "pairing.steps must be at least 4");
    sc.pairing_steps = *v;
  }
  if (auto v = r.number("pairing", "perturb_px")) sc.pairing_perturb_px = *v;

  // [compare]
  r.only_keys("compare", {"tolerance"});
  if (auto v = r.number("compare", "tolerance")) {
    if (!(*v > 0.0)) r.fail(r.line_of("compare", "tolerance"), "compare.tolerance must be positive");
    sc.compare_tolerance = *v;
  }
  return sc;
}

int Scenario::steps() const { return static_cast<int>(std::lround(t_final / dt)); }

CauchyGrid Scenario::grid() const { return make_grid(n_nodes, length, dims.m); }

LagrangianModel Scenario::lagrangian() const { return builtin_model(model, model_params); }

HJSection Scenario::gamma() const {
  if (!has_gamma) throw ValidationError(source + ": this command needs a [gamma] section");
  return dhj::gamma_family(gamma_family, dims, gamma_params);
}

CauchyState initial_state(const Scenario& s, const CauchyGrid& grid) {
  const Dimensions& d = s.dims;
  const std::size_t n = grid.size();
  CauchyState st = CauchyState::zeros(d, grid, 0.0);
  const auto& p = s.initial_params;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid.x[j];
    for (int a = 0; a < d.n; ++a) {
      double u = 0.0, pt = 0.0;
      if (s.initial_family == "constant") {
        u = param_or(p, "value", 0.0);
        pt = param_or(p, "pt", 0.0);
      } else if (s.initial_family == "sine") {
        const double k = param_or(p, "wavenumber", 1.0);
        u = param_or(p, "amplitude", 1.0) * std::sin(two_pi * k * x / s.length + param_or(p, "phase", 0.0));
        pt = param_or(p, "pt", 0.0);
      } else if (s.initial_family == "traveling_wave") {
        const double amp = param_or(p, "amplitude", 1.0);
        const double kk = two_pi * param_or(p, "wavenumber", 1.0) / s.length;
        u = amp * std::sin(kk * x);
        pt = -amp * kk * param_or(p, "speed", 1.0) * std::cos(kk * x);
      } else {
        const auto& row = s.initial_table[j];
        u = row[a];
        pt = row.size() == static_cast<std::size_t>(2 * d.n) ? row[d.n + a] : 0.0;
      }
      st.u[a * n + j] = u;
      st.p_t[a * n + j] = pt;
    }
  }
  return st;
}

std::optional<std::vector<double>> exact_solution(const Scenario& s, const CauchyGrid& grid, double t) {
  const std::size_t n = grid.size();
  const auto& p = s.initial_params;
  std::vector<double> u(static_cast<std::size_t>(s.dims.n) * n);
  if (s.initial_family == "traveling_wave" && s.model == "free_wave") {
    const double c = param_or(p, "speed", 1.0);
    if (std::abs(std::abs(c) - 1.0) > 0.0) return std::nullopt;
    const double amp = param_or(p, "amplitude", 1.0);
    const double kk = 2.0 * std::numbers::pi * param_or(p, "wavenumber", 1.0) / s.length;
    for (int a = 0; a < s.dims.n; ++a)
      for (std::size_t j = 0; j < n; ++j) u[a * n + j] = amp * std::sin(kk * (grid.x[j] - c * t));
    return u;
  }
  if (s.initial_family == "constant") {
    double freq = -1.0;
    if (s.model == "free_wave") freq = 0.0;
    if (s.model == "klein_gordon") freq = param_or(s.model_params, "mu", 1.0);
    if (s.model == "mechanics_oscillator") freq = std::abs(param_or(s.model_params, "omega", 1.0));
    if (freq < 0.0) return std::nullopt;
    const double a0 = param_or(p, "value", 0.0);
    const double p0 = param_or(p, "pt", 0.0);
    const double v = freq == 0.0 ? a0 + p0 * t : a0 * std::cos(freq * t) + p0 / freq * std::sin(freq * t);
    std::fill(u.begin(), u.end(), v);
    return u;
  }
  return std::nullopt;
}

}  // namespace dhj

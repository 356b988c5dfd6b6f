#include "spinstar/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "spinstar/angular_momentum.hpp"
#include "spinstar/brute_force.hpp"
#include "spinstar/closed_forms.hpp"
#include "spinstar/errors.hpp"
#include "spinstar/exact_dynamics.hpp"

namespace spinstar {

namespace {

const std::vector<std::pair<Method, const char*>>& method_names() {
  static const std::vector<std::pair<Method, const char*>> names{
      {Method::Exact, "EXACT"},
      {Method::Oracle, "ORACLE"},
      {Method::NzP1, "NZ_P1"},
      {Method::TclP1, "TCL_P1"},
      {Method::NzP2, "NZ_P2"},
      {Method::TclP2, "TCL_P2"},
      {Method::ClosedNz2, "CLOSED_NZ2"},
      {Method::ClosedTclLargeM, "CLOSED_TCL_LARGEM"},
      {Method::AppendixExact, "APPENDIX_EXACT"},
      {Method::AppendixTclP1, "APPENDIX_TCL_P1"},
      {Method::AppendixTclP2, "APPENDIX_TCL_P2"},
  };
  return names;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

// method and sweep lists may also use commas
std::vector<std::string> list_items(std::string s) {
  std::replace(s.begin(), s.end(), ',', ' ');
  return tokens(s);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) throw ConfigError("not a number: '" + s + "'");
  return v;
}

long to_long(const std::string& s) {
  long v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

cplx to_complex(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {to_double(s), 0.0};
  return {to_double(s.substr(0, colon)), to_double(s.substr(colon + 1))};
}

bool is_diagonal(const ComplexMatrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (r != c && m(r, c) != cplx{}) return false;
  return true;
}

}  // namespace

std::string to_string(Method m) {
  for (const auto& [k, v] : method_names())
    if (k == m) return v;
  return "UNKNOWN";
}

Method parse_method(const std::string& name) {
  for (const auto& [k, v] : method_names())
    if (name == v) return k;
  throw ConfigError("unknown method '" + name + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all = [] {
    std::vector<Method> v;
    for (const auto& [k, n] : method_names()) v.push_back(k);
    return v;
  }();
  return all;
}

InitialState InitialState::parse(const std::string& text) {
  const auto t = tokens(text);
  if (t.empty()) throw ConfigError("empty initial state");
  InitialState s;
  if (t[0] == "basis" && t.size() == 2) {
    s.kind = Kind::Basis;
    s.m = HalfInt::parse(t[1]);
  } else if (t[0] == "random" && t.size() == 2) {
    s.kind = Kind::Random;
    const long seed = to_long(t[1]);
    if (seed < 0) throw ConfigError("random seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
  } else if (t[0] == "plus_x" && t.size() == 1) {
    s.kind = Kind::PlusX;
  } else if (t[0] == "matrix") {
    s.kind = Kind::Matrix;
    std::vector<std::vector<cplx>> rows;
    std::istringstream is(trim(text).substr(6));
    for (std::string row; std::getline(is, row, ';');) {
      std::vector<cplx> r;
      for (const auto& w : tokens(row)) r.push_back(to_complex(w));
      rows.push_back(std::move(r));
    }
    const std::size_t k = rows.size();
    for (const auto& r : rows)
      if (r.size() != k) throw ConfigError("initial matrix must be square");
    s.matrix = ComplexMatrix(k);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) s.matrix(r, c) = rows[r][c];
  } else {
    throw ConfigError("initial state must be 'basis <m>', 'random <seed>', 'plus_x' or 'matrix ...'");
  }
  return s;
}

DensityMatrix InitialState::build(HalfInt j1) const {
  switch (kind) {
    case Kind::Basis:
      if (!is_projection_of(j1, m)) throw ConfigError("initial projection " + m.str() + " is not a state of spin " + j1.str());
      return DensityMatrix::basis_state(j1, m);
    case Kind::Random:
      return DensityMatrix::random(j1, seed);
    case Kind::PlusX: {
      // Top eigenvector of S_x: amplitudes sqrt(C(2j, j+m)) / 2^j.
      const std::size_t k = static_cast<std::size_t>(j1.twice() + 1);
      std::vector<cplx> psi(k);
      const double j = j1.value();
      for (std::size_t i = 0; i < k; ++i) {
        const double mm = projection_at(j1, i).value();
        psi[i] = std::exp(0.5 * (log_binomial(static_cast<long>(2 * j), static_cast<long>(j + mm)) -
                                 2.0 * j * std::log(2.0)));
      }
      return DensityMatrix::pure(j1, psi);
    }
    case Kind::Matrix: {
      if (matrix.rows() != static_cast<std::size_t>(j1.twice() + 1))
        throw ConfigError("initial matrix dimension does not match j1");
      DensityMatrix d(j1, matrix);
      d.validate(1e-10);
      return d;
    }
  }
  throw ConfigError("bad initial state");
}

std::string InitialState::describe() const {
  switch (kind) {
    case Kind::Basis:
      return "basis " + m.str();
    case Kind::Random:
      return "random " + std::to_string(seed);
    case Kind::PlusX:
      return "plus_x";
    case Kind::Matrix: {
      std::string s = "matrix";
      for (std::size_t r = 0; r < matrix.rows(); ++r) {
        if (r) s += ";";
        for (std::size_t c = 0; c < matrix.cols(); ++c)
          s += " " + format_double(matrix(r, c).real()) + ":" + format_double(matrix(r, c).imag());
      }
      return s;
    }
  }
  return {};
}

std::vector<Observable> Scenario::selected_observables() const {
  if (!observables.empty()) return observables;
  std::vector<Observable> pops;
  for (std::size_t i = 0; i < static_cast<std::size_t>(model.dim()); ++i) pops.push_back({i, i});
  return pops;
}

void Scenario::validate() const {
  model.validate();
  grid.validate();
  if (methods.empty()) throw ConfigError("no methods requested");
  if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
  const auto k = static_cast<std::size_t>(model.dim());
  for (const Observable& o : observables)
    if (o.row >= k || o.col >= k) throw ConfigError("observable " + o.label() + " outside the " + std::to_string(k) + "-level state");
  const DensityMatrix rho0 = initial.build(model.j1);

  std::set<Method> seen;
  std::vector<std::string> problems;
  for (Method m : methods) {
    const std::string name = to_string(m);
    if (!seen.insert(m).second) problems.push_back(name + ": listed twice");
    switch (m) {
      case Method::Exact:
        if (model.omega0 != 0.0) problems.push_back(name + ": needs omega0 = 0");
        break;
      case Method::Oracle:
        break;
      case Method::NzP1:
      case Method::TclP1:
      case Method::NzP2:
      case Method::TclP2:
        if (grid.t_start != 0.0) problems.push_back(name + ": master equations start at t = 0");
        break;
      case Method::ClosedNz2:
      case Method::ClosedTclLargeM:
        if (model.j1 != HalfInt(1)) problems.push_back(name + ": needs j1 = 1");
        if (model.omega0 != 0.0) problems.push_back(name + ": needs omega0 = 0");
        if (!is_diagonal(rho0.matrix())) problems.push_back(name + ": needs a diagonal initial state");
        break;
      case Method::AppendixExact:
      case Method::AppendixTclP1:
      case Method::AppendixTclP2:
        if (model.j1 != kHalf) problems.push_back(name + ": needs j1 = 1/2");
        if (model.beta != 0.0) problems.push_back(name + ": needs beta = 0");
        break;
    }
  }
  if (!problems.empty()) {
    std::string msg = "incompatible methods for " + model.describe() + ":";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  if (seen.count(Method::Oracle) && model.N > (oracle_allow_large ? 12 : 8))
    throw GuardError("ORACLE: N = " + std::to_string(model.N) + " exceeds the bath-size guard of " +
                     std::to_string(oracle_allow_large ? 12 : 8) +
                     (oracle_allow_large ? std::string() : " ([run] oracle_allow_large = true raises it to 12)"));
}

// ---------------------------------------------------------------------------
// Config parsing

Scenario parse_config(std::istream& is, const std::string& source) {
  Scenario s;
  std::string section, line;
  std::size_t n = 0;
  std::set<std::string> seen;
  bool methods_given = false;
  auto fail = [&](const std::string& msg) { throw ConfigError(source + ":" + std::to_string(n) + ": " + msg); };
  static const std::map<std::string, std::set<std::string>> known{
      {"model", {"j1", "N", "beta", "A", "omega0"}},
      {"initial", {"state"}},
      {"grid", {"t_start", "t_end", "step", "max_steps"}},
      {"run", {"name", "methods", "observables", "output", "oracle_allow_large"}},
      {"solver", {"step", "tolerance", "max_iterations", "sector_floor", "truncate_on_divergence"}},
      {"compare", {"reference", "threshold"}},
      {"sweep", {"param", "values"}},
  };
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find_first_of("#;");
    // ';' separates matrix rows, so only a leading ';' starts a comment.
    std::string body = line;
    if (hash != std::string::npos && (line[hash] == '#' || trim(line.substr(0, hash)).empty())) body = line.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail("unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      if (!known.count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    if (section.empty()) fail("key outside any section");
    const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    if (!known.at(section).count(key)) fail("unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) fail("duplicate key '" + key + "'");
    if (value.empty()) fail("empty value for '" + key + "'");
    try {
      if (section == "model") {
        if (key == "j1") s.model.j1 = HalfInt::parse(value);
        else if (key == "N") s.model.N = static_cast<int>(to_long(value));
        else if (key == "beta") s.model.beta = to_double(value);
        else if (key == "A") s.model.A = to_double(value);
        else s.model.omega0 = to_double(value);
      } else if (section == "initial") {
        s.initial = InitialState::parse(value);
      } else if (section == "grid") {
        if (key == "t_start") s.grid.t_start = to_double(value);
        else if (key == "t_end") s.grid.t_end = to_double(value);
        else if (key == "step") s.grid.step = to_double(value);
        else {
          const long v = to_long(value);
          if (v <= 0) throw ConfigError("max_steps must be positive");
          s.grid.max_steps = static_cast<std::size_t>(v);
        }
      } else if (section == "run") {
        if (key == "name") {
          for (char c : value)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
              throw ConfigError("name may only contain letters, digits, '_' and '-'");
          s.name = value;
        } else if (key == "methods") {
          methods_given = true;
          for (const auto& w : list_items(value)) s.methods.push_back(parse_method(w));
        } else if (key == "observables") {
          for (const auto& w : tokens(value)) {
            const auto comma = w.find(',');
            if (comma == std::string::npos) throw ConfigError("observable '" + w + "' must be row,col");
            const long r = to_long(w.substr(0, comma)), c = to_long(w.substr(comma + 1));
            if (r < 1 || c < 1) throw ConfigError("observable indices are one-based");
            s.observables.push_back({static_cast<std::size_t>(r - 1), static_cast<std::size_t>(c - 1)});
          }
        } else if (key == "output") {
          s.output = value;
        } else {
          s.oracle_allow_large = to_bool(value);
        }
      } else if (section == "solver") {
        if (key == "step") s.solver.step = to_double(value);
        else if (key == "tolerance") s.solver.tolerance = to_double(value);
        else if (key == "max_iterations") s.solver.max_iterations = static_cast<int>(to_long(value));
        else if (key == "sector_floor") s.solver.sector_floor = to_double(value);
        else s.solver.truncate_on_divergence = to_bool(value);
      } else if (section == "compare") {
        if (key == "reference") s.reference = parse_method(value);
        else s.threshold = to_double(value);
      } else {
        if (key == "param") {
          if (value != "N" && value != "beta" && value != "A") throw ConfigError("sweep param must be N, beta or A");
          s.sweep_param = value;
        } else {
          for (const auto& w : list_items(value)) s.sweep_values.push_back(to_double(w));
        }
      }
    } catch (const ConfigError& e) {
      fail(e.what());
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  if (!methods_given) throw ConfigError(source + ": [run] methods is required");
  if (s.solver.step < 0.0) throw ConfigError(source + ": solver step must be non-negative");
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return s;
}

Scenario load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  return parse_config(is, path);
}

// ---------------------------------------------------------------------------
// Presets. Time windows are not given in the captions; the ones below cover
// the dynamics each figure discusses.

namespace {

Scenario base(const std::string& name, HalfInt j1, int N, double beta, HalfInt m0, std::vector<Method> methods,
              double t_end, double step) {
  Scenario s;
  s.name = name;
  s.model.j1 = j1;
  s.model.N = N;
  s.model.beta = beta;
  s.model.A = 1.0;
  s.initial.kind = InitialState::Kind::Basis;
  s.initial.m = m0;
  s.methods = std::move(methods);
  s.grid = {0.0, t_end, step};
  const std::size_t i = index_of(j1, m0);
  s.observables = {{i, i}};
  return s;
}

std::string fmt_beta(double b) {
  std::ostringstream os;
  os << b;
  std::string s = os.str();
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11"};
}

std::vector<Scenario> preset(const std::string& name) {
  using M = Method;
  std::vector<Scenario> out;
  const std::vector<M> p1{M::Exact, M::TclP1, M::NzP1};
  const std::vector<M> closed{M::Exact, M::ClosedTclLargeM, M::ClosedNz2};
  if (name == "fig1") {
    for (int N : {50, 100, 200})
      out.push_back(base("fig1_N" + std::to_string(N), HalfInt(3), N, 0.25, HalfInt(1), {M::Exact}, 20.0, 0.01));
  } else if (name == "fig2") {
    for (double b : {0.0, 0.25, 0.5})
      out.push_back(base("fig2_beta" + fmt_beta(b), HalfInt(2), 101, b, HalfInt(1), {M::Exact}, 20.0, 0.01));
  } else if (name == "fig3") {
    for (int j : {1, 2, 3})
      out.push_back(base("fig3_j" + std::to_string(j), HalfInt(j), 100, 0.25, HalfInt(1), {M::Exact}, 20.0, 0.01));
  } else if (name == "fig4") {
    out.push_back(base("fig4", HalfInt(1), 101, 0.25, HalfInt(1), p1, 2.0, 0.005));
  } else if (name == "fig5") {
    out.push_back(base("fig5", HalfInt(1), 101, 0.5, HalfInt(1), p1, 2.0, 0.005));
  } else if (name == "fig6") {
    out.push_back(base("fig6", HalfInt(1), 51, 0.25, HalfInt(1), p1, 2.0, 0.005));
  } else if (name == "fig7") {
    out.push_back(base("fig7", HalfInt(1), 101, 0.25, HalfInt(1), closed, 2.0, 0.005));
  } else if (name == "fig8") {
    out.push_back(base("fig8", HalfInt(1), 51, 0.25, HalfInt(1), closed, 2.0, 0.005));
  } else if (name == "fig9") {
    out.push_back(base("fig9", HalfInt(1), 101, 0.25, HalfInt(1),
                       {M::Exact, M::NzP1, M::ClosedNz2, M::ClosedTclLargeM, M::TclP1}, 20.0, 0.01));
  } else if (name == "fig10" || name == "fig11") {
    Scenario s = base(name, kHalf, 101, 0.0, kHalf, {M::AppendixExact, M::AppendixTclP1, M::AppendixTclP2}, 2.0, 0.001);
    s.model.omega0 = 51.0;
    s.reference = M::AppendixExact;
    if (name == "fig11") {
      // The caption's <1|rho|2> = 1 is not a density matrix; the closest
      // pure state with maximal coherence is |+x>, <1|rho|2> = 1/2.
      s.initial.kind = InitialState::Kind::PlusX;
      s.observables = {{0, 1}};
    }
    out.push_back(std::move(s));
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  for (const Scenario& s : out) s.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Methods

namespace {

// u = x - z decays as exp(-G); the m -> 0 limit of G is j^2 (A t)^2 / 2.
std::pair<double, double> largem_block(HalfInt j, HalfInt m, double A, double x0, double C, double z0, double t) {
  if (m.twice() != 0) return tcl_j1_largem(J1BlockParams{j, m, A, C}, x0, z0, t);
  const double jv = j.value();
  const double G = 0.5 * jv * jv * A * A * t * t;
  const double u = (x0 - z0) * std::exp(-G);
  const double v = 2.0 * C / 3.0 + (x0 + z0 - 2.0 * C / 3.0) * std::exp(-3.0 * G);
  return {0.5 * (u + v), 0.5 * (v - u)};
}

}  // namespace

TimeSeries closed_j1_series(const ModelSpec& spec, const DensityMatrix& rho0, const GridSpec& grid, bool large_m_tcl) {
  spec.validate();
  grid.validate();
  if (spec.j1 != HalfInt(1) || spec.omega0 != 0.0) throw ConfigError("closed j1 = 1 forms need j1 = 1 and omega0 = 0");
  if (!is_diagonal(rho0.matrix())) throw ConfigError("closed j1 = 1 forms need a diagonal initial state");
  const double p[3] = {rho0.matrix()(0, 0).real(), rho0.matrix()(1, 1).real(), rho0.matrix()(2, 2).real()};

  TimeSeries ts;
  ts.method = large_m_tcl ? "CLOSED_TCL_LARGEM" : "CLOSED_NZ2";
  ts.model = spec;
  ts.times = grid.times();
  ts.values.assign(ts.times.size(), ComplexMatrix(3));
  const HalfInt one(1);
  for (HalfInt j : bath_spins(spec.N)) {
    auto w = [&](HalfInt m) { return is_projection_of(j, m) ? std::exp(log_sector_weight(spec.N, j, m, spec.beta)) : 0.0; };
    // Block centred on m: x = rho11 of (j, m-1), y = rho22 of (j, m), z = rho33 of (j, m+1).
    for (HalfInt m = j + one; m >= -j - one; m -= one) {
      const double x0 = p[0] * w(m - one), y0 = p[1] * w(m), z0 = p[2] * w(m + one);
      const double C = x0 + y0 + z0;
      if (C == 0.0) continue;
      const bool frozen = !is_projection_of(j, m);
      for (std::size_t i = 0; i < ts.times.size(); ++i) {
        const double t = ts.times[i];
        double x = x0, y = y0, z = z0;
        if (!frozen) {
          if (large_m_tcl) {
            std::tie(x, z) = largem_block(j, m, spec.A, x0, C, z0, t);
            y = C - x - z;
          } else {
            const BlockPopulations b = nz2_block(J1BlockParams{j, m, spec.A, C}, x0, y0, z0, t);
            x = b.x;
            y = b.y;
            z = b.z;
          }
        }
        ComplexMatrix& r = ts.values[i];
        r(0, 0) += x;
        r(1, 1) += y;
        r(2, 2) += z;
      }
    }
  }
  return ts;
}

TimeSeries run_method(const Scenario& s, Method m) {
  const DensityMatrix rho0 = s.initial.build(s.model.j1);
  switch (m) {
    case Method::Exact:
      return exact_evolve(s.model, rho0, s.grid);
    case Method::Oracle:
      return brute_force_evolve(s.model, rho0, s.grid, {s.oracle_allow_large});
    case Method::NzP1:
      return master_solve(s.model, ProjectorKind::ThermalProduct, Equation::NZ, rho0, s.grid, s.solver);
    case Method::TclP1:
      return master_solve(s.model, ProjectorKind::ThermalProduct, Equation::TCL, rho0, s.grid, s.solver);
    case Method::NzP2:
      return master_solve(s.model, ProjectorKind::Correlated, Equation::NZ, rho0, s.grid, s.solver);
    case Method::TclP2:
      return master_solve(s.model, ProjectorKind::Correlated, Equation::TCL, rho0, s.grid, s.solver);
    case Method::ClosedNz2:
      return closed_j1_series(s.model, rho0, s.grid, false);
    case Method::ClosedTclLargeM:
      return closed_j1_series(s.model, rho0, s.grid, true);
    case Method::AppendixExact:
    case Method::AppendixTclP1:
    case Method::AppendixTclP2: {
      s.grid.validate();
      TimeSeries ts;
      ts.method = to_string(m);
      ts.model = s.model;
      ts.times = s.grid.times();
      for (double t : ts.times) {
        if (m == Method::AppendixExact)
          ts.values.push_back(appendix_exact(s.model, rho0, t));
        else
          ts.values.push_back(appendix_tcl(
              s.model, m == Method::AppendixTclP1 ? ProjectorKind::ThermalProduct : ProjectorKind::Correlated, rho0, t));
      }
      return ts;
    }
  }
  throw ConfigError("unhandled method");
}

// ---------------------------------------------------------------------------
// Runner

namespace {

using Json = nlohmann::ordered_json;

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

Json model_json(const ModelSpec& m) {
  return Json{{"j1", m.j1.str()}, {"N", m.N}, {"beta", m.beta}, {"A", m.A}, {"omega0", m.omega0}};
}

Json scenario_json(const Scenario& s) {
  Json j;
  j["scenario"] = s.name;
  j["model"] = model_json(s.model);
  j["initial_state"] = s.initial.describe();
  j["grid"] = {{"t_start", s.grid.t_start}, {"t_end", s.grid.t_end}, {"step", s.grid.step}};
  return j;
}

Json report_json(const ComparisonReport& r) {
  return Json{{"method", r.method},
              {"reference", r.reference},
              {"threshold", r.threshold},
              {"max_error", r.max_error},
              {"mean_error", r.mean_error},
              {"horizon", r.horizon}};
}

MethodOutcome evaluate(const Scenario& s, Method m) {
  MethodOutcome o;
  o.method = m;
  try {
    o.series = run_method(s, m);
    if (auto it = o.series.meta.find("diverged_at"); it != o.series.meta.end()) {
      o.status = "diverged";
      o.message = to_string(m) + " diverged at t=" + it->second + "; samples before it are kept";
    }
  } catch (const Error& e) {
    o.status = "failed";
    o.message = e.what();
    o.exit_code = e.exit_code();
  }
  return o;
}

void write_outputs(const Scenario& s, std::vector<MethodOutcome>& outcomes) {
  ensure_dir(s.output);
  const auto obs = s.selected_observables();
  std::ostringstream gp;
  gp << "set datafile separator ','\nset key outside\nset xlabel 't'\n";
  for (const Observable& o : obs) {
    gp << "set title '" << s.name << " re rho_" << o.label() << "'\nplot";
    bool first = true;
    for (MethodOutcome& m : outcomes) {
      if (m.status == "failed") continue;
      const std::string file = s.name + "_" + to_string(m.method) + "_" + o.label() + ".csv";
      write_csv_file(join_path(s.output, file), m.series, {o});
      m.files.push_back(file);
      gp << (first ? " " : ", \\\n     ") << "'" << file << "' using 1:2 with lines title '" << to_string(m.method)
         << "'";
      first = false;
    }
    gp << "\npause -1\n";
  }
  std::ofstream g(join_path(s.output, s.name + "_plot.gp"), std::ios::binary);
  g << gp.str();
}

std::string write_summary(const Scenario& s, const std::vector<MethodOutcome>& outcomes,
                          const std::vector<ComparisonReport>& comparisons) {
  Json j = scenario_json(s);
  Json methods = Json::array();
  for (const MethodOutcome& o : outcomes) {
    Json m{{"name", to_string(o.method)}, {"status", o.status}};
    if (!o.message.empty()) m["message"] = o.message;
    if (o.status != "failed") {
      m["samples"] = o.series.times.size();
      m["max_trace_defect"] = o.series.max_trace_defect();
      m["max_hermiticity_defect"] = o.series.max_hermiticity_defect();
      m["meta"] = o.series.meta;
      m["files"] = o.files;
    }
    methods.push_back(std::move(m));
  }
  j["methods"] = std::move(methods);
  if (!comparisons.empty()) {
    Json c = Json::array();
    for (const auto& r : comparisons) c.push_back(report_json(r));
    j["comparisons"] = std::move(c);
  }
  const std::string path = join_path(s.output, s.name + "_summary.json");
  std::ofstream os(path, std::ios::binary);
  os << j.dump(2) << '\n';
  if (!os) throw ConfigError("cannot write " + path);
  return path;
}

int worst(const std::vector<MethodOutcome>& outcomes) {
  int code = 0;
  for (const auto& o : outcomes) code = std::max(code, o.exit_code);
  return code;
}

}  // namespace

RunResult run_scenario(const Scenario& s) {
  s.validate();
  RunResult r;
  for (Method m : s.methods) r.outcomes.push_back(evaluate(s, m));
  write_outputs(s, r.outcomes);
  r.summary_path = write_summary(s, r.outcomes, {});
  r.exit_code = worst(r.outcomes);
  return r;
}

RunResult compare_scenario(const Scenario& s) {
  s.validate();
  Scenario ref = s;
  ref.methods = {s.reference};
  ref.validate();
  RunResult r;
  MethodOutcome reference;
  bool listed = false;
  for (Method m : s.methods) {
    r.outcomes.push_back(evaluate(s, m));
    if (m == s.reference) {
      reference = r.outcomes.back();
      listed = true;
    }
  }
  if (!listed) reference = evaluate(s, s.reference);
  if (reference.status != "ok")
    throw NumericalError("reference " + to_string(s.reference) + " unavailable: " + reference.message);
  const auto obs = s.selected_observables();
  ensure_dir(s.output);
  for (const MethodOutcome& o : r.outcomes) {
    if (o.status == "failed") continue;
    ComparisonReport rep = compare_series(reference.series, o.series, obs, s.threshold);
    std::ofstream os(join_path(s.output, s.name + "_compare_" + to_string(o.method) + ".csv"), std::ios::binary);
    os << "# reference=" << rep.reference << "\n# method=" << rep.method << "\n# threshold=" << format_double(rep.threshold)
       << "\n# horizon=" << format_double(rep.horizon) << "\nt,error,running_max\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i)
      os << format_double(rep.times[i]) << ',' << format_double(rep.error[i]) << ',' << format_double(rep.running_max[i])
         << '\n';
    r.comparisons.push_back(std::move(rep));
  }
  write_outputs(s, r.outcomes);
  r.summary_path = write_summary(s, r.outcomes, r.comparisons);
  r.exit_code = worst(r.outcomes);
  return r;
}

SweepResult sweep_scenario(const Scenario& s) {
  if (s.sweep_param.empty()) throw ConfigError("sweep needs [sweep] param");
  if (s.sweep_values.size() < 2) throw ConfigError("sweep needs at least two values");
  std::set<double> distinct(s.sweep_values.begin(), s.sweep_values.end());
  if (distinct.size() != s.sweep_values.size()) throw ConfigError("sweep values must not repeat");

  SweepResult res;
  res.param = s.sweep_param;
  res.values = s.sweep_values;
  for (Method m : s.methods)
    if (m != s.reference) res.methods.push_back(m);
  if (res.methods.empty()) throw ConfigError("sweep needs at least one method besides the reference");

  std::vector<Scenario> runs;
  for (double v : s.sweep_values) {
    Scenario c = s;
    if (s.sweep_param == "N") {
      if (v != std::floor(v) || v < 1) throw ConfigError("sweep values for N must be positive integers");
      c.model.N = static_cast<int>(v);
    } else if (s.sweep_param == "beta") {
      c.model.beta = v;
    } else {
      c.model.A = v;
    }
    c.methods = res.methods;
    c.methods.push_back(s.reference);
    c.validate();
    runs.push_back(std::move(c));
  }

  res.horizons.assign(res.methods.size(), {});
  Json per_value = Json::array();
  const auto obs = s.selected_observables();
  for (std::size_t v = 0; v < runs.size(); ++v) {
    const Scenario& c = runs[v];
    MethodOutcome ref = evaluate(c, s.reference);
    if (ref.status != "ok") throw NumericalError("reference unavailable at " + s.sweep_param + "=" + format_double(s.sweep_values[v]) + ": " + ref.message);
    Json entry{{"value", s.sweep_values[v]}};
    for (std::size_t k = 0; k < res.methods.size(); ++k) {
      MethodOutcome o = evaluate(c, res.methods[k]);
      if (o.status == "failed") throw NumericalError(o.message);
      const ComparisonReport rep = compare_series(ref.series, o.series, obs, s.threshold);
      res.horizons[k].push_back(rep.horizon);
      entry[to_string(res.methods[k])] = report_json(rep);
    }
    per_value.push_back(std::move(entry));
  }

  Json fits = Json::object();
  for (std::size_t k = 0; k < res.methods.size(); ++k) {
    PowerLawFit f;
    bool ok = true;
    try {
      f = fit_power_law(res.values, res.horizons[k]);
    } catch (const ConfigError&) {
      ok = false;
    }
    res.fits.push_back(f);
    res.fitted.push_back(ok);
    fits[to_string(res.methods[k])] =
        ok ? Json{{"exponent", f.exponent}, {"prefactor", f.prefactor}, {"r_squared", f.r_squared}} : Json(nullptr);
  }

  ensure_dir(s.output);
  res.csv_path = join_path(s.output, s.name + "_sweep_" + s.sweep_param + ".csv");
  {
    std::ofstream os(res.csv_path, std::ios::binary);
    os << "# reference=" << to_string(s.reference) << "\n# threshold=" << format_double(s.threshold) << '\n'
       << s.sweep_param;
    for (Method m : res.methods) os << ",tstar_" << to_string(m);
    os << '\n';
    for (std::size_t v = 0; v < res.values.size(); ++v) {
      os << format_double(res.values[v]);
      for (std::size_t k = 0; k < res.methods.size(); ++k) os << ',' << format_double(res.horizons[k][v]);
      os << '\n';
    }
  }
  Json j = scenario_json(s);
  j["sweep"] = {{"param", s.sweep_param}, {"reference", to_string(s.reference)}, {"threshold", s.threshold}};
  j["results"] = std::move(per_value);
  j["fits"] = std::move(fits);
  res.summary_path = join_path(s.output, s.name + "_sweep_summary.json");
  std::ofstream os(res.summary_path, std::ios::binary);
  os << j.dump(2) << '\n';
  return res;
}

OracleCheck oracle_check(const Scenario& s) {
  Scenario c = s;
  const bool resonant = s.model.omega0 == 0.0;
  const Method ref = resonant ? Method::Exact : Method::AppendixExact;
  c.methods = {ref, Method::Oracle};
  c.validate();
  OracleCheck out;
  out.reference = to_string(ref);
  const TimeSeries a = run_method(c, ref), b = run_method(c, Method::Oracle);
  const auto all = all_elements(static_cast<std::size_t>(c.model.dim()));
  out.max_error = compare_series(a, b, all, 1.0).max_error;
  return out;
}

}  // namespace spinstar

#include "spinstar/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spinstar/errors.hpp"

namespace spinstar {

std::string Observable::label() const {
  const std::size_t r = row + 1, c = col + 1;
  if (r > 9 || c > 9) return std::to_string(r) + "_" + std::to_string(c);
  return std::to_string(r) + std::to_string(c);
}

std::vector<Observable> all_elements(std::size_t dim) {
  std::vector<Observable> out;
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) out.push_back({r, c});
  return out;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& os, const TimeSeries& ts, const std::vector<Observable>& observables) {
  const ModelSpec& m = ts.model;
  os << "# method=" << ts.method << '\n';
  os << "# j1=" << m.j1.str() << '\n';
  os << "# N=" << m.N << '\n';
  os << "# beta=" << format_double(m.beta) << '\n';
  os << "# A=" << format_double(m.A) << '\n';
  os << "# omega0=" << format_double(m.omega0) << '\n';
  for (const auto& [k, v] : ts.meta) os << "# " << k << '=' << v << '\n';
  os << 't';
  for (const Observable& o : observables) os << ",re_" << o.label() << ",im_" << o.label();
  os << '\n';
  for (std::size_t i = 0; i < ts.times.size(); ++i) {
    os << format_double(ts.times[i]);
    for (const Observable& o : observables) {
      const cplx z = ts.values[i](o.row, o.col);
      os << ',' << format_double(z.real()) << ',' << format_double(z.imag());
    }
    os << '\n';
  }
}

void write_csv_file(const std::string& path, const TimeSeries& ts, const std::vector<Observable>& observables) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  write_csv(os, ts, observables);
  if (!os) throw ConfigError("write failed: " + path);
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ConfigError("csv line " + std::to_string(n) + ": metadata without '='");
      t.meta[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split(line, ',');
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != t.columns.size())
      throw ConfigError("csv line " + std::to_string(n) + ": expected " + std::to_string(t.columns.size()) + " fields");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, n));
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw ConfigError("csv has no header");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path);
  return read_csv(is);
}

TimeSeries to_time_series(const CsvTable& table) {
  const std::size_t pairs = (table.columns.size() - 1) / 2;
  const auto dim = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(pairs))));
  if (table.columns.empty() || table.columns[0] != "t" || dim * dim != pairs || 2 * pairs + 1 != table.columns.size())
    throw ConfigError("csv does not hold a full square matrix per row");
  const auto expect = all_elements(dim);
  for (std::size_t i = 0; i < pairs; ++i)
    if (table.columns[1 + 2 * i] != "re_" + expect[i].label() || table.columns[2 + 2 * i] != "im_" + expect[i].label())
      throw ConfigError("csv column " + table.columns[1 + 2 * i] + " out of row-major order");

  TimeSeries ts;
  std::map<std::string, std::string> meta = table.meta;
  auto take = [&](const std::string& key) -> std::string {
    auto it = meta.find(key);
    if (it == meta.end()) return {};
    std::string v = it->second;
    meta.erase(it);
    return v;
  };
  ts.method = take("method");
  if (auto v = take("j1"); !v.empty()) ts.model.j1 = HalfInt::parse(v);
  if (auto v = take("N"); !v.empty()) ts.model.N = std::stoi(v);
  if (auto v = take("beta"); !v.empty()) ts.model.beta = std::stod(v);
  if (auto v = take("A"); !v.empty()) ts.model.A = std::stod(v);
  if (auto v = take("omega0"); !v.empty()) ts.model.omega0 = std::stod(v);
  ts.meta = std::move(meta);
  for (const auto& row : table.rows) {
    ts.times.push_back(row[0]);
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < pairs; ++i) m(expect[i].row, expect[i].col) = {row[1 + 2 * i], row[2 + 2 * i]};
    ts.values.push_back(std::move(m));
  }
  return ts;
}

ComparisonReport compare_series(const TimeSeries& reference, const TimeSeries& other,
                                const std::vector<Observable>& observables, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("comparison threshold must be positive");
  if (observables.empty()) throw ConfigError("no observables to compare");
  if (other.times.size() > reference.times.size()) throw ConfigError("grids differ: " + other.method + " is longer");
  for (std::size_t i = 0; i < other.times.size(); ++i)
    if (std::abs(other.times[i] - reference.times[i]) > 1e-12 * std::max(1.0, std::abs(reference.times[i])))
      throw ConfigError("grids differ at sample " + std::to_string(i));
  if (!reference.values.empty() && !other.values.empty() &&
      reference.values[0].rows() != other.values[0].rows())
    throw ConfigError("state dimensions differ");
  for (const Observable& o : observables)
    if (!reference.values.empty() && (o.row >= reference.values[0].rows() || o.col >= reference.values[0].rows()))
      throw ConfigError("observable " + o.label() + " outside the state");

  const bool any_diag = std::any_of(observables.begin(), observables.end(), [](auto& o) { return o.diagonal(); });
  ComparisonReport rep;
  rep.reference = reference.method;
  rep.method = other.method;
  rep.threshold = threshold;
  rep.horizon = reference.times.empty() ? 0.0 : reference.times.back();
  bool crossed = false;
  double sum = 0.0;
  for (std::size_t i = 0; i < other.times.size(); ++i) {
    double err = 0.0, pop = 0.0;
    for (const Observable& o : observables) {
      const double e = std::abs(reference.values[i](o.row, o.col) - other.values[i](o.row, o.col));
      err = std::max(err, e);
      if (o.diagonal() || !any_diag) pop = std::max(pop, e);
    }
    rep.times.push_back(other.times[i]);
    rep.error.push_back(err);
    rep.max_error = std::max(rep.max_error, err);
    rep.running_max.push_back(rep.max_error);
    sum += err;
    if (!crossed && pop > threshold) {
      crossed = true;
      rep.horizon = other.times[i];
    }
  }
  rep.mean_error = other.times.empty() ? 0.0 : sum / static_cast<double>(other.times.size());
  if (!crossed && other.times.size() < reference.times.size()) rep.horizon = reference.times[other.times.size()];
  return rep;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("power-law fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("power-law fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double n = static_cast<double>(x.size());
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  if (!(vx > 0.0)) throw ConfigError("power-law fit needs distinct abscissae");
  PowerLawFit f;
  f.exponent = cxy / vx;
  f.prefactor = std::exp((sy - f.exponent * sx) / n);
  f.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

}  // namespace spinstar

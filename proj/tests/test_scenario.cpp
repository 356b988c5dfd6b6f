#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinstar/errors.hpp"
#include "spinstar/exact_dynamics.hpp"
#include "spinstar/report.hpp"
#include "spinstar/scenario.hpp"

using namespace spinstar;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spinstar_test_" + name);
  fs::remove_all(p);
  return p;
}

Scenario parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is, "test.ini");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

const char* kBase = R"([model]
j1 = 1
N = 11
beta = 0.25
[initial]
state = basis 1
[grid]
t_end = 1
step = 0.05
[run]
name = base
methods = EXACT NZ_P1 TCL_P1
)";

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("csv round trip is exact") {
  ModelSpec m;
  m.j1 = HalfInt(1);
  m.N = 7;
  m.beta = 0.1 + 0.2;
  const auto ts = exact_evolve(m, DensityMatrix::random(HalfInt(1), 3), GridSpec{0.0, 2.0, 0.1});
  std::stringstream ss;
  write_csv(ss, ts, all_elements(3));
  const TimeSeries back = to_time_series(read_csv(ss));
  CHECK(back.method == ts.method);
  CHECK(back.model.beta == m.beta);
  CHECK(back.model.j1 == m.j1);
  REQUIRE(back.times.size() == ts.times.size());
  for (std::size_t i = 0; i < ts.times.size(); ++i) {
    CHECK(back.times[i] == ts.times[i]);
    CHECK(max_abs_diff(back.values[i], ts.values[i]) == 0.0);
  }
}

TEST_CASE("csv errors") {
  std::istringstream bad("t,re_11,im_11\n0,1\n");
  CHECK_THROWS_WITH_AS(read_csv(bad), doctest::Contains("line 2"), ConfigError);
  std::istringstream nan("t,re_11,im_11\n0,x,0\n");
  CHECK_THROWS_AS(read_csv(nan), ConfigError);
  std::istringstream partial("t,re_11,im_11\n0,1,0\n");
  CHECK_NOTHROW(to_time_series(read_csv(partial)));
  std::istringstream wrong("t,re_12,im_12\n0,1,0\n");
  CHECK_THROWS_AS(to_time_series(read_csv(wrong)), ConfigError);
}

TEST_CASE("observable labels") {
  CHECK(Observable{0, 0}.label() == "11");
  CHECK(Observable{9, 0}.label() == "10_1");
  CHECK(all_elements(2).size() == 4u);
}

TEST_CASE("comparison against itself") {
  ModelSpec m;
  m.N = 5;
  const auto ts = exact_evolve(m, DensityMatrix::random(kHalf, 1), GridSpec{0.0, 3.0, 0.1});
  const auto rep = compare_series(ts, ts, all_elements(2));
  CHECK(rep.max_error == 0.0);
  CHECK(rep.horizon == ts.times.back());
  TimeSeries cut = ts;
  cut.times.resize(10);
  cut.values.resize(10);
  CHECK(compare_series(ts, cut, all_elements(2)).horizon == doctest::Approx(1.0));
  TimeSeries shifted = ts;
  shifted.times[3] += 0.01;
  CHECK_THROWS_AS(compare_series(ts, shifted, all_elements(2)), ConfigError);
}

TEST_CASE("power-law fit") {
  const auto f = fit_power_law({1, 2, 4, 8}, {3, 1.5, 0.75, 0.375});
  CHECK(f.exponent == doctest::Approx(-1.0));
  CHECK(f.prefactor == doctest::Approx(3.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_power_law({1}, {1}), ConfigError);
  CHECK_THROWS_AS(fit_power_law({2, 2}, {1, 3}), ConfigError);
  CHECK_THROWS_AS(fit_power_law({1, 2}, {0, 3}), ConfigError);
}

TEST_CASE("config parsing") {
  const Scenario s = parse(kBase);
  CHECK(s.name == "base");
  CHECK(s.model.N == 11);
  CHECK(s.methods.size() == 3u);
  CHECK(s.grid.t_end == 1.0);
  CHECK(s.selected_observables().size() == 3u);
  const Scenario m = parse(std::string(kBase) + "observables = 1,2 3,3\n[initial]\n");
  CHECK(m.observables == std::vector<Observable>{{0, 1}, {2, 2}});
  std::string commas = kBase;
  commas.replace(commas.find("EXACT NZ_P1 TCL_P1"), 18, "EXACT, NZ_P1,TCL_P1");
  const Scenario c = parse(commas);
  CHECK(c.methods == std::vector<Method>{Method::Exact, Method::NzP1, Method::TclP1});
}

TEST_CASE("config errors name the line") {
  CHECK(error_of(std::string(kBase) + "bogus = 1\n").find("test.ini:13:") != std::string::npos);
  CHECK(error_of("[model]\nN = 3\nN = 4\n[run]\nmethods = EXACT\n").find("test.ini:3: duplicate") != std::string::npos);
  CHECK(error_of("[nowhere]\n").find("test.ini:1:") != std::string::npos);
  CHECK(error_of("[model]\nbeta = hot\n").find("test.ini:2:") != std::string::npos);
  CHECK(error_of("[model]\nN = 3\n").find("methods is required") != std::string::npos);
  CHECK(error_of("[run]\nmethods =\n").find("test.ini:2: empty value") != std::string::npos);
  CHECK(error_of("[run]\nmethods = MAGIC\n").find("test.ini:2:") != std::string::npos);
}

TEST_CASE("incompatible methods are listed together") {
  const std::string e = error_of("[model]\nj1 = 2\nomega0 = 1\n[initial]\nstate = random 1\n[run]\nmethods = EXACT CLOSED_NZ2 APPENDIX_EXACT\n");
  CHECK(e.find("EXACT") != std::string::npos);
  CHECK(e.find("CLOSED_NZ2") != std::string::npos);
  CHECK(e.find("APPENDIX_EXACT") != std::string::npos);
  Scenario s = parse(kBase);
  s.methods = {Method::Oracle};
  s.model.N = 9;
  CHECK_THROWS_AS(s.validate(), GuardError);
  s.oracle_allow_large = true;
  CHECK_NOTHROW(s.validate());
  s.methods = {Method::Exact, Method::Exact};
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("initial states") {
  CHECK(InitialState::parse("basis -1").build(HalfInt(1)).matrix()(2, 2) == cplx{1.0});
  const auto x = InitialState::parse("plus_x").build(kHalf).matrix();
  CHECK(x(0, 1).real() == doctest::Approx(0.5));
  const auto r = InitialState::parse("matrix 0.5 0:0.5; 0:-0.5 0.5").build(kHalf).matrix();
  CHECK(r(0, 1) == cplx{0.0, 0.5});
  CHECK_THROWS_AS(InitialState::parse("matrix 1 0; 0 1").build(kHalf), ConfigError);
  CHECK_THROWS_AS(InitialState::parse("basis 2").build(HalfInt(1)), ConfigError);
  CHECK_THROWS_AS(InitialState::parse("thermal"), ConfigError);
  const auto a = InitialState::parse("random 4").build(HalfInt(2)), b = InitialState::parse("random 4").build(HalfInt(2));
  CHECK(max_abs_diff(a.matrix(), b.matrix()) == 0.0);
}

TEST_CASE("method names round trip") {
  for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("nz_p3"), ConfigError);
}

TEST_CASE("presets validate") {
  for (const auto& name : preset_names()) {
    const auto runs = preset(name);
    CHECK(!runs.empty());
    for (const auto& s : runs) CHECK_NOTHROW(s.validate());
  }
  const auto f4 = preset("fig4");
  REQUIRE(f4.size() == 1u);
  CHECK(f4[0].model.N == 101);
  CHECK(f4[0].model.beta == 0.25);
  CHECK(f4[0].methods == std::vector<Method>{Method::Exact, Method::TclP1, Method::NzP1});
  const auto f1 = preset("fig1");
  REQUIRE(f1.size() == 3u);
  CHECK(f1[2].model.N == 200);
  CHECK_THROWS_AS(preset("fig12"), ConfigError);
}

TEST_CASE("runs write deterministic files") {
  const fs::path d1 = fresh_dir("run1"), d2 = fresh_dir("run2");
  Scenario s = parse(kBase);
  s.output = d1.string();
  const RunResult r1 = run_scenario(s);
  s.output = d2.string();
  run_scenario(s);
  CHECK(r1.exit_code == 0);
  for (const char* f : {"base_EXACT_11.csv", "base_NZ_P1_22.csv", "base_TCL_P1_33.csv", "base_plot.gp", "base_summary.json"}) {
    REQUIRE(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  const TimeSeries back = to_time_series(read_csv_file((d1 / "base_EXACT_11.csv").string()));
  CHECK(back.times.size() == 21u);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("compare writes error curves") {
  const fs::path d = fresh_dir("compare");
  Scenario s = parse(kBase);
  s.output = d.string();
  const RunResult r = compare_scenario(s);
  REQUIRE(r.comparisons.size() == 3u);
  CHECK(r.comparisons[0].max_error == 0.0);
  CHECK(r.comparisons[0].horizon == 1.0);
  CHECK(fs::exists(d / "base_compare_NZ_P1.csv"));
  fs::remove_all(d);
}

TEST_CASE("empty method list writes nothing") {
  const fs::path d = fresh_dir("empty");
  CHECK_THROWS_AS(parse("[run]\nmethods =\noutput = " + d.string() + "\n"), ConfigError);
  CHECK(!fs::exists(d));
}

TEST_CASE("sweeps") {
  const fs::path d = fresh_dir("sweep");
  Scenario s = parse(std::string(kBase) + "[sweep]\nparam = A\nvalues = 1 2 4\n[compare]\nthreshold = 0.02\n");
  s.methods = {Method::Exact, Method::NzP1};
  s.grid = {0.0, 3.0, 0.002};
  s.output = d.string();
  const SweepResult r = sweep_scenario(s);
  REQUIRE(r.fitted.size() == 1u);
  REQUIRE(r.fitted[0]);
  CHECK(std::abs(r.fits[0].exponent + 1.0) <= 0.15);
  CHECK(fs::exists(r.csv_path));
  s.sweep_values = {2, 2};
  CHECK_THROWS_AS(sweep_scenario(s), ConfigError);
  s.sweep_values = {2};
  CHECK_THROWS_AS(sweep_scenario(s), ConfigError);
  fs::remove_all(d);
}

TEST_CASE("oracle check") {
  Scenario s = parse(kBase);
  s.model.N = 4;
  s.initial = InitialState::parse("random 2");
  s.methods = {Method::Oracle};
  s.grid = {0.0, 3.0, 0.1};
  const OracleCheck c = oracle_check(s);
  CHECK(c.passed());
  CHECK(c.reference == "EXACT");
}

}

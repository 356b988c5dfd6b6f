// spinstar: scenario runner for the spin-star model.
//
//   spinstar run <config>
//   spinstar compare <config>
//   spinstar sweep <config>
//   spinstar preset <name> --out <dir> [--compare]
//   spinstar oracle-check <config>
//
// Exit codes: 0 success, 1 config error, 2 numerical failure, 3 guard violation.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "spinstar/errors.hpp"
#include "spinstar/report.hpp"
#include "spinstar/scenario.hpp"

using namespace spinstar;

namespace {

void print_outcomes(const RunResult& r) {
  for (const auto& o : r.outcomes) {
    std::cout << to_string(o.method) << ": " << o.status;
    if (!o.message.empty()) std::cout << " (" << o.message << ")";
    std::cout << '\n';
  }
  for (const auto& c : r.comparisons)
    std::cout << c.method << " vs " << c.reference << ": max=" << format_double(c.max_error)
              << " mean=" << format_double(c.mean_error) << " t*=" << format_double(c.horizon) << '\n';
  std::cout << "summary: " << r.summary_path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-star central spin dynamics: exact solution, master equations, closed forms"};
  app.require_subcommand(1);

  std::string config, preset_name, out_dir = ".";
  bool preset_compare = false;
  auto* run = app.add_subcommand("run", "run every method of a scenario and write CSV + JSON summary");
  run->add_option("config", config, "scenario file")->required();
  auto* cmp = app.add_subcommand("compare", "run a scenario and compare each method with the reference");
  cmp->add_option("config", config, "scenario file")->required();
  auto* swp = app.add_subcommand("sweep", "validity horizon as a function of N, beta or A");
  swp->add_option("config", config, "scenario file")->required();
  auto* pre = app.add_subcommand("preset", "reproduce the data of one figure (fig1 ... fig11)");
  pre->add_option("name", preset_name, "preset name")->required();
  pre->add_option("--out", out_dir, "output directory")->required();
  pre->add_flag("--compare", preset_compare, "also compare against the reference method");
  auto* orc = app.add_subcommand("oracle-check", "exact solution vs full-space diagonalization");
  orc->add_option("config", config, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const RunResult r = run_scenario(load_config(config));
      print_outcomes(r);
      return r.exit_code;
    }
    if (*cmp) {
      const RunResult r = compare_scenario(load_config(config));
      print_outcomes(r);
      return r.exit_code;
    }
    if (*swp) {
      const SweepResult r = sweep_scenario(load_config(config));
      for (std::size_t k = 0; k < r.methods.size(); ++k) {
        std::cout << to_string(r.methods[k]) << ':';
        for (std::size_t v = 0; v < r.values.size(); ++v)
          std::cout << ' ' << r.param << '=' << format_double(r.values[v]) << " t*=" << format_double(r.horizons[k][v]);
        if (r.fitted[k]) std::cout << " exponent=" << format_double(r.fits[k].exponent);
        std::cout << '\n';
      }
      std::cout << "csv: " << r.csv_path << "\nsummary: " << r.summary_path << '\n';
      return 0;
    }
    if (*pre) {
      int code = 0;
      for (Scenario s : preset(preset_name)) {
        s.output = out_dir;
        const RunResult r = preset_compare ? compare_scenario(s) : run_scenario(s);
        std::cout << "[" << s.name << "]\n";
        print_outcomes(r);
        code = std::max(code, r.exit_code);
      }
      return code;
    }
    if (*orc) {
      const OracleCheck c = oracle_check(load_config(config));
      std::cout << c.reference << " vs ORACLE: max error " << format_double(c.max_error) << " (tolerance "
                << format_double(c.tolerance) << ") " << (c.passed() ? "PASS" : "FAIL") << '\n';
      return c.passed() ? 0 : 2;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

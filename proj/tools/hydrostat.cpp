// hydrostat command line: run, sweep, verify, fit.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hydrostat/harness/config.hpp"
#include "hydrostat/harness/snapshot.hpp"
#include "hydrostat/harness/sweep.hpp"
#include "hydrostat/solvers.hpp"
#include "hydrostat/verify.hpp"

namespace fs = std::filesystem;
using namespace hydrostat;

namespace {

int cmd_run(const std::string& config_path, const std::string& snapshot_out) {
  const SweepConfig cfg = load_config(config_path);
  const TrajectoryRecord rec = run_simulation(cfg.sim);
  std::printf("# system=%s eps=%g delta=%g dt=%g T=%g grid=%dx%dx%d\n", to_string(cfg.sim.system), cfg.sim.eps,
              cfg.sim.effective_delta(), cfg.sim.dt, cfg.sim.T, cfg.sim.nx, cfg.sim.ny, cfg.sim.nz);
  std::printf("time,l2\n");
  for (std::size_t i = 0; i < rec.times.size(); ++i)
    std::printf("%s,%s\n", format_double(rec.times[i]).c_str(), format_double(rec.l2[i]).c_str());
  if (rec.blowup_flag) std::printf("# blowup at t=%s\n", format_double(rec.blowup_time).c_str());
  if (!snapshot_out.empty()) {
    save_snapshot(rec.final_state, snapshot_out);
    std::printf("# snapshot written to %s\n", snapshot_out.c_str());
  }
  return rec.blowup_flag ? 3 : 0;
}

std::string describe_fits(const SweepResult& res) {
  std::ostringstream out;
  for (const auto& f : res.fits) {
    out << f.norm_name;
    if (f.gamma) out << " gamma=" << format_double(*f.gamma);
    if (f.eps) out << " eps=" << format_double(*f.eps);
    if (f.fit)
      out << " slope=" << format_double(f.fit->slope) << " intercept=" << format_double(f.fit->intercept)
          << " r2=" << format_double(f.fit->r2) << " points=" << f.fit->points;
    else
      out << " slope=n/a (fewer than 3 usable points)";
    out << '\n';
  }
  if (res.blowup_threshold) out << "blowup observed from " << format_double(*res.blowup_threshold) << '\n';
  return out.str();
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, bool plots) {
  const SweepConfig cfg = load_config(config_path);
  const SweepResult res = run_sweep(cfg);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_text((dir / "results.csv").string(), to_csv(res.rows));
  const std::string fits = describe_fits(res);
  write_text((dir / "fits.txt").string(), fits);
  if (plots) write_text((dir / "rates.svg").string(), render_svg(res));
  std::cout << fits;
  for (const auto& r : res.rows)
    if (r.norm_name == "FAILED") {
      std::cerr << "some sweep points failed; see results.csv\n";
      return 2;
    }
  return 0;
}

int cmd_verify(const std::string& suite) {
  const verify::Suite checks = verify::run_suite(suite);
  for (const auto& c : checks) std::printf("%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
  return verify::all_passed(checks) ? 0 : 1;
}

int cmd_fit(const std::string& csv_path, const std::string& norm) {
  std::ifstream in(csv_path);
  if (!in) throw Error("cannot open '" + csv_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::vector<SweepRow> all = parse_csv(ss.str());
  std::vector<SweepRow> rows;
  for (const auto& r : all)
    if (r.norm_name == norm) rows.push_back(r);
  if (rows.empty()) throw InsufficientData("no rows for norm '" + norm + "'");
  SweepResult res;
  res.mode = rows.front().mode;
  res.rows = rows;
  res.fits = fit_groups(res.mode, rows);
  std::cout << describe_fits(res);
  for (const auto& f : res.fits)
    if (!f.fit) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hydrostat: hydrostatic limit experiments on the periodic box"};
  app.require_subcommand(1);

  std::string config, snapshot_out, out_dir, suite = "all", csv, norm;
  bool plots = false;

  auto* run = app.add_subcommand("run", "integrate one system and print the L2 history");
  run->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--snapshot-out", snapshot_out, "write the final state here");

  auto* sweep = app.add_subcommand("sweep", "matched-pair parameter sweep with rate fits");
  sweep->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_flag("--plots", plots, "also render rates.svg");

  auto* ver = app.add_subcommand("verify", "run the built-in self checks");
  ver->add_option("--suite", suite, "check suite")->check(CLI::IsMember({"oracles", "invariants", "bootstrap", "all"}));

  auto* fit = app.add_subcommand("fit", "log-log rate fit from a sweep CSV");
  fit->add_option("--csv", csv, "results.csv")->required()->check(CLI::ExistingFile);
  fit->add_option("--norm", norm, "norm_name to fit")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, snapshot_out);
    if (*sweep) return cmd_sweep(config, out_dir, plots);
    if (*ver) return cmd_verify(suite);
    if (*fit) return cmd_fit(csv, norm);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

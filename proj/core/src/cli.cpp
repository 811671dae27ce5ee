#include "mab/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mab/experiments.hpp"
#include "mab/selftest.hpp"

namespace mab::cli {

namespace {

bool parse_m_list(const std::string& text, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      const double v = std::stod(item, &pos);
      if (pos != item.size()) return false;
      out.push_back(v);
    } catch (...) {
      return false;
    }
  }
  return !out.empty();
}

bool parse_level_range(const std::string& text, int& lo, int& hi) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoi(text);
    } else {
      lo = std::stoi(text.substr(0, dots));
      hi = std::stoi(text.substr(dots + 2));
    }
  } catch (...) {
    return false;
  }
  return true;
}

int validate(const RunConfig& cfg, std::ostream& err) {
  if (!(cfg.tol > 0.0 && cfg.tol <= 1e-2)) {
    err << "error: --tol must lie in (0, 1e-2]\n";
    return kRangeError;
  }
  if (cfg.level_lo < 0 || cfg.level_hi > 8 || cfg.level_lo > cfg.level_hi) {
    err << "error: levels must satisfy 0 <= lo <= hi <= 8\n";
    return kRangeError;
  }
  for (double m : cfg.m_values) {
    if (!(m >= 1.0 && m <= 128.0)) {
      err << "error: every m must lie in [1, 128]\n";
      return kRangeError;
    }
  }
  if (cfg.n_angles < 1 || cfg.n_angles > 4096) {
    err << "error: --angles must lie in [1, 4096]\n";
    return kRangeError;
  }
  if (cfg.n_a < 2 || cfg.n_a > 4097) {
    err << "error: --na must lie in [2, 4097]\n";
    return kRangeError;
  }
  if (cfg.problem != "quartic" && cfg.problem != "nonsmooth") {
    err << "error: --problem must be quartic or nonsmooth\n";
    return kRangeError;
  }
  return kOk;
}

}  // namespace

int parse_config(const std::vector<std::string>& args, RunConfig& cfg, std::ostream& err) {
  CLI::App app{"Monge-Ampere solver via the Hamilton-Jacobi-Bellman reformulation"};
  app.set_config("--config", "", "flat key=value configuration file");

  std::string m_text, levels_text;
  int level_single = -1;
  app.add_option("--problem", cfg.problem, "benchmark problem: quartic | nonsmooth");
  app.add_option("--level", level_single, "single refinement level");
  app.add_option("--levels", levels_text, "level range a..b");
  app.add_option("--m", m_text, "comma-separated stencil factors");
  app.add_option("--angles", cfg.n_angles, "number of stencil rotation angles");
  app.add_option("--na", cfg.n_a, "number of eigenvalue-split samples");
  app.add_option("--tol", cfg.tol, "Howard stopping tolerance (sup-norm step)");
  app.add_option("--out", cfg.out, "CSV output path");
  app.add_option("--solution-out", cfg.solution_out, "nodal solution dump path (x y u)");
  app.add_option("--mesh-out", cfg.mesh_out, "mesh dump path");
  app.add_option("--trace", cfg.trace, "Howard iteration trace CSV path");

  CLI::App* solve = app.add_subcommand("solve", "single solve at one level and stencil factor");
  CLI::App* study = app.add_subcommand("study", "convergence study over levels and factors");
  CLI::App* selftest = app.add_subcommand("selftest", "oracle and M-matrix verification suites");
  for (CLI::App* sub : {solve, study, selftest}) sub->fallthrough();
  app.require_subcommand(1);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    err << app.help();
    return kOk;
  } catch (const CLI::RequiredError& e) {
    err << "error: missing command (solve | study | selftest): " << e.what() << '\n';
    return kMissingCommand;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUnknownFlag;
  }

  if (solve->parsed()) cfg.command = Command::kSolve;
  if (study->parsed()) cfg.command = Command::kStudy;
  if (selftest->parsed()) cfg.command = Command::kSelftest;

  if (!m_text.empty() && !parse_m_list(m_text, cfg.m_values)) {
    err << "error: cannot parse --m list '" << m_text << "'\n";
    return kRangeError;
  }
  if (!levels_text.empty() && !parse_level_range(levels_text, cfg.level_lo, cfg.level_hi)) {
    err << "error: cannot parse --levels range '" << levels_text << "'\n";
    return kRangeError;
  }
  if (level_single >= 0) cfg.level_lo = cfg.level_hi = level_single;
  if (cfg.command == Command::kStudy && levels_text.empty() && level_single < 0) {
    cfg.level_lo = 0;
    cfg.level_hi = 3;
  }
  return validate(cfg, err);
}

namespace {

int run_solve(const RunConfig& cfg) {
  const ProblemSpec spec = cfg.problem == "quartic" ? quartic_problem() : nonsmooth_problem();
  const ControlGrid grid = build_control_grid(cfg.n_angles, cfg.n_a);
  const DomainGeometry geom;
  const Mesh mesh = benchmark_mesh(geom, cfg.level_lo);

  std::ofstream trace;
  HowardOptions hopts;
  hopts.tol = cfg.tol;
  if (!cfg.trace.empty()) {
    trace.open(cfg.trace);
    if (!trace) {
      std::cerr << "error: cannot open trace file " << cfg.trace << '\n';
      return kIoError;
    }
    trace.precision(10);
    hopts.trace = &trace;
  }

  StencilConfig scfg;
  scfg.m = cfg.m_values.front();
  const SolveReport report = howard_solve(mesh, grid, spec.f, spec.g, scfg, hopts);
  const ErrorNorms err = error_norms(mesh, report.u, spec);

  std::cout << "problem " << spec.name << ", level " << cfg.level_lo << ", m " << scfg.m << ": "
            << mesh.num_nodes() << " nodes, " << report.iterations << " iterations"
            << (report.converged ? "" : " (max_iter reached)") << '\n';
  if (report.monotonicity_violation > 1e-9)
    std::cerr << "warning: iterates increased by " << report.monotonicity_violation
              << "; the policy systems may be ill-conditioned\n";
  std::cout.precision(6);
  std::cout << "relative errors: l2 " << err.l2_rel << ", linf " << err.linf_rel << ", h1 "
            << err.h1_rel << '\n';

  const std::string sol_path = cfg.solution_out.empty() ? "solution.dat" : cfg.solution_out;
  {
    std::ofstream os(sol_path);
    if (!os) {
      std::cerr << "error: cannot open solution file " << sol_path << '\n';
      return kIoError;
    }
    os.precision(12);
    for (int i = 0; i < mesh.num_nodes(); ++i)
      os << mesh.node(i).x << ' ' << mesh.node(i).y << ' ' << report.u.values[i] << '\n';
  }

  const std::string csv_path = cfg.out.empty() ? "solve.csv" : cfg.out;
  {
    std::ofstream os(csv_path);
    if (!os) {
      std::cerr << "error: cannot open CSV file " << csv_path << '\n';
      return kIoError;
    }
    ErrorReport rep;
    StudyCell cell;
    cell.level = cfg.level_lo;
    cell.dofs = mesh.num_nodes();
    cell.m = scfg.m;
    cell.iterations = report.iterations;
    cell.converged = report.converged;
    cell.err = err;
    cell.seconds = report.wall_seconds;
    rep.cells.push_back(cell);
    write_report_csv(os, rep);
  }

  if (!cfg.mesh_out.empty()) {
    try {
      mesh.write_file(cfg.mesh_out);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kIoError;
    }
  }
  return report.converged ? kOk : kSolverError;
}

int run_study(const RunConfig& cfg) {
  const ProblemSpec spec = cfg.problem == "quartic" ? quartic_problem() : nonsmooth_problem();
  const ControlGrid grid = build_control_grid(cfg.n_angles, cfg.n_a);

  StudyOptions opts;
  opts.tol = cfg.tol;
  opts.progress = &std::cout;
  const ErrorReport report =
      convergence_study(spec, cfg.level_lo, cfg.level_hi, cfg.m_values, grid, opts);

  const std::string csv_path = cfg.out.empty() ? "study.csv" : cfg.out;
  std::ofstream os(csv_path);
  if (!os) {
    std::cerr << "error: cannot open CSV file " << csv_path << '\n';
    return kIoError;
  }
  write_report_csv(os, report);
  std::cout << "orders (best m per level): l2 " << report.order_l2 << ", linf "
            << report.order_linf << ", h1 " << report.order_h1 << '\n';

  if (!cfg.mesh_out.empty()) {
    try {
      benchmark_mesh(DomainGeometry(), cfg.level_lo).write_file(cfg.mesh_out);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kIoError;
    }
  }
  for (const auto& cell : report.cells)
    if (!cell.converged) return kSolverError;
  return kOk;
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    switch (cfg.command) {
      case Command::kSolve:
        return run_solve(cfg);
      case Command::kStudy:
        return run_study(cfg);
      case Command::kSelftest:
        return selftest::run_all(std::cout) ? kOk : 1;
      case Command::kNone:
        break;
    }
  } catch (const std::ios_base::failure&) {
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverError;
  }
  std::cerr << "error: no command\n";
  return kMissingCommand;
}

int main(int argc, const char* const* argv) {
  RunConfig cfg;
  std::vector<std::string> args(argv + 1, argv + argc);
  const int code = parse_config(args, cfg, std::cerr);
  if (code != kOk || cfg.command == Command::kNone) return code;
  return run(cfg);
}

}  // namespace mab::cli

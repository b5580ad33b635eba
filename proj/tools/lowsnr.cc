// lowsnr: generate instances, solve them, and compare the two solvers.
//
// Exit codes: 0 success, 1 runtime error, 2 infeasible instance (or the
// generator could not produce a feasible one), 3 solver did not converge,
// 64 usage error.
#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "lowsnr/analysis.h"
#include "lowsnr/formulation.h"
#include "lowsnr/oracle.h"
#include "lowsnr/pdsg.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace lowsnr;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kInfeasible = 2;
constexpr int kNotConverged = 3;
constexpr int kUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string output_dir = ".";
};

struct GenArgs {
  std::uint64_t seed = 0;
  int nodes = 4;
  double area = 10.0;
  int sessions = 1;
  int max_sinks = 3;
  std::string out;
};

struct SolverArgs {
  int max_iter = PdsgOptions{}.max_iter;
  double gap_tol = PdsgOptions{}.gap_tol;
  double time_limit = PdsgOptions{}.time_limit_s;
  std::uint64_t seed = 0;

  PdsgOptions pdsg() const {
    PdsgOptions o;
    o.max_iter = max_iter;
    o.gap_tol = gap_tol;
    o.time_limit_s = time_limit;
    o.seed = seed;
    return o;
  }
};

struct SolveArgs {
  std::string instance;
  std::string method = "pdsg";
  SolverArgs solver;
};

struct SweepArgs {
  std::vector<std::string> instances;
  std::vector<std::uint64_t> seeds;
  std::vector<int> nodes;
  int sessions = 2;
  double area = 10.0;
  int max_sinks = 3;
  SolverArgs solver;
};

void add_solver_flags(CLI::App* cmd, SolverArgs& a) {
  cmd->add_option("--max-iter", a.max_iter, "PDSG iteration limit")->check(CLI::PositiveNumber);
  cmd->add_option("--gap-tol", a.gap_tol, "PDSG relative gap target")->check(CLI::NonNegativeNumber);
  cmd->add_option("--time-limit", a.time_limit, "PDSG wall-clock limit in seconds, 0 for none")
      ->check(CLI::NonNegativeNumber);
}

fs::path output_path(const Common& c, const std::string& name) {
  fs::path p(name);
  if (p.is_relative()) p = fs::path(c.output_dir) / p;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// JSON has no infinity; unset values become null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json certificate_json(const FlowProgram& program, const FeasibilityResult& f) {
  Json rows = Json::array();
  for (int r : f.violated_rows) rows.push_back(program.row_name(r));
  return {{"feasible", f.feasible},
          {"phase1_violation", f.violation},
          {"violated_rows", rows},
          {"violating_sessions", f.violating_sessions}};
}

void emit(const Json& j, const fs::path* also = nullptr) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (also != nullptr) write_file(*also, text);
}

GeneratorOptions generator_options(std::uint64_t seed, int nodes, int sessions, double area,
                                   int max_sinks) {
  GeneratorOptions g;
  g.seed = seed;
  g.node_count = nodes;
  g.session_count = sessions;
  g.area_side = area;
  g.max_sinks = max_sinks;
  return g;
}

int run_gen(const Common& c, const GenArgs& a) {
  NetworkInstance inst;
  try {
    inst = generate_instance(generator_options(a.seed, a.nodes, a.sessions, a.area, a.max_sinks));
  } catch (const GenerationError& e) {
    std::cerr << e.what() << "\n";
    return kInfeasible;
  }
  const std::string name = a.out.empty() ? "instance-s" + std::to_string(a.seed) + "-n" +
                                               std::to_string(a.nodes) + ".json"
                                         : a.out;
  const fs::path path = output_path(c, name);
  write_instance(inst, path.string());
  const FlowProgram program = assemble_program(inst);
  emit({{"path", path.string()},
        {"nodes", inst.nodes.size()},
        {"sessions", inst.sessions.size()},
        {"sinks", inst.total_sinks()},
        {"hyperarcs", program.num_hyperarcs()},
        {"certificate", certificate_json(program, check_feasibility(program))}});
  return kOk;
}

int report_infeasible(const fs::path& summary, Json j, const FlowProgram& program) {
  j["status"] = "infeasible";
  j["certificate"] = certificate_json(program, check_feasibility(program));
  emit(j, &summary);
  return kInfeasible;
}

int run_solve(const Common& c, const SolveArgs& a) {
  const NetworkInstance inst = read_instance(a.instance);
  const std::string stem = fs::path(a.instance).stem().string();
  const fs::path summary = output_path(c, stem + "." + a.method + ".json");
  Json j = {{"instance", a.instance}, {"method", a.method}};

  FlowProgram program;
  try {
    program = assemble_program(inst);
  } catch (const UnreachableSinkError& e) {
    j["status"] = "infeasible";
    j["error"] = e.what();
    emit(j, &summary);
    return kInfeasible;
  }

  if (a.method == "oracle") {
    const OracleSolution sol = solve_exact(program);
    if (sol.status == LpStatus::kInfeasible) return report_infeasible(summary, j, program);
    j["status"] = lp_status_name(sol.status);
    j["objective"] = sol.primal_objective;
    j["dual_bound"] = sol.dual_objective;
    j["gap"] = relative_gap(sol);
    j["max_residual"] = max_row_violation(program, sol.x);
    j["iterations"] = sol.iterations;
    j["powers"] = std::vector<double>(sol.x.begin() + program.index.power(0),
                                      sol.x.begin() + program.index.power(0) + program.num_hyperarcs());
    emit(j, &summary);
    return kOk;
  }

  if (!check_feasibility(program).feasible) return report_infeasible(summary, j, program);
  const SolveReport rep = solve_pdsg(program, a.solver.pdsg());
  const fs::path trace = output_path(c, stem + ".pdsg-trace.csv");
  {
    std::ofstream out(trace, std::ios::binary);
    write_trace_csv(out, rep.trace);
  }
  j["status"] = pdsg_status_name(rep.status);
  j["objective"] = number(rep.objective);
  j["dual_bound"] = rep.dual_bound;
  j["gap"] = number(rep.gap);
  j["max_residual"] = rep.max_residual;
  j["iterations"] = rep.iterations;
  j["restarts"] = rep.restarts;
  j["powers"] = rep.powers();
  j["trace"] = trace.string();
  j["seconds"] = rep.seconds;
  emit(j, &summary);
  return rep.status == PdsgStatus::kConverged ? kOk : kNotConverged;
}

struct Cell {
  std::string label;
  NetworkInstance instance;
};

std::vector<Cell> sweep_cells(const SweepArgs& a) {
  if (a.instances.empty() && (a.seeds.empty() || a.nodes.empty())) {
    throw UsageError("empty sweep: give instance files or both --seeds and --nodes");
  }
  if (a.seeds.empty() != a.nodes.empty()) {
    throw UsageError("--seeds and --nodes must be given together");
  }
  std::vector<Cell> cells;
  for (const std::string& path : a.instances) {
    cells.push_back({fs::path(path).stem().string(), read_instance(path)});
  }
  for (int n : a.nodes) {
    for (std::uint64_t s : a.seeds) {
      cells.push_back({"s" + std::to_string(s) + "-n" + std::to_string(n),
                       generate_instance(generator_options(s, n, a.sessions, a.area, a.max_sinks))});
    }
  }
  return cells;
}

Json run_comparisons(const Common& c, const SweepArgs& a) {
  const std::vector<Cell> cells = sweep_cells(a);
  CompareOptions opt;
  opt.pdsg = a.solver.pdsg();
  std::vector<ComparisonRow> rows;
  std::vector<std::vector<TraceRow>> traces;
  std::vector<std::string> labels;
  for (const Cell& cell : cells) {
    Comparison cmp = compare_methods(cell.instance, opt, cell.label);
    std::ofstream out(output_path(c, "trace-" + cell.label + ".csv"), std::ios::binary);
    write_trace_csv(out, cmp.trace);
    rows.push_back(cmp.row);
    traces.push_back(std::move(cmp.trace));
    labels.push_back(cell.label);
  }
  const fs::path csv = output_path(c, "comparison.csv");
  {
    std::ofstream out(csv, std::ios::binary);
    write_comparison_csv(out, rows);
  }
  const fs::path svg = output_path(c, "gap.svg");
  write_file(svg, gap_chart_svg(traces, labels));

  double worst = 0.0;
  int converged = 0;
  for (const ComparisonRow& r : rows) {
    worst = std::max(worst, std::abs(r.relative_gap));
    converged += r.pdsg_status == PdsgStatus::kConverged;
  }
  return {{"rows", rows.size()},
          {"converged", converged},
          {"max_abs_relative_gap", number(worst)},
          {"comparison_csv", csv.string()},
          {"gap_svg", svg.string()}};
}

int run_compare(const Common& c, const SweepArgs& a) {
  emit(run_comparisons(c, a));
  return kOk;
}

int run_report(const Common& c, const SweepArgs& a) {
  Json j = run_comparisons(c, a);

  std::vector<double> xs;
  for (int e = -24; e <= 0; ++e) xs.push_back(std::pow(10.0, e / 4.0));
  const ApproximationReport lin = linearity_sweep(xs);
  const fs::path lin_csv = output_path(c, "linearity.csv");
  {
    std::ofstream out(lin_csv, std::ios::binary);
    write_approximation_csv(out, lin);
  }
  const fs::path err_svg = output_path(c, "error.svg");
  write_file(err_svg, error_chart_svg(lin));

  const InterferenceReport mac = interference_sweep(xs);
  const fs::path mac_csv = output_path(c, "interference.csv");
  {
    std::ofstream out(mac_csv, std::ios::binary);
    write_interference_csv(out, mac);
  }
  int outside = 0;
  for (const ApproximationRow& r : lin.rows) outside += r.out_of_regime;

  j["linearity_csv"] = lin_csv.string();
  j["error_svg"] = err_svg.string();
  j["interference_csv"] = mac_csv.string();
  j["regime_threshold"] = lin.regime_threshold;
  j["rows_outside_regime"] = outside;
  j["max_linearity_error"] = lin.max_relative_error;
  j["max_interference_step_one_error"] = mac.max_step_one_error;
  emit(j);
  return kOk;
}

void add_sweep_flags(CLI::App* cmd, SweepArgs& a) {
  cmd->add_option("instances", a.instances, "Instance files")->check(CLI::ExistingFile);
  cmd->add_option("--seeds", a.seeds, "Generator seeds")->delimiter(',');
  cmd->add_option("--nodes", a.nodes, "Node counts")->delimiter(',')->check(CLI::Range(2, 100000));
  cmd->add_option("--sessions", a.sessions, "Sessions per generated instance")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--area", a.area, "Side of the square area")->check(CLI::PositiveNumber);
  cmd->add_option("--max-sinks", a.max_sinks, "Sinks per session at most")
      ->check(CLI::PositiveNumber);
  add_solver_flags(cmd, a.solver);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-power network-coded multicast in low-SNR wireless networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--output-dir", common.output_dir, "Directory for output files")
      ->envname("LOWSNR_OUTPUT_DIR");

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a feasible random instance");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--nodes", gen.nodes, "Number of nodes (at least 2)")
      ->check(CLI::Range(2, 100000));
  gen_cmd->add_option("--area", gen.area, "Side of the square area")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--sessions", gen.sessions, "Number of multicast sessions")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--max-sinks", gen.max_sinks, "Sinks per session at most")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", gen.out, "Instance file, relative to the output directory");

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one instance");
  solve_cmd->add_option("instance", solve.instance, "Instance file")
      ->required()
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--method", solve.method, "pdsg or oracle")
      ->check(CLI::IsMember({"pdsg", "oracle"}));
  solve_cmd->add_option("--seed", solve.solver.seed, "PDSG seed");
  add_solver_flags(solve_cmd, solve.solver);

  SweepArgs compare;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Run both solvers on instance files or a seeded sweep");
  add_sweep_flags(compare_cmd, compare);

  SweepArgs report;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "compare, plus accuracy tables and charts for the linear capacity model");
  add_sweep_flags(report_cmd, report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return run_gen(common, gen);
    if (*solve_cmd) return run_solve(common, solve);
    if (*compare_cmd) return run_compare(common, compare);
    if (*report_cmd) return run_report(common, report);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const GenerationError& e) {
    std::cerr << e.what() << "\n";
    return kInfeasible;
  } catch (const OracleFailure& e) {
    std::cerr << e.what() << "\n";
    return e.status() == LpStatus::kInfeasible ? kInfeasible : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsage;
}

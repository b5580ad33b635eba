#include "lowsnr/oracle.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace lowsnr {

double relative_gap(const OracleSolution& sol) {
  return std::abs(sol.primal_objective - sol.dual_objective) /
         std::max(1.0, std::abs(sol.primal_objective));
}

OracleSolution solve_exact(const FlowProgram& program, const IpmOptions& options) {
  OracleSolution sol = solve_lp(program.lp, options);
  switch (sol.status) {
    case LpStatus::kOptimal:
      if (sol.max_primal_residual > kOracleResidualTolerance ||
          relative_gap(sol) > kOracleGapTolerance) {
        throw std::logic_error("solve_exact: optimality certificate out of tolerance");
      }
      return sol;
    case LpStatus::kInfeasible:
      return sol;
    case LpStatus::kUnbounded:
      throw std::logic_error("solve_exact: flow program reported unbounded");
    case LpStatus::kNumericalFailure:
      break;
  }
  throw std::logic_error("solve_exact: interior point method failed to converge");
}

namespace {

// Relative width of the band around the feasibility boundary in which the
// phase-1 program can be too degenerate for the interior point method.
constexpr double kBoundaryBand = 1e-3;
constexpr double kPreciseFloor = IpmOptions{}.objective_floor;
constexpr double kAbsoluteFloor = 1.0;

struct PhaseOne {
  LpSolution sol;
  std::vector<int> elastic_rows;
};

// Phase-1 program with every node budget scaled by `budget_factor`.
PhaseOne solve_phase_one(const FlowProgram& program, double budget_factor,
                         double objective_floor) {
  PhaseOne out;
  LinearProgram phase1 = program.lp;
  std::fill(phase1.cost.begin(), phase1.cost.end(), 0.0);
  if (budget_factor != 1.0) {
    const VariableIndex& ix = program.index;
    for (int h = 0; h < program.num_hyperarcs(); ++h) {
      const double budget = program.nodes[program.hyperarc_node[h]].power_budget;
      phase1.upper[ix.power(h)] =
          std::min(budget_factor * budget, phase1.upper[ix.z(h)] / program.hyperarcs[h].gamma);
    }
  }
  for (int r = 0; r < phase1.num_rows(); ++r) {
    const RowKind kind = program.row_kind[r];
    if (kind != RowKind::kCapacity && kind != RowKind::kBudget) continue;
    if (kind == RowKind::kBudget) phase1.rows[r].rhs *= budget_factor;
    phase1.rows[r].cols.push_back(phase1.add_column(1.0, kInfinity));
    phase1.rows[r].vals.push_back(1.0);
    out.elastic_rows.push_back(r);
  }
  IpmOptions options;
  options.objective_floor = objective_floor;
  out.sol = solve_lp(phase1, options);
  return out;
}

bool solved(const PhaseOne& p) { return p.sol.status == LpStatus::kOptimal; }

}  // namespace

FeasibilityResult check_feasibility(const FlowProgram& program) {
  PhaseOne run = solve_phase_one(program, 1.0, kPreciseFloor);
  // A tiny positive optimum can stall the relative gap; measure it absolutely.
  if (!solved(run)) run = solve_phase_one(program, 1.0, kAbsoluteFloor);
  if (!solved(run)) {
    // Near the boundary the elastic program is degenerate. Decide on budgets
    // moved off the boundary: feasible if a tightened program is, infeasible
    // otherwise (a relaxed program that is still infeasible gives the
    // certificate).
    PhaseOne tight = solve_phase_one(program, 1.0 - kBoundaryBand, kAbsoluteFloor);
    if (solved(tight) && tight.sol.primal_objective <= kFeasibilityTolerance) {
      FeasibilityResult res;
      res.feasible = true;
      res.violation = std::max(0.0, tight.sol.primal_objective);
      return res;
    }
    PhaseOne relaxed = solve_phase_one(program, 1.0 + kBoundaryBand, kAbsoluteFloor);
    if (solved(relaxed) && relaxed.sol.primal_objective > kFeasibilityTolerance) {
      run = std::move(relaxed);
    } else if (solved(tight)) {
      run = std::move(tight);
    } else {
      throw std::logic_error("check_feasibility: phase-1 program did not solve");
    }
  }
  const LpSolution& sol = run.sol;
  const std::vector<int>& elastic_rows = run.elastic_rows;

  FeasibilityResult res;
  res.violation = std::max(0.0, sol.primal_objective);
  res.feasible = res.violation <= kFeasibilityTolerance;
  if (res.feasible) return res;

  const auto& ix = program.index;
  std::set<int> sessions;
  const double slack_tol = kFeasibilityTolerance / std::max<std::size_t>(1, elastic_rows.size());
  const double use_tol = 1e-9;
  for (std::size_t k = 0; k < elastic_rows.size(); ++k) {
    const int r = elastic_rows[k];
    const double slack = sol.x[program.lp.num_cols() + static_cast<int>(k)];
    if (slack <= slack_tol) continue;
    res.violated_rows.push_back(r);
    std::vector<int> hs;
    if (program.row_kind[r] == RowKind::kCapacity) {
      hs.push_back(r - program.capacity_begin);
    } else {
      const int v = r - program.budget_begin;
      for (int h = 0; h < program.num_hyperarcs(); ++h) {
        if (program.hyperarc_node[h] == v) hs.push_back(h);
      }
    }
    for (int h : hs) {
      for (int m = 0; m < program.num_sessions(); ++m) {
        if (sol.x[ix.y(h, m)] > use_tol) sessions.insert(program.sessions[m].id);
      }
    }
  }
  res.violating_sessions.assign(sessions.begin(), sessions.end());
  return res;
}

}  // namespace lowsnr

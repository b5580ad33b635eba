// Decentralized primal-dual subgradient method for the flow program.
//
// The coding, aggregate, capacity and budget rows are dualized; the flow
// polytopes F_c (conservation, arc-sum coupling, boxes) stay primal. For a
// dual point d = (lambda, nu, mu, zeta) the dual function separates over
// hyperarcs:
//
//   g(d) = sum_h q_h(d) - sum_i zeta_i P_i
//
// where q_h collects the minimized Lagrangian terms of hyperarc h: its share
// of the commodity flows (each commodity routes its demand along a shortest
// path whose arc (i,l) costs the smallest lambda over the hyperarcs of i that
// reach l) and the box minimizers of y, z and P.
//
// The iteration is dual averaging on the saddle function over (primal,
// dual): subgradients are accumulated in s and the next pair is the
// projection of (center - s / theta) onto the primal set and the capped dual
// box. With StepRule::kSqrtGrowth theta grows as theta_hat sqrt(k + 1); the
// default kExtrapolated keeps theta constant and takes each subgradient at a
// look-ahead prox point. Runs restart from the averages, rebalancing the
// primal/dual step ratio. Primal iterates are repaired into feasible points
// (y = max over sinks, z = sum of y, P = z / gamma) to measure an honest
// duality gap.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lowsnr/formulation.h"

namespace lowsnr {

// Multipliers of the dualized rows written in their natural form
//   coding     y - x >= 0           lambda >= 0 (one per coding row)
//   aggregate  z - sum_m y = 0      nu free
//   capacity   gamma P - z >= 0     mu >= 0
//   budget     P_i - sum_k P >= 0   zeta >= 0
struct DualPoint {
  std::vector<double> lambda;  // program coding-row order
  std::vector<double> nu;      // per hyperarc
  std::vector<double> mu;      // per hyperarc
  std::vector<double> zeta;    // per node (program node order)
};

DualPoint zero_dual(const FlowProgram& program);

// Multipliers on the program's stored (normalized) rows, zero on the
// conservation and arc-sum rows, and back.
std::vector<double> to_row_multipliers(const FlowProgram& program, const DualPoint& dual);
DualPoint from_row_multipliers(const FlowProgram& program, std::span<const double> rows);

// Cheapest way to ship each commodity's demand under arc costs
// min_{h of i containing l} lambda[h, c].
struct ShortestPaths {
  std::vector<double> cost;                  // per commodity, per unit of flow
  std::vector<std::vector<int>> hyperarcs;   // per commodity, hyperarcs on the path
  std::vector<std::vector<int>> receivers;   // parallel: receiver position within J_h
};

ShortestPaths route_commodities(const FlowProgram& program, const DualPoint& dual);

struct SubproblemResult {
  double value = 0.0;      // q_h
  std::vector<double> x;   // per commodity, flow on h
  std::vector<double> y;   // per session
  double z = 0.0;
  double power = 0.0;
};

// Exact minimizer of hyperarc h's block of the Lagrangian. Each y, z, P
// coordinate sits at a box end chosen by the sign of its reduced cost (the
// lower end on a tie); x comes from the shortest-path routing.
SubproblemResult eval_subproblem(const FlowProgram& program, int h, const DualPoint& dual,
                                 const ShortestPaths& paths);

enum class Execution { kSerial, kParallel };

struct DualEvaluation {
  double value = 0.0;             // g(d)
  std::vector<double> q;          // per hyperarc
  std::vector<double> minimizer;  // program column order
};

// Evaluates every subproblem and sums the values in hyperarc order, so the
// serial and parallel results are bit-identical.
DualEvaluation evaluate_dual(const FlowProgram& program, const DualPoint& dual,
                             Execution execution = Execution::kSerial);

// ---------------------------------------------------------------------------
// Flow projection.

// Warm-start data for repeated projections of one commodity.
struct ProjectionWarmStart {
  std::vector<double> potential;  // per node
};

struct ProjectionStats {
  int newton_steps = 0;
  double residual = 0.0;  // max conservation violation
};

// Euclidean projection of commodity c's flow block (program column layout,
// length index.flow_block_size()) onto {conservation, arc-sum coupling,
// 0 <= v <= R}. Solved by semismooth Newton on the node potentials; each
// hyperarc's coupling multiplier is found exactly by a breakpoint search.
ProjectionStats project_flows(const FlowProgram& program, int c, std::span<const double> raw,
                              std::span<double> out, ProjectionWarmStart* warm = nullptr);

// ---------------------------------------------------------------------------
// Iteration.

enum class StepRule {
  kSqrtGrowth,    // theta_k = theta_hat sqrt(k + 1), subgradient at the iterate
  kExtrapolated,  // constant theta, subgradient at an extragradient point
};

struct PdsgOptions {
  int max_iter = 200000;
  double gap_tol = 1e-2;         // relative duality gap
  std::uint64_t seed = 0;        // initial dual prox center
  double time_limit_s = 50.0;    // wall clock, 0 disables
  StepRule step_rule = StepRule::kExtrapolated;
  double theta_hat = 0.0;        // 0: tuned (operator norm, or first subgradient norm)
  double primal_weight = 0.0;    // omega; 0: balanced automatically at restarts
  double dual_cap_factor = 10.0;
  bool restart = true;           // restart from the averages on gap progress
  bool record_trace = true;
  Execution execution = Execution::kParallel;
};

struct TraceRow {
  int iter = 0;
  double dual_value = 0.0;    // best lower bound so far
  double primal_value = 0.0;  // best feasible objective so far (inf before one is found)
  double gap = 0.0;           // relative gap of the two
  double max_residual = 0.0;  // row violation of the best primal point
  std::int64_t wallclock_ns = 0;
};

enum class PdsgStatus { kConverged, kIterationLimit, kTimeLimit };
const char* pdsg_status_name(PdsgStatus status);

struct SolveReport {
  PdsgStatus status = PdsgStatus::kIterationLimit;
  double objective = 0.0;     // best feasible primal objective
  double dual_bound = 0.0;    // best dual value
  double gap = 0.0;           // relative
  double max_residual = 0.0;
  int iterations = 0;
  int restarts = 0;
  double seconds = 0.0;
  std::vector<double> primal;  // best feasible point, program column order
  DualPoint dual;              // dual point achieving dual_bound
  std::vector<TraceRow> trace;

  // Per-hyperarc optimal power and rate gamma * P of the best point (empty
  // when none was found).
  std::vector<double> powers() const;
  std::vector<double> rates(const FlowProgram& program) const;
};

// Dual-averaging state in the solver's scaled coordinates: primal columns are
// divided by their box bounds, rows are renormalized, and the objective is
// divided by a lower bound on the optimum.
struct IterationState {
  int k = 0;                      // iterations in the current epoch
  std::vector<double> s;          // aggregated subgradients, primal then dual
  double S = 0.0;                 // aggregated weights
  double theta = 0.0;
  std::vector<double> primal;     // current point
  std::vector<double> dual;
  std::vector<double> primal_center;
  std::vector<double> dual_center;
  std::vector<double> primal_avg;
  std::vector<double> dual_avg;
  double best_primal = 0.0;
  double best_dual = 0.0;
  double best_gap = 0.0;
};

// s += sigma * g, S += sigma.
void accumulate_subgradient(IterationState& state, std::span<const double> g, double sigma);

class PdsgSolver {
 public:
  PdsgSolver(const FlowProgram& program, const PdsgOptions& options = {});
  ~PdsgSolver();
  PdsgSolver(const PdsgSolver&) = delete;
  PdsgSolver& operator=(const PdsgSolver&) = delete;

  const IterationState& state() const;
  // Best budget-feasible point so far in program units; empty until found.
  const std::vector<double>& best_point() const;

  // Saddle-function subgradient (primal gradient, then minus the dual
  // gradient) at a scaled point.
  std::vector<double> subgradient(std::span<const double> primal,
                                  std::span<const double> dual) const;

  // Maps between program units and the solver's scaled coordinates.
  std::vector<double> scale_primal(std::span<const double> values) const;
  std::vector<double> unscale_primal(std::span<const double> scaled) const;
  std::vector<double> scale_dual(const DualPoint& dual) const;
  DualPoint unscale_dual(std::span<const double> scaled) const;

  // Projection of a scaled pair onto the primal set and the dual box.
  void project(std::span<double> primal, std::span<double> dual);

  // One dual-averaging step followed by gap bookkeeping.
  void iterate();

  // Runs to convergence or a limit.
  SolveReport solve();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SolveReport solve_pdsg(const FlowProgram& program, const PdsgOptions& options = {});

// Trace CSV: iter,dual_value,primal_value,gap,max_residual,wallclock_ns.
void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

// ---------------------------------------------------------------------------
// Constraint qualification.

struct SlaterResult {
  bool holds = false;
  double min_slack = 0.0;            // optimal common slack (normalized rows)
  std::vector<int> blocking_rows;    // inequality rows that cannot be strict
};

// Maximizes t subject to every coding, capacity and budget row holding with
// slack >= t (t <= 1) over the rest of the program; Slater's condition holds
// iff the optimum is positive.
SlaterResult slater_check(const FlowProgram& program);

// Largest violation of the program's rows and boxes at `values`, on the
// normalized rows.
double max_row_violation(const FlowProgram& program, std::span<const double> values);
double max_conservation_violation(const FlowProgram& program, std::span<const double> values);

}  // namespace lowsnr

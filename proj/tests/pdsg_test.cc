#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "lowsnr/oracle.h"
#include "lowsnr/pdsg.h"
#include "lagrangian_oracle.h"
#include "test_instances.h"

namespace lowsnr {
namespace {

using testing::assemble_butterfly;
using testing::butterfly;
using testing::single_link;
using testing::single_link_optimum;

FlowProgram seeded_program(std::uint64_t seed, int nodes, int sessions) {
  GeneratorOptions opt;
  opt.seed = seed;
  opt.node_count = nodes;
  opt.session_count = sessions;
  return assemble_program(generate_instance(opt));
}

// Three nodes on a line with forward hyperarcs only: the flow polytope of the
// 0 -> 2 session is a single point.
FlowProgram line_program(double demand) {
  NetworkInstance inst;
  inst.nodes = {{0, {0, 0}, 10.0}, {1, {1, 0}, 10.0}, {2, {2, 0}, 10.0}};
  inst.sessions = {{0, 0, {2}, demand}};
  const std::vector<Hyperarc> hs = {{0, {1}, 1.0}, {1, {2}, 1.0}};
  return assemble_program(inst, hs, build_arc_graph(hs));
}

std::vector<double> flow_block(const FlowProgram& p, int c, std::span<const double> values) {
  const auto first = values.begin() + p.index.flow_block_start(c);
  return {first, first + p.index.flow_block_size()};
}

// ---------------------------------------------------------------------------
// Subproblem.

TEST(EvalSubproblem, ZeroDualGivesZeroPowerAndValue) {
  const FlowProgram p = seeded_program(3, 5, 2);
  const DualPoint d = zero_dual(p);
  const ShortestPaths paths = route_commodities(p, d);
  for (int h = 0; h < p.num_hyperarcs(); ++h) {
    const SubproblemResult r = eval_subproblem(p, h, d, paths);
    EXPECT_EQ(r.power, 0.0);
    EXPECT_EQ(r.value, 0.0);
  }
  EXPECT_EQ(evaluate_dual(p, d).value, 0.0);
}

TEST(EvalSubproblem, PowerAtUpperBoxWhenCapacityPriceDominates) {
  const FlowProgram p = assemble_program(single_link(2.0, 0.5));
  DualPoint d = zero_dual(p);
  d.mu[0] = 2.0 / p.hyperarcs[0].gamma;  // mu gamma = 2 > 1 + zeta
  const SubproblemResult r = eval_subproblem(p, 0, d, route_commodities(p, d));
  EXPECT_EQ(r.power, p.lp.upper[p.index.power(0)]);
  EXPECT_NEAR(r.value, (1.0 - 2.0) * r.power, 1e-15);
}

TEST(EvalSubproblem, ZeroReducedCostTiesToLowerEndpoint) {
  const auto bf = butterfly();
  const FlowProgram p = assemble_butterfly(bf, CodingSemantics::kMax);
  DualPoint d = zero_dual(p);
  const int h = bf.bottleneck;
  ASSERT_EQ(p.hyperarcs[h].gamma, 1.0);
  d.mu[h] = 1.0;  // 1 + zeta - mu gamma = 0
  d.nu[h] = 1.0;  // mu - nu = 0
  const SubproblemResult r = eval_subproblem(p, h, d, route_commodities(p, d));
  EXPECT_EQ(r.power, 0.0);
  EXPECT_EQ(r.z, 0.0);
  EXPECT_EQ(r.value, 0.0);
}

DualPoint random_dual(const FlowProgram& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 2.0), free(-1.0, 1.0);
  DualPoint d = zero_dual(p);
  for (double& v : d.lambda) v = pos(rng);
  for (double& v : d.nu) v = free(rng);
  for (double& v : d.mu) v = pos(rng);
  for (double& v : d.zeta) v = pos(rng);
  return d;
}

TEST(EvaluateDual, MatchesWholeLagrangianAtRandomDuals) {
  for (CodingSemantics coding : {CodingSemantics::kMax, CodingSemantics::kSum}) {
    GeneratorOptions g;
    g.seed = 11;
    g.node_count = 6;
    g.session_count = 2;
    AssemblyOptions a;
    a.coding = coding;
    const FlowProgram p = assemble_program(generate_instance(g), a);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const DualPoint d = random_dual(p, rng);
      const DualEvaluation ev = evaluate_dual(p, d);
      const double expected = testing::whole_lagrangian(p, d);
      EXPECT_NEAR(ev.value, expected, 1e-9 * std::max(1.0, std::abs(expected)));
      double q = 0.0;
      for (double v : ev.q) q += v;
      for (int i = 0; i < p.num_nodes(); ++i) q -= d.zeta[i] * p.nodes[i].power_budget;
      EXPECT_EQ(q, ev.value);
    }
  }
}

TEST(EvaluateDual, SerialAndParallelAreBitIdentical) {
  const FlowProgram p = seeded_program(4, 9, 3);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const DualPoint d = random_dual(p, rng);
    const DualEvaluation a = evaluate_dual(p, d, Execution::kSerial);
    const DualEvaluation b = evaluate_dual(p, d, Execution::kParallel);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.q, b.q);
    EXPECT_EQ(a.minimizer, b.minimizer);
  }
}

TEST(EvaluateDual, OracleMultipliersAttainTheOptimum) {
  const FlowProgram p = seeded_program(2, 5, 2);
  const OracleSolution sol = solve_exact(p);
  const DualPoint d = from_row_multipliers(p, sol.dual);
  EXPECT_NEAR(evaluate_dual(p, d).value, sol.primal_objective, 1e-7 * sol.primal_objective);
}

// ---------------------------------------------------------------------------
// Flow projection.

TEST(ProjectFlows, FeasiblePointIsUnchanged) {
  const FlowProgram p = seeded_program(6, 5, 2);
  const OracleSolution sol = solve_exact(p);
  for (int c = 0; c < p.num_commodities(); ++c) {
    const std::vector<double> block = flow_block(p, c, sol.x);
    std::vector<double> out(block.size());
    const ProjectionStats stats = project_flows(p, c, block, out);
    EXPECT_LE(stats.residual, 1e-9);
    for (std::size_t j = 0; j < block.size(); ++j) EXPECT_NEAR(out[j], block[j], 1e-7);
  }
}

// Dykstra's alternating projections between {A v = b} and the box.
std::vector<double> dykstra_projection(const FlowProgram& p, int c, std::vector<double> start) {
  const int first = p.index.flow_block_start(c);
  const int n = p.index.flow_block_size();
  std::vector<int> rows;
  for (int v = 0; v < p.num_nodes(); ++v) rows.push_back(p.conservation_row(c, v));
  for (int h = 0; h < p.num_hyperarcs(); ++h) rows.push_back(p.arcsum_row(h, c));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), n);
  Eigen::VectorXd b(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const LpRow& row = p.lp.rows[rows[i]];
    for (std::size_t k = 0; k < row.cols.size(); ++k) A(i, row.cols[k] - first) = row.vals[k];
    b[i] = row.rhs;
  }
  const Eigen::MatrixXd pinv = A.completeOrthogonalDecomposition().pseudoInverse();
  const double R = p.commodities[c].demand;
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(start.data(), n);
  Eigen::VectorXd pa = Eigen::VectorXd::Zero(n), pb = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < 200000; ++it) {
    const Eigen::VectorXd u = x + pa;
    const Eigen::VectorXd y = u - pinv * (A * u - b);
    pa = u - y;
    const Eigen::VectorXd w = y + pb;
    const Eigen::VectorXd next = w.cwiseMax(0.0).cwiseMin(R);
    pb = w - next;
    const double change = (next - x).lpNorm<Eigen::Infinity>();
    x = next;
    if (change < 1e-14 && it > 100) break;
  }
  return {x.data(), x.data() + n};
}

TEST(ProjectFlows, ZeroVectorMatchesDykstraOracle) {
  const FlowProgram p = seeded_program(8, 4, 1);
  for (int c = 0; c < p.num_commodities(); ++c) {
    const std::vector<double> zero(p.index.flow_block_size(), 0.0);
    std::vector<double> out(zero.size());
    project_flows(p, c, zero, out);
    const std::vector<double> expected = dykstra_projection(p, c, zero);
    for (std::size_t j = 0; j < zero.size(); ++j) EXPECT_NEAR(out[j], expected[j], 1e-6);
  }
}

TEST(ProjectFlows, RandomPointsMatchDykstraOracle) {
  const FlowProgram p = seeded_program(12, 4, 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int c = 0; c < p.num_commodities(); ++c) {
    std::vector<double> raw(p.index.flow_block_size());
    for (double& v : raw) v = u(rng) * p.commodities[c].demand;
    std::vector<double> out(raw.size());
    project_flows(p, c, raw, out);
    const std::vector<double> expected = dykstra_projection(p, c, raw);
    for (std::size_t j = 0; j < raw.size(); ++j) EXPECT_NEAR(out[j], expected[j], 1e-6);
  }
}

TEST(ProjectFlows, SinglePathIsTheUniqueFlow) {
  const FlowProgram p = line_program(0.75);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> raw(p.index.flow_block_size());
    for (double& v : raw) v = u(rng);
    std::vector<double> out(raw.size());
    project_flows(p, 0, raw, out);
    for (double v : out) EXPECT_NEAR(v, 0.75, 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Iteration.

TEST(Iteration, ConstantSubgradientAccumulatesLinearly) {
  IterationState st;
  const std::vector<double> g = {1.5, -2.0, 0.25};
  st.s.assign(g.size(), 0.0);
  for (int k = 1; k <= 7; ++k) {
    accumulate_subgradient(st, g, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(st.s[i], k * g[i]);
    EXPECT_EQ(st.S, k);
  }
}

TEST(Iteration, SaddlePointHasVanishingInteriorSubgradients) {
  const FlowProgram p = seeded_program(5, 4, 2);
  const OracleSolution sol = solve_exact(p);
  PdsgOptions opt;
  opt.execution = Execution::kSerial;
  PdsgSolver solver(p, opt);
  std::vector<double> primal = solver.scale_primal(sol.x);
  std::vector<double> dual = solver.scale_dual(from_row_multipliers(p, sol.dual));
  const std::vector<double> g = solver.subgradient(primal, dual);
  const int n = static_cast<int>(primal.size());
  const int flows = p.num_commodities() * p.index.flow_block_size();
  int interior = 0;
  for (int j = flows; j < n; ++j) {
    if (primal[j] > 1e-4 && primal[j] < 1.0 - 1e-4) {
      EXPECT_NEAR(g[j], 0.0, 1e-5) << p.column_name(j);
      ++interior;
    }
  }
  for (std::size_t r = 0; r < dual.size(); ++r) {
    const bool budget = p.row_kind[r] == RowKind::kBudget;  // tightened inside the solver
    if (!budget && (dual[r] > 1e-6 || p.lp.rows[r].sense == RowSense::kEqual)) {
      EXPECT_NEAR(g[n + r], 0.0, 1e-6) << p.row_name(static_cast<int>(r));
    }
  }
  EXPECT_GT(interior, 0);
  // The optimal primal point is its own projection.
  const std::vector<double> before = primal;
  std::vector<double> dual_copy = dual;
  solver.project(primal, dual_copy);
  for (int j = 0; j < n; ++j) EXPECT_NEAR(primal[j], before[j], 1e-7) << p.column_name(j);
}

TEST(Iteration, StateInvariantsWithinAnEpoch) {
  for (StepRule rule : {StepRule::kSqrtGrowth, StepRule::kExtrapolated}) {
    const FlowProgram p = seeded_program(7, 5, 2);
    PdsgOptions opt;
    opt.step_rule = rule;
    opt.restart = false;
    opt.execution = Execution::kSerial;
    PdsgSolver solver(p, opt);
    double S = 0.0, theta = 0.0;
    for (int k = 1; k <= 50; ++k) {
      solver.iterate();
      EXPECT_GT(solver.state().S, S);
      EXPECT_GE(solver.state().theta, theta);
      EXPECT_EQ(solver.state().k, k);
      S = solver.state().S;
      theta = solver.state().theta;
    }
  }
}

TEST(Iteration, SingleLinkGapWithinOnePercentIn5000Iterations) {
  const double expected = single_link_optimum(1.5, 0.3, 2.0, 1.0);
  const FlowProgram p = assemble_program(single_link(1.5, 0.3));
  PdsgOptions opt;
  opt.execution = Execution::kSerial;
  PdsgSolver solver(p, opt);
  int k = 0;
  while (k < 5000 && solver.state().best_gap > 1e-2) {
    solver.iterate();
    ++k;
  }
  EXPECT_LE(solver.state().best_primal - solver.state().best_dual, 1e-2 * expected);
}

TEST(Iteration, ReportedPointsStayFeasible) {
  const FlowProgram p = seeded_program(9, 6, 2);
  PdsgOptions opt;
  opt.execution = Execution::kSerial;
  PdsgSolver solver(p, opt);
  for (int k = 0; k < 300; ++k) {
    solver.iterate();
    const std::vector<double>& x = solver.best_point();
    if (x.empty()) continue;
    EXPECT_LE(max_conservation_violation(p, x), 1e-8);
    EXPECT_LE(max_row_violation(p, x), 1e-9);
  }
  EXPECT_FALSE(solver.best_point().empty());
}

// ---------------------------------------------------------------------------
// Solve.

TEST(SolvePdsg, SingleLinkMatchesAnalyticOptimum) {
  for (StepRule rule : {StepRule::kExtrapolated, StepRule::kSqrtGrowth}) {
    const double expected = single_link_optimum(2.0, 0.4, 2.0, 1.0);
    PdsgOptions opt;
    opt.gap_tol = 1e-3;
    opt.step_rule = rule;
    opt.time_limit_s = 0.0;
    const SolveReport rep = solve_pdsg(assemble_program(single_link(2.0, 0.4)), opt);
    EXPECT_EQ(rep.status, PdsgStatus::kConverged);
    EXPECT_NEAR(rep.objective, expected, 1e-3 * expected);
    EXPECT_LE(rep.dual_bound, expected + 1e-9);
  }
}

TEST(SolvePdsg, ZeroSessionsConvergeImmediately) {
  NetworkInstance inst = single_link(1.0, 1.0);
  inst.sessions.clear();
  const FlowProgram p = assemble_program(inst);
  const SolveReport rep = solve_pdsg(p);
  EXPECT_EQ(rep.status, PdsgStatus::kConverged);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_EQ(rep.gap, 0.0);
  EXPECT_EQ(rep.objective, 0.0);
  for (double v : rep.primal) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(rep.powers().size(), 2u);
}

TEST(SolvePdsg, FourNodeInstanceWithinOnePercentOfOracle) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const FlowProgram p = seeded_program(seed, 4, 2);
    const double exact = solve_exact(p).primal_objective;
    const SolveReport rep = solve_pdsg(p);
    EXPECT_EQ(rep.status, PdsgStatus::kConverged);
    EXPECT_NEAR(rep.objective, exact, 1e-2 * exact) << "seed " << seed;
    EXPECT_LE(rep.dual_bound, exact * (1.0 + 1e-9));
  }
}

TEST(SolvePdsg, TraceIsMonotoneAndBracketsTheOptimum) {
  const FlowProgram p = seeded_program(14, 6, 2);
  const double exact = solve_exact(p).primal_objective;
  PdsgOptions opt;
  opt.gap_tol = 1e-3;
  opt.max_iter = 2000;
  const SolveReport rep = solve_pdsg(p, opt);
  ASSERT_FALSE(rep.trace.empty());
  double gap = std::numeric_limits<double>::infinity();
  for (const TraceRow& row : rep.trace) {
    EXPECT_LE(row.dual_value, exact + 1e-9 * exact);
    EXPECT_GE(row.primal_value, exact - 1e-9 * exact);
    EXPECT_LE(row.dual_value, row.primal_value + 1e-9);
    EXPECT_GE(row.gap, 0.0);
    EXPECT_LE(row.gap, gap);
    gap = row.gap;
  }
}

void expect_same_trace(const SolveReport& a, const SolveReport& b) {
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].dual_value, b.trace[i].dual_value);
    EXPECT_EQ(a.trace[i].primal_value, b.trace[i].primal_value);
    EXPECT_EQ(a.trace[i].gap, b.trace[i].gap);
    EXPECT_EQ(a.trace[i].max_residual, b.trace[i].max_residual);
  }
  EXPECT_EQ(a.primal, b.primal);
}

TEST(SolvePdsg, SerialAndParallelAreBitIdentical) {
  const FlowProgram p = seeded_program(10, 8, 3);
  PdsgOptions opt;
  opt.max_iter = 150;
  opt.gap_tol = 0.0;
  opt.time_limit_s = 0.0;
  opt.execution = Execution::kSerial;
  const SolveReport serial = solve_pdsg(p, opt);
  opt.execution = Execution::kParallel;
  const SolveReport parallel = solve_pdsg(p, opt);
  expect_same_trace(serial, parallel);
}

TEST(SolvePdsg, SameSeedReproducesTheRun) {
  const FlowProgram p = seeded_program(13, 6, 2);
  PdsgOptions opt;
  opt.max_iter = 150;
  opt.gap_tol = 0.0;
  opt.time_limit_s = 0.0;
  opt.seed = 42;
  expect_same_trace(solve_pdsg(p, opt), solve_pdsg(p, opt));
}

TEST(SolvePdsg, IterationLimitIsReported) {
  const FlowProgram p = seeded_program(13, 6, 2);
  PdsgOptions opt;
  opt.max_iter = 3;
  opt.gap_tol = 0.0;
  const SolveReport rep = solve_pdsg(p, opt);
  EXPECT_EQ(rep.status, PdsgStatus::kIterationLimit);
  EXPECT_EQ(rep.iterations, 3);
  EXPECT_EQ(rep.trace.size(), 3u);
}

TEST(TraceCsv, HeaderAndRows) {
  std::vector<TraceRow> rows(2);
  rows[0] = {1, 0.5, 2.0, 0.75, 1e-12, 100};
  rows[1] = {2, 0.25, std::numeric_limits<double>::infinity(), 0.0, 0.0, 200};
  std::ostringstream out;
  write_trace_csv(out, rows);
  EXPECT_EQ(out.str(),
            "iter,dual_value,primal_value,gap,max_residual,wallclock_ns\n"
            "1,0.5,2,0.75,9.9999999999999998e-13,100\n"
            "2,0.25,inf,0,0,200\n");
}

// ---------------------------------------------------------------------------
// Constraint qualification.

TEST(SlaterCheck, GeneratedInstancesHold) {
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    const SlaterResult r = slater_check(seeded_program(seed, 5, 2));
    EXPECT_TRUE(r.holds) << "seed " << seed;
    EXPECT_GT(r.min_slack, 0.0);
  }
}

TEST(SlaterCheck, SaturatedLinkFails) {
  const double budget = 2.0, dist = 1.5;
  const double demand = budget * link_gamma(dist, 2.0, 1.0);
  const FlowProgram p = assemble_program(single_link(dist, demand, 2.0, 1.0, budget));
  const SlaterResult r = slater_check(p);
  EXPECT_FALSE(r.holds);
  EXPECT_FALSE(r.blocking_rows.empty());
}

TEST(SlaterCheck, ZeroDemandHolds) {
  NetworkInstance inst = single_link(1.0, 1.0);
  inst.sessions.clear();
  EXPECT_TRUE(slater_check(assemble_program(inst)).holds);
}

}  // namespace
}  // namespace lowsnr

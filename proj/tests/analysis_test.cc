#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lowsnr/analysis.h"
#include "lowsnr/oracle.h"
#include "test_instances.h"

namespace lowsnr {
namespace {

// Alternating series for 1 - ln(1+x)/x, accurate to x^6 for small x.
double linearity_series(double x) {
  return x / 2 - x * x / 3 + x * x * x / 4 - x * x * x * x / 5 + std::pow(x, 5) / 6;
}

TEST(LinearityError, MatchesSeriesInLowSnrRegime) {
  for (double x : {1e-5, 1e-4, 1e-3}) {
    const ApproximationRow r = linearity_error(x, 1.0, 2.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(r.snr_per_dof, x);
    EXPECT_NEAR(r.relative_error, linearity_series(x), 1e-12);
    EXPECT_FALSE(r.out_of_regime);
  }
  EXPECT_NEAR(linearity_error(1e-3, 1.0, 2.0, 1.0, 1.0).relative_error, 4.9966691647e-4, 1e-14);
}

TEST(LinearityError, ClosedFormAtUnitSnr) {
  const ApproximationRow r = linearity_error(1.0, 1.0, 2.0, 1.0, 1.0);
  EXPECT_NEAR(r.relative_error, 1.0 - std::log(2.0), 1e-15);
  EXPECT_TRUE(r.out_of_regime);
}

TEST(LinearityError, VanishesInTheLimit) {
  EXPECT_LT(linearity_error(1e-12, 1.0, 2.0, 1.0, 1.0).relative_error, 1e-11);
}

TEST(LinearityError, UsesDistanceBandwidthAndNoise) {
  // P = 0.02, D = 2, alpha = 3, N0 = 0.5, W = 4: x = 0.02 / (4 * 8 * 0.5).
  const ApproximationRow r = linearity_error(0.02, 2.0, 3.0, 0.5, 4.0);
  EXPECT_DOUBLE_EQ(r.snr_per_dof, 0.02 / 16.0);
  EXPECT_DOUBLE_EQ(r.linear_rate, 0.02 / 4.0);
  EXPECT_DOUBLE_EQ(r.exact_rate, 4.0 * std::log1p(0.02 / 16.0));
}

TEST(LinearityError, SweepIsOrderedAndBoundedByLinearRate) {
  std::vector<double> xs;
  for (int e = -80; e <= 10; ++e) xs.push_back(std::pow(10.0, e / 10.0));
  const ApproximationReport rep = linearity_sweep(xs);
  ASSERT_EQ(rep.rows.size(), xs.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    EXPECT_GE(rep.rows[i].linear_rate, rep.rows[i].exact_rate);
    EXPECT_GE(rep.rows[i].relative_error, 0.0);
    if (i > 0) EXPECT_GT(rep.rows[i].relative_error, rep.rows[i - 1].relative_error);
    EXPECT_EQ(rep.rows[i].out_of_regime, xs[i] > kLowSnrThreshold);
  }
  EXPECT_DOUBLE_EQ(rep.max_relative_error, rep.rows.back().relative_error);
}

NetworkInstance two_transmitters(double power) { return two_transmitter_instance(power); }

TEST(InterferenceError, SingleTransmitterHasNoStepOneError) {
  const NetworkInstance inst = two_transmitters(1e-3);
  const std::vector<NodeId> u = {0};
  const InterferenceReport rep = interference_error(inst, u, 2);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].exact_rate, rep.rows[0].interference_free_rate);
  EXPECT_EQ(rep.rows[0].step_one_error, 0.0);
}

TEST(InterferenceError, TwoWeakTransmittersBarelyInterfere) {
  const double P = 1e-6;
  const NetworkInstance inst = two_transmitters(P);
  const std::vector<NodeId> u = {0, 1};
  const InterferenceReport rep = interference_error(inst, u, 2);
  ASSERT_EQ(rep.rows.size(), 2u);
  const double exact = std::log1p(P / (1.0 + P));
  const double free = std::log1p(P);
  for (const InterferenceRow& r : rep.rows) {
    EXPECT_NEAR(r.snr_per_dof, P, 1e-20);
    EXPECT_NEAR(r.step_one_error, (free - exact) / free, 1e-12);
    EXPECT_NEAR(r.step_one_error, 1e-6, 1e-8);
    EXPECT_LE(r.step_one_error, 2e-6);
    EXPECT_FALSE(r.out_of_regime);
  }
}

TEST(InterferenceError, StrongTransmittersAreFlagged) {
  const NetworkInstance inst = two_transmitters(1.0);
  const std::vector<NodeId> u = {0, 1};
  const InterferenceReport rep = interference_error(inst, u, 2);
  for (const InterferenceRow& r : rep.rows) {
    EXPECT_TRUE(r.out_of_regime);
    EXPECT_GT(r.step_one_error, 0.1);
    EXPECT_NEAR(r.total_error, 1.0 - std::log1p(0.5), 1e-12);
  }
  const InterferenceReport weak = interference_error(two_transmitters(1e-3), u, 2);
  EXPECT_GT(rep.max_total_error, weak.max_total_error);
}

TEST(InterferenceError, SweepCollectsBothTransmitters) {
  const std::vector<double> powers = {1e-6, 1e-3, 1.0};
  const InterferenceReport rep = interference_sweep(powers);
  ASSERT_EQ(rep.rows.size(), 6u);
  EXPECT_NEAR(rep.rows[0].snr_per_dof, 1e-6, 1e-20);
  EXPECT_TRUE(rep.rows[5].out_of_regime);
  EXPECT_DOUBLE_EQ(rep.max_total_error, rep.rows[5].total_error);
}

TEST(InterferenceError, RejectsBadSets) {
  const NetworkInstance inst = two_transmitters(1.0);
  const std::vector<NodeId> none, self = {0, 2}, unknown = {7};
  EXPECT_THROW(interference_error(inst, none, 2), std::invalid_argument);
  EXPECT_THROW(interference_error(inst, self, 2), std::invalid_argument);
  EXPECT_THROW(interference_error(inst, unknown, 2), std::invalid_argument);
}

TEST(InterferenceCsv, HeaderNotesTheNoiseConvention) {
  const std::vector<NodeId> u = {0, 1};
  std::ostringstream out;
  write_interference_csv(out, interference_error(two_transmitters(1e-6), u, 2));
  std::istringstream in(out.str());
  std::string comment, header;
  std::getline(in, comment);
  std::getline(in, header);
  EXPECT_EQ(comment.rfind("# ", 0), 0u);
  EXPECT_NE(comment.find("N0"), std::string::npos);
  EXPECT_EQ(header.rfind("transmitter,receiver,", 0), 0u);
}

GeneratorOptions seeded(std::uint64_t seed, int nodes, int sessions) {
  GeneratorOptions g;
  g.seed = seed;
  g.node_count = nodes;
  g.session_count = sessions;
  return g;
}

TEST(CompareMethods, FourNodeInstanceAgrees) {
  const NetworkInstance inst = generate_instance(seeded(1, 4, 2));
  const Comparison cmp = compare_methods(inst, {}, "seed1");
  const ComparisonRow& r = cmp.row;
  EXPECT_EQ(r.label, "seed1");
  EXPECT_EQ(r.node_count, 4);
  EXPECT_EQ(r.session_count, 2);
  EXPECT_EQ(r.pdsg_status, PdsgStatus::kConverged);
  EXPECT_GE(r.relative_gap, -1e-9);
  EXPECT_LE(r.relative_gap, 1e-2);
  EXPECT_NEAR(r.oracle_objective, solve_exact(assemble_program(inst)).primal_objective, 1e-12);
  EXPECT_EQ(cmp.trace.size(), static_cast<std::size_t>(r.iterations));
}

TEST(CompareMethods, ZeroSessionsGiveZeroObjectives) {
  NetworkInstance inst = generate_instance(seeded(2, 5, 1));
  inst.sessions.clear();
  const ComparisonRow r = compare_methods(inst).row;
  EXPECT_EQ(r.oracle_objective, 0.0);
  EXPECT_EQ(r.pdsg_objective, 0.0);
  EXPECT_EQ(r.relative_gap, 0.0);
}

TEST(CompareMethods, OracleObjectiveGrowsWithSessions) {
  for (std::uint64_t seed : {3, 4, 5}) {
    const NetworkInstance full = generate_instance(seeded(seed, 8, 3));
    double previous = 0.0;
    for (std::size_t k = 1; k <= full.sessions.size(); ++k) {
      NetworkInstance part = full;
      part.sessions.resize(k);
      const double value = solve_exact(assemble_program(part)).primal_objective;
      EXPECT_GE(value, previous * (1.0 - 1e-9)) << "seed " << seed << " sessions " << k;
      previous = value;
    }
  }
}

TEST(CompareMethods, InfeasibleInstanceThrows) {
  const NetworkInstance inst = testing::single_link(1.0, 50.0, 2.0, 1.0, 1.0);
  EXPECT_THROW(compare_methods(inst), OracleFailure);
}

TEST(ComparisonCsv, DeterministicColumnsFirst) {
  ComparisonRow r;
  r.label = "a";
  r.node_count = 4;
  r.session_count = 1;
  r.oracle_objective = 1.5;
  r.pdsg_objective = 1.5;
  r.iterations = 10;
  std::ostringstream out;
  const std::vector<ComparisonRow> rows = {r};
  write_comparison_csv(out, rows);
  EXPECT_EQ(out.str(),
            "label,node_count,session_count,oracle_objective,pdsg_objective,relative_gap,"
            "pdsg_gap,iterations,pdsg_status,oracle_seconds,pdsg_seconds\n"
            "a,4,1,1.5,1.5,0,0,10,converged,0,0\n");
}

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (std::size_t at = s.find(what); at != std::string::npos; at = s.find(what, at + 1)) ++n;
  return n;
}

TEST(Charts, LineChartIsStandaloneSvg) {
  Series a{"a & b", {1, 2, 3}, {1, 4, 9}}, b{"b", {1, 2}, {2, -1}};
  ChartOptions opt;
  opt.title = "t";
  opt.log_y = true;
  const std::vector<Series> both = {a, b};
  const std::string svg = line_chart_svg(both, opt);
  EXPECT_EQ(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  EXPECT_NE(svg.find("a &amp; b"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
}

TEST(Charts, GapAndErrorCharts) {
  std::vector<TraceRow> trace = {{1, 0.0, 2.0, 1.0, 0.0, 0},
                                 {2, 1.0, 1.5, 0.33, 0.0, 0},
                                 {3, 1.2, 1.3, 0.07, 0.0, 0}};
  const std::vector<std::vector<TraceRow>> traces = {trace};
  const std::vector<std::string> names = {"seed 1"};
  const std::string gap = gap_chart_svg(traces, names);
  EXPECT_NE(gap.find("seed 1"), std::string::npos);
  EXPECT_EQ(count(gap, "<polyline"), 1u);
  const std::vector<double> xs = {1e-5, 1e-3, 1e-1};
  const std::string err = error_chart_svg(linearity_sweep(xs));
  EXPECT_EQ(count(err, "<polyline"), 2u);
  EXPECT_NE(err.find("1e-5"), std::string::npos);
}

}  // namespace
}  // namespace lowsnr

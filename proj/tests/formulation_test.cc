#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "lowsnr/formulation.h"
#include "lowsnr/rng.h"
#include "test_instances.h"

namespace lowsnr {
namespace {

using testing::butterfly;
using testing::single_link;

NetworkInstance random_instance(Rng& rng) {
  GeneratorOptions opt;
  opt.seed = rng.below(1u << 30);
  opt.node_count = 2 + static_cast<int>(rng.below(6));
  opt.session_count = static_cast<int>(rng.below(4));
  NetworkInstance inst;
  // Skip the generator's feasibility loop: budgets do not matter here.
  Rng place = rng.split(1);
  for (int i = 0; i < opt.node_count; ++i) {
    inst.nodes.push_back({i, {place.uniform(0, 10), place.uniform(0, 10)}, 1.0});
  }
  for (int m = 0; m < opt.session_count; ++m) {
    Session s{m, static_cast<NodeId>(rng.below(opt.node_count)), {}, rng.uniform(0.1, 1.0)};
    for (int v = 0; v < opt.node_count; ++v) {
      if (v != s.source && (s.receivers.empty() || rng.below(2) == 0)) s.receivers.push_back(v);
    }
    inst.sessions.push_back(s);
  }
  return inst;
}

TEST(ArcGraph, NestedChainOwnership) {
  const std::vector<Hyperarc> hs = {{0, {1}, 1.0}, {0, {1, 2}, 0.25}};
  const ArcGraph g = build_arc_graph(hs);
  ASSERT_EQ(g.arcs.size(), 2u);
  const int a1 = g.find(0, 1), a2 = g.find(0, 2);
  ASSERT_GE(a1, 0);
  ASSERT_GE(a2, 0);
  EXPECT_EQ(g.arcs[a1].owners, (std::vector<int>{0, 1}));
  EXPECT_EQ(g.arcs[a2].owners, (std::vector<int>{1}));
  EXPECT_EQ(g.find(1, 0), -1);
}

TEST(ArcGraph, ReachLimitOneIsNearestNeighborDigraph) {
  NetworkInstance inst;
  inst.reach_limit = 1;
  inst.nodes = {{0, {0, 0}, 1}, {1, {1, 0}, 1}, {2, {5, 0}, 1}, {3, {7, 0}, 1}};
  const auto hs = decompose_broadcast(inst);
  const ArcGraph g = build_arc_graph(hs);
  ASSERT_EQ(g.arcs.size(), 4u);
  EXPECT_GE(g.find(0, 1), 0);
  EXPECT_GE(g.find(1, 0), 0);
  EXPECT_GE(g.find(2, 3), 0);
  EXPECT_GE(g.find(3, 2), 0);
}

TEST(ArcGraph, EmptyHyperarcList) {
  EXPECT_TRUE(build_arc_graph(std::vector<Hyperarc>{}).arcs.empty());
}

TEST(ArcGraph, OwnersFormSuffixOfChain) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    NetworkInstance inst = random_instance(rng);
    inst.reach_limit = 1 + static_cast<int>(rng.below(inst.nodes.size()));
    const auto hs = decompose_broadcast(inst);
    const ArcGraph g = build_arc_graph(hs);
    for (const auto& arc : g.arcs) {
      std::vector<int> chain;
      for (int h = 0; h < static_cast<int>(hs.size()); ++h) {
        if (hs[h].sender == arc.tail) chain.push_back(h);
      }
      ASSERT_FALSE(arc.owners.empty());
      EXPECT_TRUE(std::equal(arc.owners.begin(), arc.owners.end(),
                             chain.end() - static_cast<long>(arc.owners.size())));
    }
  }
}

TEST(AssembleProgram, CountingIdentity) {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const NetworkInstance inst = random_instance(rng);
    for (auto coding : {CodingSemantics::kMax, CodingSemantics::kSum}) {
      AssemblyOptions opt;
      opt.coding = coding;
      const FlowProgram p = assemble_program(inst, opt);
      const long H = static_cast<long>(decompose_broadcast(inst).size());
      long B = 0;
      for (const auto& h : p.hyperarcs) B += static_cast<long>(h.receivers.size());
      const long M = static_cast<long>(inst.sessions.size());
      const long C = inst.total_sinks();
      const long N = static_cast<long>(inst.nodes.size());
      EXPECT_EQ(p.lp.num_cols(), C * (H + B) + H * M + 2 * H);
      const long coding_rows = coding == CodingSemantics::kMax ? H * C : H * M;
      EXPECT_EQ(p.lp.num_rows(), coding_rows + H * C + 2 * H + N + N * C);
      EXPECT_EQ(static_cast<long>(p.row_kind.size()), p.lp.num_rows());
    }
  }
}

TEST(AssembleProgram, RowPatternsMatchKinds) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const FlowProgram p = assemble_program(random_instance(rng));
    const auto& ix = p.index;
    for (int r = 0; r < p.lp.num_rows(); ++r) {
      const LpRow& row = p.lp.rows[r];
      switch (p.row_kind[r]) {
        case RowKind::kCoding:
          ASSERT_EQ(row.cols.size(), 2u);
          EXPECT_EQ(row.vals, (std::vector<double>{1.0, -1.0}));
          EXPECT_GE(row.cols[0], ix.y(0, 0));
          EXPECT_LT(row.cols[1], ix.y(0, 0));
          EXPECT_EQ(row.sense, RowSense::kGreaterEqual);
          break;
        case RowKind::kCapacity:
          EXPECT_EQ(row.sense, RowSense::kGreaterEqual);
          EXPECT_EQ(row.cols.size(), 2u);
          break;
        case RowKind::kBudget:
          EXPECT_EQ(row.sense, RowSense::kGreaterEqual);
          EXPECT_LT(row.rhs, 0.0);
          break;
        default:
          EXPECT_EQ(row.sense, RowSense::kEqual);
      }
      double norm = 0.0;
      for (double v : row.vals) norm = std::max(norm, std::abs(v));
      if (!row.vals.empty()) EXPECT_DOUBLE_EQ(norm, 1.0);
    }
  }
}

TEST(AssembleProgram, ConservationRowsCancelPerCommodity) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const FlowProgram p = assemble_program(random_instance(rng));
    for (int c = 0; c < p.num_commodities(); ++c) {
      std::map<int, double> sum;
      double rhs = 0.0;
      auto accumulate = [&](int r) {
        const LpRow& row = p.lp.rows[r];
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
          sum[row.cols[k]] += row.vals[k] * p.row_scale[r];
        }
        rhs += row.rhs * p.row_scale[r];
      };
      for (int v = 0; v < p.num_nodes(); ++v) accumulate(p.conservation_row(c, v));
      for (int h = 0; h < p.num_hyperarcs(); ++h) {
        // The arc-sum rows enter with a minus sign: x - sum f = 0.
        const LpRow& row = p.lp.rows[p.arcsum_row(h, c)];
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
          sum[row.cols[k]] -= row.vals[k] * p.row_scale[p.arcsum_row(h, c)];
        }
      }
      for (const auto& [col, v] : sum) EXPECT_EQ(v, 0.0) << p.column_name(col);
      EXPECT_EQ(rhs, 0.0);
    }
  }
}

TEST(AssembleProgram, ConservationSupplyConvention) {
  const FlowProgram p = assemble_program(single_link(2.0, 0.3));
  ASSERT_EQ(p.num_commodities(), 1);
  EXPECT_DOUBLE_EQ(p.supply(0, 0), 0.3);
  EXPECT_DOUBLE_EQ(p.supply(0, 1), -0.3);
  EXPECT_DOUBLE_EQ(p.lp.rows[p.conservation_row(0, 0)].rhs, 0.3);
}

TEST(AssembleProgram, RejectsUnreachableSink) {
  const auto bf = butterfly();
  NetworkInstance inst = bf.instance;
  inst.sessions = {{4, 5, {0}, 1.0}};  // t1 -> s: t1 has no hyperarc
  try {
    assemble_program(inst, bf.hyperarcs, build_arc_graph(bf.hyperarcs));
    FAIL() << "expected UnreachableSinkError";
  } catch (const UnreachableSinkError& e) {
    EXPECT_EQ(e.session_id(), 4);
    EXPECT_EQ(e.sink(), 0);
  }
}

TEST(AssembleProgram, ObjectiveIsTotalPower) {
  const FlowProgram p = assemble_program(single_link(1.0, 0.5));
  for (int j = 0; j < p.lp.num_cols(); ++j) {
    const bool is_power = j >= p.index.power(0);
    EXPECT_EQ(p.lp.cost[j], is_power ? 1.0 : 0.0);
  }
}

TEST(AssembleProgram, ZeroSessions) {
  NetworkInstance inst = single_link(1.0, 1.0);
  inst.sessions.clear();
  const FlowProgram p = assemble_program(inst);
  EXPECT_EQ(p.num_commodities(), 0);
  EXPECT_EQ(p.lp.num_cols(), 4);
  EXPECT_EQ(p.lp.num_rows(), 2 + 2 + 2);
}

TEST(LpExport, DeterministicNames) {
  const auto bf = butterfly();
  const FlowProgram p = testing::assemble_butterfly(bf, CodingSemantics::kMax);
  const std::string text = export_lp_text(p);
  EXPECT_EQ(text, export_lp_text(p));
  EXPECT_NE(text.find("Minimize"), std::string::npos);
  EXPECT_NE(text.find("Subject To"), std::string::npos);
  EXPECT_NE(text.find("P_0_1"), std::string::npos);
  EXPECT_NE(text.find("x_0_5_3_1"), std::string::npos);
  EXPECT_NE(text.find("f_0_6_4_1_6"), std::string::npos);
  EXPECT_NE(text.find("y_0_2_1"), std::string::npos);
  EXPECT_NE(text.find("capacity_3_1:"), std::string::npos);
  EXPECT_NE(text.find("End\n"), std::string::npos);
  for (int j = 0; j < p.lp.num_cols(); ++j) {
    for (int k = j + 1; k < p.lp.num_cols(); ++k) ASSERT_NE(p.column_name(j), p.column_name(k));
  }
}

}  // namespace
}  // namespace lowsnr

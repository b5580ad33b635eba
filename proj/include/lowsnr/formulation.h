// Min-cost multicommodity flow program for network-coded multicast over a
// hypergraph of broadcast hyperarcs.
//
// One commodity per (session m, sink t). For hyperarc h = (i, J) and
// commodity c the program carries
//   x[h,c]      flow sent by i on h for sink t of session m,
//   f[h,l,c]    the part of x[h,c] handed to receiver l in J,
// and per hyperarc y[h,m] (coded session rate), z[h] (total rate), P[h]
// (transmit power). The flow arriving at l over arc (i,l) is the sum of
// f[h,l,c] over every hyperarc of i that contains l.
//
// Rows (inequalities are stored in >= form, every row is divided by the
// largest magnitude of its coefficients):
//   coding        y[h,m] - x[h,c] >= 0                  per (h, c)
//   aggregate     z[h] - sum_m y[h,m] = 0               per h
//   capacity      gamma_h P[h] - z[h] >= 0              per h
//   budget        -sum_{h of i} P[h] >= -P_i            per node i
//   conservation  sum_{h of v} x[h,c] - sum_{(h,l=v)} f[h,v,c] = s_v(c)
//                                                        per (c, node v)
//   arc-sum       x[h,c] - sum_{l in J} f[h,l,c] = 0     per (h, c)
// with s_source = R(m), s_sink = -R(m), 0 elsewhere. All variables are
// nonnegative; flow variables of session m are boxed by R(m), y[h,m] by R(m),
// z[h] by sum_m R(m) and P[h] by min(sender budget, sum_m R(m) / gamma_h).
// None of these boxes cuts an optimal solution.
//
// Counts, for H hyperarcs, B = sum_h |J_h| hyperarc-receiver pairs, M
// sessions, C = sum_m T_m commodities and |N| nodes:
//   variables = C (H + B) + H M + 2 H
//   rows      = 2 H C + 2 H + |N| + |N| C
// (with sum semantics the coding block has H M rows instead of H C).
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowsnr/lp.h"
#include "lowsnr/model.h"

namespace lowsnr {

// Directed graph with one arc (i,l) per pair reachable by some hyperarc.
struct ArcGraph {
  struct Arc {
    NodeId tail = 0;
    NodeId head = 0;
    std::vector<int> owners;  // hyperarc indices whose receiver set holds head
  };
  std::vector<Arc> arcs;

  // Arc index of (tail, head), or -1.
  int find(NodeId tail, NodeId head) const;
};

ArcGraph build_arc_graph(std::span<const Hyperarc> hyperarcs);

struct Commodity {
  int session = 0;  // index into the session list
  NodeId source = 0;
  NodeId sink = 0;
  double demand = 0.0;
  int source_node = 0;  // indices into FlowProgram::nodes
  int sink_node = 0;
};

// Dense column numbering. Flow columns are grouped per commodity:
// [x[0,c] .. x[H-1,c], f[0,0,c] .. f[H-1,|J|-1,c]] so one commodity's flow
// block is a contiguous range of length H + B.
class VariableIndex {
 public:
  VariableIndex() = default;
  VariableIndex(std::span<const Hyperarc> hyperarcs, int sessions, int commodities);

  int x(int h, int c) const { return c * block_ + h; }
  int branch(int h, int r, int c) const { return c * block_ + hyperarcs_ + branch_start_[h] + r; }
  int y(int h, int m) const { return y_start_ + h * sessions_ + m; }
  int z(int h) const { return z_start_ + h; }
  int power(int h) const { return z_start_ + hyperarcs_ + h; }

  int flow_block_size() const { return block_; }
  int flow_block_start(int c) const { return c * block_; }
  int branch_offset(int h) const { return branch_start_[h]; }
  int size() const { return z_start_ + 2 * hyperarcs_; }

 private:
  int hyperarcs_ = 0;
  int sessions_ = 0;
  int block_ = 0;
  int y_start_ = 0;
  int z_start_ = 0;
  std::vector<int> branch_start_;
};

enum class RowKind { kCoding, kAggregate, kCapacity, kBudget, kConservation, kArcSum };
const char* row_kind_name(RowKind kind);

enum class CodingSemantics {
  kMax,  // y >= x per sink: intra-session network coding
  kSum,  // y >= sum over sinks: plain routing, for comparison
};

struct AssemblyOptions {
  CodingSemantics coding = CodingSemantics::kMax;
};

// Raised when a session sink cannot be reached from its source.
class UnreachableSinkError : public std::invalid_argument {
 public:
  UnreachableSinkError(int session_id, NodeId sink)
      : std::invalid_argument("session " + std::to_string(session_id) + ": sink " +
                              std::to_string(sink) + " is unreachable from the source"),
        session_id_(session_id),
        sink_(sink) {}
  int session_id() const { return session_id_; }
  NodeId sink() const { return sink_; }

 private:
  int session_id_;
  NodeId sink_;
};

struct FlowProgram {
  LinearProgram lp;
  std::vector<RowKind> row_kind;  // parallel to lp.rows
  std::vector<double> row_scale;  // stored row = original row / row_scale

  // Problem structure, kept for the decomposition method and for reports.
  std::vector<NodeSpec> nodes;
  std::vector<Session> sessions;
  std::vector<Hyperarc> hyperarcs;
  std::vector<int> hyperarc_node;   // index into `nodes` of each sender
  std::vector<std::vector<int>> receiver_node;  // indices into `nodes` of each J_h
  std::vector<int> chain_position;  // 1-based position within the sender's list
  ArcGraph arc_graph;
  std::vector<Commodity> commodities;
  VariableIndex index;
  CodingSemantics coding = CodingSemantics::kMax;

  // First row of each block; rows within a block follow the orders above.
  int coding_begin = 0;
  int aggregate_begin = 0;
  int capacity_begin = 0;
  int budget_begin = 0;
  int conservation_begin = 0;
  int arcsum_begin = 0;

  int num_hyperarcs() const { return static_cast<int>(hyperarcs.size()); }
  int num_sessions() const { return static_cast<int>(sessions.size()); }
  int num_commodities() const { return static_cast<int>(commodities.size()); }
  int num_nodes() const { return static_cast<int>(nodes.size()); }

  int coding_row(int h, int c) const { return coding_begin + h * num_commodities() + c; }
  int conservation_row(int c, int v) const { return conservation_begin + c * num_nodes() + v; }
  int arcsum_row(int h, int c) const { return arcsum_begin + c * num_hyperarcs() + h; }

  // Net supply of node index v for commodity c.
  double supply(int c, int v) const;

  std::string column_name(int col) const;
  std::string row_name(int row) const;

  // Total transmit power of a primal point.
  double power_objective(std::span<const double> values) const;
};

FlowProgram assemble_program(const NetworkInstance& instance,
                             std::span<const Hyperarc> hyperarcs, const ArcGraph& arc_graph,
                             const AssemblyOptions& options = {});

// decompose_broadcast + build_arc_graph + assemble_program.
FlowProgram assemble_program(const NetworkInstance& instance,
                             const AssemblyOptions& options = {});

// CPLEX LP text for cross-checking with third-party solvers.
std::string export_lp_text(const FlowProgram& program);

struct FeasibilityResult {
  bool feasible = false;
  double violation = 0.0;             // phase-1 optimum on normalized rows
  std::vector<int> violated_rows;     // capacity/budget rows with positive slack
  std::vector<int> violating_sessions;  // session ids using those rows
};

inline constexpr double kFeasibilityTolerance = 1e-9;

// Phase-1: minimize the total elastic slack added to the capacity and
// budget rows. Feasible iff the optimum is at most kFeasibilityTolerance.
// When the phase-1 solve breaks down on a degenerate near-boundary program,
// the decision is made on budgets scaled by 1 -/+ 1e-3 instead; programs
// inside that band are reported infeasible.
FeasibilityResult check_feasibility(const FlowProgram& program);

}  // namespace lowsnr

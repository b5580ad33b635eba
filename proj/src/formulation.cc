#include "lowsnr/formulation.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

namespace lowsnr {

int ArcGraph::find(NodeId tail, NodeId head) const {
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    if (arcs[a].tail == tail && arcs[a].head == head) return static_cast<int>(a);
  }
  return -1;
}

ArcGraph build_arc_graph(std::span<const Hyperarc> hyperarcs) {
  ArcGraph g;
  std::map<std::pair<NodeId, NodeId>, int> lookup;
  for (std::size_t h = 0; h < hyperarcs.size(); ++h) {
    for (NodeId l : hyperarcs[h].receivers) {
      auto key = std::make_pair(hyperarcs[h].sender, l);
      auto [pos, inserted] = lookup.emplace(key, static_cast<int>(g.arcs.size()));
      if (inserted) g.arcs.push_back({key.first, key.second, {}});
      g.arcs[pos->second].owners.push_back(static_cast<int>(h));
    }
  }
  return g;
}

VariableIndex::VariableIndex(std::span<const Hyperarc> hyperarcs, int sessions, int commodities)
    : hyperarcs_(static_cast<int>(hyperarcs.size())), sessions_(sessions) {
  int b = 0;
  for (const auto& h : hyperarcs) {
    branch_start_.push_back(b);
    b += static_cast<int>(h.receivers.size());
  }
  block_ = hyperarcs_ + b;
  y_start_ = commodities * block_;
  z_start_ = y_start_ + hyperarcs_ * sessions_;
}

const char* row_kind_name(RowKind kind) {
  switch (kind) {
    case RowKind::kCoding: return "coding";
    case RowKind::kAggregate: return "aggregate";
    case RowKind::kCapacity: return "capacity";
    case RowKind::kBudget: return "budget";
    case RowKind::kConservation: return "conservation";
    case RowKind::kArcSum: return "arcsum";
  }
  return "unknown";
}

double FlowProgram::supply(int c, int v) const {
  const Commodity& com = commodities[c];
  if (nodes[v].id == com.source) return com.demand;
  if (nodes[v].id == com.sink) return -com.demand;
  return 0.0;
}

double FlowProgram::power_objective(std::span<const double> values) const {
  double total = 0.0;
  for (int h = 0; h < num_hyperarcs(); ++h) total += values[index.power(h)];
  return total;
}

namespace {

std::string hyperarc_tag(const FlowProgram& p, int h) {
  return std::to_string(p.hyperarcs[h].sender) + "_" + std::to_string(p.chain_position[h]);
}

std::string commodity_tag(const FlowProgram& p, int c) {
  const Commodity& com = p.commodities[c];
  return std::to_string(p.sessions[com.session].id) + "_" + std::to_string(com.sink);
}

}  // namespace

std::string FlowProgram::column_name(int col) const {
  const int H = num_hyperarcs();
  const int C = num_commodities();
  const int block = index.flow_block_size();
  if (col < C * block) {
    const int c = col / block;
    const int off = col % block;
    if (off < H) return "x_" + commodity_tag(*this, c) + "_" + hyperarc_tag(*this, off);
    const int b = off - H;
    int h = 0;
    while (h + 1 < H && index.branch_offset(h + 1) <= b) ++h;
    const int r = b - index.branch_offset(h);
    return "f_" + commodity_tag(*this, c) + "_" + hyperarc_tag(*this, h) + "_" +
           std::to_string(hyperarcs[h].receivers[r]);
  }
  if (col < index.z(0)) {
    const int rel = col - index.y(0, 0);
    const int h = rel / std::max(1, num_sessions());
    const int m = rel % std::max(1, num_sessions());
    return "y_" + std::to_string(sessions[m].id) + "_" + hyperarc_tag(*this, h);
  }
  if (col < index.power(0)) return "z_" + hyperarc_tag(*this, col - index.z(0));
  return "P_" + hyperarc_tag(*this, col - index.power(0));
}

std::string FlowProgram::row_name(int row) const {
  const int H = num_hyperarcs();
  const int C = num_commodities();
  const RowKind kind = row_kind[row];
  std::string base = row_kind_name(kind);
  switch (kind) {
    case RowKind::kCoding: {
      const int rel = row - coding_begin;
      if (coding == CodingSemantics::kMax) {
        return base + "_" + commodity_tag(*this, rel % C) + "_" + hyperarc_tag(*this, rel / C);
      }
      const int M = num_sessions();
      return base + "_" + std::to_string(sessions[rel % M].id) + "_" +
             hyperarc_tag(*this, rel / M);
    }
    case RowKind::kAggregate: return base + "_" + hyperarc_tag(*this, row - aggregate_begin);
    case RowKind::kCapacity: return base + "_" + hyperarc_tag(*this, row - capacity_begin);
    case RowKind::kBudget: return base + "_" + std::to_string(nodes[row - budget_begin].id);
    case RowKind::kConservation: {
      const int rel = row - conservation_begin;
      return base + "_" + commodity_tag(*this, rel / num_nodes()) + "_" +
             std::to_string(nodes[rel % num_nodes()].id);
    }
    case RowKind::kArcSum: {
      const int rel = row - arcsum_begin;
      return base + "_" + commodity_tag(*this, rel / H) + "_" + hyperarc_tag(*this, rel % H);
    }
  }
  return base;
}

FlowProgram assemble_program(const NetworkInstance& instance,
                             std::span<const Hyperarc> hyperarcs, const ArcGraph& arc_graph,
                             const AssemblyOptions& options) {
  instance.validate();
  FlowProgram p;
  p.nodes = instance.nodes;
  p.sessions = instance.sessions;
  p.hyperarcs.assign(hyperarcs.begin(), hyperarcs.end());
  p.arc_graph = arc_graph;
  p.coding = options.coding;

  const int N = p.num_nodes();
  const int H = p.num_hyperarcs();
  const int M = p.num_sessions();

  std::unordered_map<NodeId, int> node_pos;
  for (int v = 0; v < N; ++v) node_pos[p.nodes[v].id] = v;
  std::vector<int> per_sender(N, 0);
  for (int h = 0; h < H; ++h) {
    const Hyperarc& ha = p.hyperarcs[h];
    auto it = node_pos.find(ha.sender);
    if (it == node_pos.end()) {
      throw std::invalid_argument("hyperarc " + std::to_string(h) + ": unknown sender");
    }
    if (ha.receivers.empty() || !(ha.gamma > 0.0) || !std::isfinite(ha.gamma)) {
      throw std::invalid_argument("hyperarc " + std::to_string(h) +
                                  ": needs receivers and a positive finite gamma");
    }
    for (NodeId l : ha.receivers) {
      if (!node_pos.count(l) || l == ha.sender) {
        throw std::invalid_argument("hyperarc " + std::to_string(h) + ": bad receiver " +
                                    std::to_string(l));
      }
    }
    p.hyperarc_node.push_back(it->second);
    std::vector<int> rx;
    for (NodeId l : ha.receivers) rx.push_back(node_pos[l]);
    p.receiver_node.push_back(std::move(rx));
    p.chain_position.push_back(++per_sender[it->second]);
  }

  // Reachability over the arc graph; every sink must be reachable.
  std::unordered_map<NodeId, std::vector<NodeId>> out;
  for (const auto& a : arc_graph.arcs) out[a.tail].push_back(a.head);
  for (int m = 0; m < M; ++m) {
    const Session& s = p.sessions[m];
    std::unordered_map<NodeId, bool> seen{{s.source, true}};
    std::deque<NodeId> queue{s.source};
    while (!queue.empty()) {
      const NodeId u = queue.front();
      queue.pop_front();
      for (NodeId w : out[u]) {
        if (!seen[w]) {
          seen[w] = true;
          queue.push_back(w);
        }
      }
    }
    for (NodeId t : s.receivers) {
      if (!seen[t]) throw UnreachableSinkError(s.id, t);
      p.commodities.push_back({m, s.source, t, s.demand, node_pos[s.source], node_pos[t]});
    }
  }
  const int C = p.num_commodities();
  p.index = VariableIndex(p.hyperarcs, M, C);
  const VariableIndex& ix = p.index;

  double total_demand = 0.0;
  for (const auto& s : p.sessions) total_demand += s.demand;

  // Columns.
  LinearProgram& lp = p.lp;
  lp.cost.assign(ix.size(), 0.0);
  lp.upper.assign(ix.size(), 0.0);
  for (int c = 0; c < C; ++c) {
    const int start = ix.flow_block_start(c);
    for (int k = 0; k < ix.flow_block_size(); ++k) lp.upper[start + k] = p.commodities[c].demand;
  }
  for (int h = 0; h < H; ++h) {
    for (int m = 0; m < M; ++m) lp.upper[ix.y(h, m)] = p.sessions[m].demand;
    lp.upper[ix.z(h)] = total_demand;
    lp.upper[ix.power(h)] =
        std::min(p.nodes[p.hyperarc_node[h]].power_budget, total_demand / p.hyperarcs[h].gamma);
    lp.cost[ix.power(h)] = 1.0;
  }

  auto add_row = [&](RowKind kind, RowSense sense, double rhs, std::vector<int> cols,
                     std::vector<double> vals) {
    double norm = 0.0;
    for (double v : vals) norm = std::max(norm, std::abs(v));
    if (norm == 0.0) norm = 1.0;
    for (double& v : vals) v /= norm;
    lp.rows.push_back({sense, rhs / norm, std::move(cols), std::move(vals)});
    p.row_kind.push_back(kind);
    p.row_scale.push_back(norm);
  };

  p.coding_begin = lp.num_rows();
  for (int h = 0; h < H; ++h) {
    if (p.coding == CodingSemantics::kMax) {
      for (int c = 0; c < C; ++c) {
        add_row(RowKind::kCoding, RowSense::kGreaterEqual, 0.0,
                {ix.y(h, p.commodities[c].session), ix.x(h, c)}, {1.0, -1.0});
      }
    } else {
      for (int m = 0; m < M; ++m) {
        std::vector<int> cols{ix.y(h, m)};
        std::vector<double> vals{1.0};
        for (int c = 0; c < C; ++c) {
          if (p.commodities[c].session != m) continue;
          cols.push_back(ix.x(h, c));
          vals.push_back(-1.0);
        }
        add_row(RowKind::kCoding, RowSense::kGreaterEqual, 0.0, std::move(cols), std::move(vals));
      }
    }
  }
  p.aggregate_begin = lp.num_rows();
  for (int h = 0; h < H; ++h) {
    std::vector<int> cols{ix.z(h)};
    std::vector<double> vals{1.0};
    for (int m = 0; m < M; ++m) {
      cols.push_back(ix.y(h, m));
      vals.push_back(-1.0);
    }
    add_row(RowKind::kAggregate, RowSense::kEqual, 0.0, std::move(cols), std::move(vals));
  }
  p.capacity_begin = lp.num_rows();
  for (int h = 0; h < H; ++h) {
    add_row(RowKind::kCapacity, RowSense::kGreaterEqual, 0.0, {ix.power(h), ix.z(h)},
            {p.hyperarcs[h].gamma, -1.0});
  }
  p.budget_begin = lp.num_rows();
  for (int v = 0; v < N; ++v) {
    std::vector<int> cols;
    std::vector<double> vals;
    for (int h = 0; h < H; ++h) {
      if (p.hyperarc_node[h] != v) continue;
      cols.push_back(ix.power(h));
      vals.push_back(-1.0);
    }
    add_row(RowKind::kBudget, RowSense::kGreaterEqual, -p.nodes[v].power_budget,
            std::move(cols), std::move(vals));
  }
  p.conservation_begin = lp.num_rows();
  for (int c = 0; c < C; ++c) {
    std::vector<std::vector<int>> cols(N);
    std::vector<std::vector<double>> vals(N);
    for (int h = 0; h < H; ++h) {
      cols[p.hyperarc_node[h]].push_back(ix.x(h, c));
      vals[p.hyperarc_node[h]].push_back(1.0);
      const auto& rx = p.receiver_node[h];
      for (std::size_t r = 0; r < rx.size(); ++r) {
        const int v = rx[r];
        cols[v].push_back(ix.branch(h, static_cast<int>(r), c));
        vals[v].push_back(-1.0);
      }
    }
    for (int v = 0; v < N; ++v) {
      add_row(RowKind::kConservation, RowSense::kEqual, p.supply(c, v), std::move(cols[v]),
              std::move(vals[v]));
    }
  }
  p.arcsum_begin = lp.num_rows();
  for (int c = 0; c < C; ++c) {
    for (int h = 0; h < H; ++h) {
      std::vector<int> cols{ix.x(h, c)};
      std::vector<double> vals{1.0};
      for (std::size_t r = 0; r < p.hyperarcs[h].receivers.size(); ++r) {
        cols.push_back(ix.branch(h, static_cast<int>(r), c));
        vals.push_back(-1.0);
      }
      add_row(RowKind::kArcSum, RowSense::kEqual, 0.0, std::move(cols), std::move(vals));
    }
  }
  return p;
}

FlowProgram assemble_program(const NetworkInstance& instance, const AssemblyOptions& options) {
  const auto hyperarcs = decompose_broadcast(instance);
  const auto graph = build_arc_graph(hyperarcs);
  return assemble_program(instance, hyperarcs, graph, options);
}

}  // namespace lowsnr

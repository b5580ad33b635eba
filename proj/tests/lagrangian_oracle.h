// Independent evaluation of the Lagrangian dual function: reduced costs from
// the stored rows, box minima for the non-flow columns and a Bellman-Ford
// routing of every commodity. With lambda >= 0 the flow columns have
// nonnegative reduced costs, so a shortest path minimizes over each flow
// polytope.
#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "lowsnr/pdsg.h"

namespace lowsnr::testing {

inline double whole_lagrangian(const FlowProgram& p, const DualPoint& dual) {
  const LinearProgram& lp = p.lp;
  const std::vector<double> rows = to_row_multipliers(p, dual);
  std::vector<double> rc = lp.cost;
  double value = 0.0;
  for (int r = 0; r < lp.num_rows(); ++r) {
    if (rows[r] == 0.0) continue;
    value += rows[r] * lp.rows[r].rhs;
    for (std::size_t k = 0; k < lp.rows[r].cols.size(); ++k) {
      rc[lp.rows[r].cols[k]] -= rows[r] * lp.rows[r].vals[k];
    }
  }
  const int flows = p.num_commodities() * p.index.flow_block_size();
  for (int j = flows; j < lp.num_cols(); ++j) value += std::min(0.0, rc[j] * lp.upper[j]);
  const int N = p.num_nodes();
  for (int c = 0; c < p.num_commodities(); ++c) {
    std::vector<double> dist(N, std::numeric_limits<double>::infinity());
    dist[p.commodities[c].source_node] = 0.0;
    for (int pass = 0; pass < N; ++pass) {
      for (int h = 0; h < p.num_hyperarcs(); ++h) {
        const int u = p.hyperarc_node[h];
        for (std::size_t r = 0; r < p.receiver_node[h].size(); ++r) {
          const double w = rc[p.index.x(h, c)] + rc[p.index.branch(h, static_cast<int>(r), c)];
          const int v = p.receiver_node[h][r];
          dist[v] = std::min(dist[v], dist[u] + w);
        }
      }
    }
    value += p.commodities[c].demand * dist[p.commodities[c].sink_node];
  }
  return value;
}

}  // namespace lowsnr::testing

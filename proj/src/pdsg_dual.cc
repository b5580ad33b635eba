#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lowsnr/pdsg.h"

namespace lowsnr {
namespace {

int coding_rows(const FlowProgram& p) { return p.aggregate_begin - p.coding_begin; }

// Index into DualPoint::lambda of the coding row that covers x[h, c].
int lambda_index(const FlowProgram& p, int h, int c) {
  if (p.coding == CodingSemantics::kMax) return h * p.num_commodities() + c;
  return h * p.num_sessions() + p.commodities[c].session;
}

}  // namespace

DualPoint zero_dual(const FlowProgram& program) {
  DualPoint d;
  d.lambda.assign(coding_rows(program), 0.0);
  d.nu.assign(program.num_hyperarcs(), 0.0);
  d.mu.assign(program.num_hyperarcs(), 0.0);
  d.zeta.assign(program.num_nodes(), 0.0);
  return d;
}

std::vector<double> to_row_multipliers(const FlowProgram& program, const DualPoint& dual) {
  std::vector<double> rows(program.lp.num_rows(), 0.0);
  const auto put = [&](int begin, const std::vector<double>& v) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      const int r = begin + static_cast<int>(k);
      rows[r] = v[k] * program.row_scale[r];
    }
  };
  put(program.coding_begin, dual.lambda);
  put(program.aggregate_begin, dual.nu);
  put(program.capacity_begin, dual.mu);
  put(program.budget_begin, dual.zeta);
  return rows;
}

DualPoint from_row_multipliers(const FlowProgram& program, std::span<const double> rows) {
  DualPoint d = zero_dual(program);
  const auto get = [&](int begin, std::vector<double>& v) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      const int r = begin + static_cast<int>(k);
      v[k] = rows[r] / program.row_scale[r];
    }
  };
  get(program.coding_begin, d.lambda);
  get(program.aggregate_begin, d.nu);
  get(program.capacity_begin, d.mu);
  get(program.budget_begin, d.zeta);
  return d;
}

ShortestPaths route_commodities(const FlowProgram& program, const DualPoint& dual) {
  const int N = program.num_nodes();
  const int C = program.num_commodities();
  ShortestPaths sp;
  sp.cost.assign(C, 0.0);
  sp.hyperarcs.assign(C, {});
  sp.receivers.assign(C, {});

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(N);
  std::vector<int> pred_h(N), pred_r(N);
  std::vector<char> done(N);
  for (int c = 0; c < C; ++c) {
    const int src = program.commodities[c].source_node;
    const int dst = program.commodities[c].sink_node;
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(pred_h.begin(), pred_h.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    dist[src] = 0.0;
    // Dense Dijkstra; ties go to the lowest node index and the lowest
    // hyperarc index, which keeps the routing deterministic.
    for (int iter = 0; iter < N; ++iter) {
      int u = -1;
      for (int v = 0; v < N; ++v) {
        if (!done[v] && dist[v] < kInf && (u < 0 || dist[v] < dist[u])) u = v;
      }
      if (u < 0 || u == dst) break;
      done[u] = 1;
      for (int h = 0; h < program.num_hyperarcs(); ++h) {
        if (program.hyperarc_node[h] != u) continue;
        const double w = dual.lambda[lambda_index(program, h, c)];
        const auto& rx = program.receiver_node[h];
        for (std::size_t r = 0; r < rx.size(); ++r) {
          const int l = rx[r];
          if (done[l]) continue;
          if (dist[u] + w < dist[l]) {
            dist[l] = dist[u] + w;
            pred_h[l] = h;
            pred_r[l] = static_cast<int>(r);
          }
        }
      }
    }
    if (!std::isfinite(dist[dst])) {
      throw std::invalid_argument("route_commodities: sink of commodity " + std::to_string(c) +
                                  " unreachable under the given multipliers");
    }
    sp.cost[c] = dist[dst];
    for (int v = dst; v != src;) {
      const int h = pred_h[v];
      sp.hyperarcs[c].push_back(h);
      sp.receivers[c].push_back(pred_r[v]);
      v = program.hyperarc_node[h];
    }
    std::reverse(sp.hyperarcs[c].begin(), sp.hyperarcs[c].end());
    std::reverse(sp.receivers[c].begin(), sp.receivers[c].end());
  }
  return sp;
}

SubproblemResult eval_subproblem(const FlowProgram& program, int h, const DualPoint& dual,
                                 const ShortestPaths& paths) {
  const int C = program.num_commodities();
  const int M = program.num_sessions();
  const LinearProgram& lp = program.lp;
  const VariableIndex& ix = program.index;
  SubproblemResult res;
  res.x.assign(C, 0.0);
  res.y.assign(M, 0.0);

  // Box minimizer of u * rc over [0, ub]; the lower end on a tie.
  const auto box_min = [](double rc, double ub, double& arg) {
    arg = rc < 0.0 ? ub : 0.0;
    return rc * arg;
  };

  double q = 0.0;
  for (int c = 0; c < C; ++c) {
    const auto& hs = paths.hyperarcs[c];
    if (std::find(hs.begin(), hs.end(), h) == hs.end()) continue;
    res.x[c] = program.commodities[c].demand;
    q += dual.lambda[lambda_index(program, h, c)] * res.x[c];
  }
  std::vector<double> lambda_sum(M, 0.0);
  if (program.coding == CodingSemantics::kMax) {
    for (int c = 0; c < C; ++c) lambda_sum[program.commodities[c].session] += dual.lambda[h * C + c];
  } else {
    for (int m = 0; m < M; ++m) lambda_sum[m] = dual.lambda[h * M + m];
  }
  for (int m = 0; m < M; ++m) {
    q += box_min(dual.nu[h] - lambda_sum[m], lp.upper[ix.y(h, m)], res.y[m]);
  }
  q += box_min(dual.mu[h] - dual.nu[h], lp.upper[ix.z(h)], res.z);
  const double rc_power =
      lp.cost[ix.power(h)] + dual.zeta[program.hyperarc_node[h]] - dual.mu[h] * program.hyperarcs[h].gamma;
  q += box_min(rc_power, lp.upper[ix.power(h)], res.power);
  res.value = q;
  return res;
}

DualEvaluation evaluate_dual(const FlowProgram& program, const DualPoint& dual,
                             Execution execution) {
  const int H = program.num_hyperarcs();
  const ShortestPaths paths = route_commodities(program, dual);
  std::vector<SubproblemResult> blocks(H);
  const bool parallel = execution == Execution::kParallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (int h = 0; h < H; ++h) blocks[h] = eval_subproblem(program, h, dual, paths);

  DualEvaluation ev;
  ev.q.resize(H);
  ev.minimizer.assign(program.lp.num_cols(), 0.0);
  const VariableIndex& ix = program.index;
  double total = 0.0;
  for (int h = 0; h < H; ++h) {
    ev.q[h] = blocks[h].value;
    total += blocks[h].value;
    for (int c = 0; c < program.num_commodities(); ++c) ev.minimizer[ix.x(h, c)] = blocks[h].x[c];
    for (int m = 0; m < program.num_sessions(); ++m) ev.minimizer[ix.y(h, m)] = blocks[h].y[m];
    ev.minimizer[ix.z(h)] = blocks[h].z;
    ev.minimizer[ix.power(h)] = blocks[h].power;
  }
  for (int c = 0; c < program.num_commodities(); ++c) {
    for (std::size_t k = 0; k < paths.hyperarcs[c].size(); ++k) {
      ev.minimizer[ix.branch(paths.hyperarcs[c][k], paths.receivers[c][k], c)] =
          program.commodities[c].demand;
    }
  }
  for (int v = 0; v < program.num_nodes(); ++v) total -= dual.zeta[v] * program.nodes[v].power_budget;
  ev.value = total;
  return ev;
}

double max_row_violation(const FlowProgram& program, std::span<const double> values) {
  const LinearProgram& lp = program.lp;
  double worst = 0.0;
  for (int j = 0; j < lp.num_cols(); ++j) {
    worst = std::max({worst, -values[j], values[j] - lp.upper[j]});
  }
  for (const LpRow& row : lp.rows) {
    double a = 0.0;
    for (std::size_t k = 0; k < row.cols.size(); ++k) a += row.vals[k] * values[row.cols[k]];
    const double slack = a - row.rhs;
    switch (row.sense) {
      case RowSense::kEqual: worst = std::max(worst, std::abs(slack)); break;
      case RowSense::kGreaterEqual: worst = std::max(worst, -slack); break;
      case RowSense::kLessEqual: worst = std::max(worst, slack); break;
    }
  }
  return worst;
}

double max_conservation_violation(const FlowProgram& program, std::span<const double> values) {
  double worst = 0.0;
  for (int r = program.conservation_begin; r < program.lp.num_rows(); ++r) {
    const LpRow& row = program.lp.rows[r];
    double a = 0.0;
    for (std::size_t k = 0; k < row.cols.size(); ++k) a += row.vals[k] * values[row.cols[k]];
    worst = std::max(worst, std::abs(a - row.rhs));
  }
  return worst;
}

}  // namespace lowsnr

// Projection onto one commodity's flow polytope.
//
// With node potentials pi and a coupling multiplier tau_h per hyperarc, the
// minimizer of the Lagrangian is, for every variable j of hyperarc h with
// node n_j and sign s_j (+1 for x at the sender, -1 for a branch at its
// receiver),
//   v_j = clip(a_j + s_j (pi[n_j] + tau_h), 0, 1),
// where tau_h makes sum_j s_j v_j = 0 (the arc-sum row). The concave dual in
// pi is maximized by semismooth Newton; its gradient is the conservation
// residual and its generalized Hessian sums, per hyperarc,
// diag(w) - w w^T / sum(w) scattered onto the nodes (w marks the free
// variables).
#include "flow_projection.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace lowsnr::detail {
namespace {

constexpr double kResidualTolerance = 1e-13;
constexpr int kMaxNewtonSteps = 100;
constexpr int kMaxBacktracks = 60;

struct Layout {
  int H = 0;
  std::vector<int> begin;  // per hyperarc, first local variable
  std::vector<int> node;   // per local variable
  std::vector<double> sign;
};

Layout make_layout(const FlowProgram& p) {
  Layout L;
  L.H = p.num_hyperarcs();
  // Local order: x[h], then f[h, r] for r in J_h, hyperarc by hyperarc.
  for (int h = 0; h < L.H; ++h) {
    L.begin.push_back(static_cast<int>(L.node.size()));
    L.node.push_back(p.hyperarc_node[h]);
    L.sign.push_back(1.0);
    for (int l : p.receiver_node[h]) {
      L.node.push_back(l);
      L.sign.push_back(-1.0);
    }
  }
  L.begin.push_back(static_cast<int>(L.node.size()));
  return L;
}

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

// Root of the arc-sum balance of one hyperarc for fixed potentials. Each term
// s_j clip(a_j + s_j (pi + tau)) rises with slope 1 on an interval of length
// 1 and is flat elsewhere, so the balance is -(#branches) far left and
// sweeping the sorted interval ends finds its leftmost zero.
double solve_coupling(const Layout& L, int h, std::span<const double> a,
                      std::span<const double> pi, std::vector<double>& starts) {
  const int b = L.begin[h], e = L.begin[h + 1];
  starts.clear();
  for (int j = b; j < e; ++j) {
    // Start of the rising interval: u_j = 0 for x (s = +1), u_j = 1 for a
    // branch (s = -1).
    starts.push_back(L.sign[j] > 0.0 ? -a[j] - pi[L.node[j]] : a[j] - 1.0 - pi[L.node[j]]);
  }
  std::sort(starts.begin(), starts.end());
  // Merge the starts with the ends (start + 1), which share their order.
  const std::size_t n = starts.size();
  std::size_t i = 0, k = 0;
  double g = -static_cast<double>(n - 1);
  int slope = 0;
  double t = starts.front();
  while (k < n) {
    const bool open = i < n && starts[i] <= starts[k] + 1.0;
    const double at = open ? starts[i] : starts[k] + 1.0;
    const double next = g + slope * (at - t);
    if (next >= 0.0 && slope > 0) return t - g / slope;
    g = next;
    t = at;
    if (open) {
      ++slope;
      ++i;
    } else {
      --slope;
      ++k;
    }
  }
  return t;
}

struct Evaluation {
  double dual = 0.0;          // Lagrangian value at the minimizer
  std::vector<double> v;      // local variables
  std::vector<double> tau;    // per hyperarc
  std::vector<double> residual;  // per node, E v - e
};

void evaluate(const Layout& L, std::span<const double> a, std::span<const double> pi,
              std::span<const double> supply, Evaluation& ev, std::vector<double>& scratch) {
  const int n = static_cast<int>(L.node.size());
  ev.v.resize(n);
  ev.tau.resize(L.H);
  ev.residual.assign(pi.size(), 0.0);
  double quad = 0.0;
  for (int h = 0; h < L.H; ++h) {
    const double tau = solve_coupling(L, h, a, pi, scratch);
    ev.tau[h] = tau;
    for (int j = L.begin[h]; j < L.begin[h + 1]; ++j) {
      const double v = clip01(a[j] + L.sign[j] * (pi[L.node[j]] + tau));
      ev.v[j] = v;
      ev.residual[L.node[j]] += L.sign[j] * v;
      quad += 0.5 * (v - a[j]) * (v - a[j]);
    }
  }
  double lin = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    ev.residual[i] -= supply[i];
    lin += pi[i] * ev.residual[i];
  }
  ev.dual = quad - lin;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

ProjectionStats project_unit_flows(const FlowProgram& program, int c, std::span<const double> raw,
                                   std::span<double> out, ProjectionWarmStart* warm) {
  const Layout L = make_layout(program);
  const VariableIndex& ix = program.index;
  const int N = program.num_nodes();
  const int n = static_cast<int>(L.node.size());

  // Gather into the local order.
  std::vector<double> a(n);
  for (int h = 0; h < L.H; ++h) {
    a[L.begin[h]] = raw[h];
    for (int r = 0; r + 1 < L.begin[h + 1] - L.begin[h]; ++r) {
      a[L.begin[h] + 1 + r] = raw[ix.branch(h, r, c) - ix.flow_block_start(c)];
    }
  }
  std::vector<double> supply(N, 0.0);
  supply[program.commodities[c].source_node] = 1.0;
  supply[program.commodities[c].sink_node] = -1.0;

  std::vector<double> pi(N, 0.0);
  if (warm != nullptr && static_cast<int>(warm->potential.size()) == N) pi = warm->potential;

  std::vector<double> scratch;
  Evaluation ev, trial;
  evaluate(L, a, pi, supply, ev, scratch);
  ProjectionStats stats;
  Eigen::MatrixXd J(N, N);
  Eigen::VectorXd rhs(N);
  std::vector<double> next(N);
  for (; stats.newton_steps < kMaxNewtonSteps; ++stats.newton_steps) {
    const double res = max_abs(ev.residual);
    if (res <= kResidualTolerance) break;
    J.setZero();
    for (int h = 0; h < L.H; ++h) {
      double A = 0.0;
      for (int j = L.begin[h]; j < L.begin[h + 1]; ++j) {
        const double u = a[j] + L.sign[j] * (pi[L.node[j]] + ev.tau[h]);
        if (u > 0.0 && u < 1.0) {
          J(L.node[j], L.node[j]) += 1.0;
          A += 1.0;
        }
      }
      if (A == 0.0) continue;
      for (int j = L.begin[h]; j < L.begin[h + 1]; ++j) {
        const double uj = a[j] + L.sign[j] * (pi[L.node[j]] + ev.tau[h]);
        if (!(uj > 0.0 && uj < 1.0)) continue;
        for (int k = L.begin[h]; k < L.begin[h + 1]; ++k) {
          const double uk = a[k] + L.sign[k] * (pi[L.node[k]] + ev.tau[h]);
          if (uk > 0.0 && uk < 1.0) J(L.node[j], L.node[k]) -= 1.0 / A;
        }
      }
    }
    double rnorm = 0.0;
    for (int i = 0; i < N; ++i) {
      rhs[i] = -ev.residual[i];
      rnorm += ev.residual[i] * ev.residual[i];
    }
    rnorm = std::sqrt(rnorm);
    // Levenberg-Marquardt shift: the Jacobian is singular along constant
    // potentials and on nodes whose variables all sit at a bound. A constant
    // shift of the potentials changes nothing, so it is removed from the step.
    const double shift = std::max(1e-6, std::min(1.0, rnorm));
    J.diagonal().array() += shift;
    Eigen::VectorXd step = J.ldlt().solve(rhs);
    step.array() -= step.mean();

    double slope = 0.0;  // directional derivative of the dual, -r . step
    for (int i = 0; i < N; ++i) slope += rhs[i] * step[i];
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, t *= 0.5) {
      for (int i = 0; i < N; ++i) next[i] = pi[i] + t * step[i];
      evaluate(L, a, next, supply, trial, scratch);
      // The dual is maximized; accept on sufficient increase or, near the
      // solution where the dual is flat to rounding, on a smaller residual.
      if (trial.dual >= ev.dual + 1e-4 * t * slope || norm2(trial.residual) <= (1.0 - 1e-4 * t) * rnorm) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    pi.swap(next);
    std::swap(ev, trial);
  }
  stats.residual = max_abs(ev.residual);
  if (warm != nullptr) warm->potential = pi;

  for (int h = 0; h < L.H; ++h) {
    out[h] = ev.v[L.begin[h]];
    for (int r = 0; r + 1 < L.begin[h + 1] - L.begin[h]; ++r) {
      out[ix.branch(h, r, c) - ix.flow_block_start(c)] = ev.v[L.begin[h] + 1 + r];
    }
  }
  return stats;
}

}  // namespace lowsnr::detail

namespace lowsnr {

ProjectionStats project_flows(const FlowProgram& program, int c, std::span<const double> raw,
                              std::span<double> out, ProjectionWarmStart* warm) {
  const double R = program.commodities[c].demand;
  std::vector<double> unit(raw.begin(), raw.end());
  for (double& v : unit) v /= R;
  ProjectionStats stats = detail::project_unit_flows(program, c, unit, out, warm);
  for (double& v : out) v *= R;
  stats.residual *= R;
  return stats;
}

}  // namespace lowsnr

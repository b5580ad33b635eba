#include "lowsnr/pdsg.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "flow_projection.h"
#include "lowsnr/lp.h"

namespace lowsnr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dual blocks, for cap adaptation.
enum Block { kCodingBlock, kAggregateBlock, kCapacityBlock, kBudgetBlock, kBlocks };

// Restart an epoch once the gap has halved, or once it is both at least this
// long and a fixed fraction of the whole run.
constexpr int kFirstEpochLength = 64;
constexpr double kLongEpoch = 0.36;  // of all iterations so far
// Dual caps double at a restart when the averaged multipliers sit above this
// fraction of the cap.
constexpr double kCapPressure = 0.9;
constexpr double kInitialMargin = 1e-3;
constexpr double kMaxMargin = 0.004;
constexpr int kPowerIterations = 60;
// Flow candidates must satisfy conservation to this accuracy.
constexpr double kConservationTolerance = 1e-9;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

const char* pdsg_status_name(PdsgStatus status) {
  switch (status) {
    case PdsgStatus::kConverged: return "converged";
    case PdsgStatus::kIterationLimit: return "iteration_limit";
    case PdsgStatus::kTimeLimit: return "time_limit";
  }
  return "unknown";
}

std::vector<double> SolveReport::powers() const {
  // Power columns close the column layout.
  const std::size_t H = dual.mu.size();
  if (primal.size() < H) return {};
  return std::vector<double>(primal.end() - static_cast<long>(H), primal.end());
}

std::vector<double> SolveReport::rates(const FlowProgram& program) const {
  std::vector<double> r = powers();
  for (std::size_t h = 0; h < r.size(); ++h) r[h] *= program.hyperarcs[h].gamma;
  return r;
}

void accumulate_subgradient(IterationState& state, std::span<const double> g, double sigma) {
  for (std::size_t i = 0; i < g.size(); ++i) state.s[i] += sigma * g[i];
  state.S += sigma;
}

struct PdsgSolver::Impl {
  const FlowProgram& prog;
  PdsgOptions opt;
  int n = 0;   // primal columns
  int m = 0;   // dualized rows
  int C = 0;
  bool parallel = false;

  // Scaled problem: p = D p_hat, rows divided by rho, objective by cost_scale.
  std::vector<double> D, chat, rho, bhat;
  double cost_scale = 1.0;
  std::vector<int> row_ptr, row_col;
  std::vector<double> row_val;
  std::vector<int> col_ptr, col_row;
  std::vector<double> col_val;
  std::vector<char> equality;
  std::vector<int> block;
  double cap[kBlocks] = {};
  double omega = 1.0;
  double theta_hat = 0.0;
  // Budget rows are tightened to (1 - margin) P_i inside the solver so that
  // averaged points land strictly inside the true budgets.
  double margin = kInitialMargin;
  std::vector<int> budget_rows;
  std::vector<double> restart_primal, restart_dual;

  IterationState st;
  // Per commodity, one warm start for each of the two prox steps.
  std::vector<ProjectionWarmStart> warm, warm_probe;

  // Bookkeeping in program units.
  std::vector<double> best_point;  // empty until a feasible point is known
  double best_residual = 0.0;
  DualPoint best_dual_point;
  int restarts = 0;
  std::vector<double> probe_p, probe_d;  // points whose subgradients are aggregated
  double epoch_start_gap = kInf;
  int iterations = 0;
  std::vector<TraceRow> trace;
  std::chrono::steady_clock::time_point start;

  Impl(const FlowProgram& p, const PdsgOptions& o) : prog(p), opt(o) {
    n = prog.lp.num_cols();
    m = prog.conservation_begin;
    C = prog.num_commodities();
    parallel = opt.execution == Execution::kParallel;
    build_scaling();
    omega = opt.primal_weight > 0.0 ? opt.primal_weight : initial_weight();
    st.s.assign(n + m, 0.0);
    st.primal.assign(n, 0.0);
    st.dual.assign(m, 0.0);
    warm.resize(C);
    warm_probe.resize(C);
    best_dual_point = zero_dual(prog);
    st.best_primal = kInf;
    st.best_dual = 0.0;  // g(0) = 0 and the objective is nonnegative
    st.best_gap = kInf;
    set_margin(kInitialMargin);
    initial_point();
  }

  void build_scaling() {
    const LinearProgram& lp = prog.lp;
    D.resize(n);
    chat.resize(n);
    for (int j = 0; j < n; ++j) D[j] = lp.upper[j] > 0.0 ? lp.upper[j] : 1.0;

    // Lower bound on the optimum: each commodity alone needs at least its
    // demand times the cheapest path under per-unit-rate power costs 1/gamma.
    cost_scale = 0.0;
    if (C > 0) {
      DualPoint unit = zero_dual(prog);
      const int per_h = static_cast<int>(unit.lambda.size()) / std::max(1, prog.num_hyperarcs());
      for (int h = 0; h < prog.num_hyperarcs(); ++h) {
        for (int k = 0; k < per_h; ++k) unit.lambda[h * per_h + k] = 1.0 / prog.hyperarcs[h].gamma;
      }
      const ShortestPaths sp = route_commodities(prog, unit);
      for (int c = 0; c < C; ++c) cost_scale = std::max(cost_scale, prog.commodities[c].demand * sp.cost[c]);
    }
    if (!(cost_scale > 0.0)) cost_scale = 1.0;
    for (int j = 0; j < n; ++j) chat[j] = lp.cost[j] * D[j] / cost_scale;

    rho.resize(m);
    bhat.resize(m);
    equality.resize(m);
    block.resize(m);
    row_ptr.assign(1, 0);
    for (int r = 0; r < m; ++r) {
      const LpRow& row = lp.rows[r];
      double norm = 0.0;
      for (std::size_t k = 0; k < row.cols.size(); ++k) {
        norm = std::max(norm, std::abs(row.vals[k] * D[row.cols[k]]));
      }
      if (norm == 0.0) norm = 1.0;
      rho[r] = norm;
      bhat[r] = row.rhs / norm;
      equality[r] = row.sense == RowSense::kEqual;
      if (prog.row_kind[r] == RowKind::kBudget) budget_rows.push_back(r);
      for (std::size_t k = 0; k < row.cols.size(); ++k) {
        row_col.push_back(row.cols[k]);
        row_val.push_back(row.vals[k] * D[row.cols[k]] / norm);
      }
      row_ptr.push_back(static_cast<int>(row_col.size()));
      switch (prog.row_kind[r]) {
        case RowKind::kCoding: block[r] = kCodingBlock; break;
        case RowKind::kAggregate: block[r] = kAggregateBlock; break;
        case RowKind::kCapacity: block[r] = kCapacityBlock; break;
        default: block[r] = kBudgetBlock; break;
      }
    }
    // Transpose, rows in increasing order within each column.
    col_ptr.assign(n + 1, 0);
    for (int c : row_col) ++col_ptr[c + 1];
    for (int j = 0; j < n; ++j) col_ptr[j + 1] += col_ptr[j];
    col_row.resize(row_col.size());
    col_val.resize(row_col.size());
    std::vector<int> fill(col_ptr.begin(), col_ptr.end() - 1);
    for (int r = 0; r < m; ++r) {
      for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        const int at = fill[row_col[k]]++;
        col_row[at] = r;
        col_val[at] = row_val[k];
      }
    }

    double cmax = 0.0;
    for (double v : chat) cmax = std::max(cmax, std::abs(v));
    if (cmax == 0.0) cmax = 1.0;
    std::fill(std::begin(cap), std::end(cap), opt.dual_cap_factor * cmax);
  }

  void set_margin(double value) {
    margin = value;
    for (int r : budget_rows) {
      bhat[r] = (1.0 - margin) * prog.lp.rows[r].rhs / rho[r];
    }
  }

  double initial_weight() const {
    double cn = norm2(chat), bn = norm2(bhat);
    return cn > 0.0 && bn > 0.0 ? cn / bn : 1.0;
  }

  // Largest singular value of the scaled dualized block, by power iteration.
  double operator_norm() const {
    std::vector<double> v(n, 1.0), w(m), u(n);
    double sigma = 0.0;
    for (int it = 0; it < kPowerIterations; ++it) {
      const double vn = norm2(v);
      if (vn == 0.0) return 1.0;
      for (double& x : v) x /= vn;
      for (int r = 0; r < m; ++r) {
        double a = 0.0;
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) a += row_val[k] * v[row_col[k]];
        w[r] = a;
      }
      for (int j = 0; j < n; ++j) {
        double a = 0.0;
        for (int k = col_ptr[j]; k < col_ptr[j + 1]; ++k) a += col_val[k] * w[col_row[k]];
        u[j] = a;
      }
      sigma = std::sqrt(norm2(u));
      v.swap(u);
    }
    return sigma > 0.0 ? sigma : 1.0;
  }

  double lower(int r) const { return equality[r] ? -cap[block[r]] : 0.0; }
  double upper(int r) const { return cap[block[r]]; }

  void initial_point() {
    // Primal center: the projection of zero; dual center: a seeded point in
    // the lower part of the box (zero when the seed is 0).
    std::vector<double> zero(n, 0.0);
    st.primal_center = zero;
    st.dual_center.assign(m, 0.0);
    if (opt.seed != 0) {
      std::uint64_t x = opt.seed;
      for (int r = 0; r < m; ++r) {
        // splitmix64
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
        st.dual_center[r] = equality[r] ? 0.0 : 0.01 * u * cap[block[r]];
      }
    }
    project_primal(st.primal_center, warm);
    st.primal = st.primal_center;
    st.dual = st.dual_center;
    st.primal_avg = st.primal;
    st.dual_avg = st.dual;
    probe_p = st.primal;
    probe_d = st.dual;
  }

  void project_primal(std::span<double> p, std::vector<ProjectionWarmStart>& starts) {
    const int block_size = prog.index.flow_block_size();
#pragma omp parallel for schedule(static) if (parallel)
    for (int c = 0; c < C; ++c) {
      const std::span<double> flows = p.subspan(prog.index.flow_block_start(c), block_size);
      const std::vector<double> raw(flows.begin(), flows.end());
      detail::project_unit_flows(prog, c, raw, flows, &starts[c]);
    }
    for (int j = C * block_size; j < n; ++j) p[j] = std::clamp(p[j], 0.0, 1.0);
  }

  void project_dual(std::span<double> d) const {
    for (int r = 0; r < m; ++r) d[r] = std::clamp(d[r], lower(r), upper(r));
  }

  void subgradient(std::span<const double> p, std::span<const double> d,
                   std::span<double> g) const {
#pragma omp parallel for schedule(static) if (parallel)
    for (int j = 0; j < n; ++j) {
      double a = chat[j];
      for (int k = col_ptr[j]; k < col_ptr[j + 1]; ++k) a -= col_val[k] * d[col_row[k]];
      g[j] = a;
    }
#pragma omp parallel for schedule(static) if (parallel)
    for (int r = 0; r < m; ++r) {
      double a = -bhat[r];
      for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) a += row_val[k] * p[row_col[k]];
      g[n + r] = a;
    }
  }

  std::vector<double> unscale_primal(std::span<const double> p) const {
    std::vector<double> v(n);
    for (int j = 0; j < n; ++j) v[j] = p[j] * D[j];
    return v;
  }

  DualPoint unscale_dual(std::span<const double> d) const {
    std::vector<double> rows(prog.lp.num_rows(), 0.0);
    for (int r = 0; r < m; ++r) rows[r] = cost_scale * d[r] / rho[r];
    return from_row_multipliers(prog, rows);
  }

  std::vector<double> scale_dual(const DualPoint& dual) const {
    const std::vector<double> rows = to_row_multipliers(prog, dual);
    std::vector<double> d(m);
    for (int r = 0; r < m; ++r) d[r] = rows[r] * rho[r] / cost_scale;
    return d;
  }

  // Rebuilds y, z and P of a point from its flows so that every coding,
  // aggregate and capacity row holds; returns the objective.
  double repair(std::vector<double>& v) const {
    const VariableIndex& ix = prog.index;
    const int H = prog.num_hyperarcs();
    const int M = prog.num_sessions();
    double total = 0.0;
    for (int h = 0; h < H; ++h) {
      double z = 0.0;
      for (int mm = 0; mm < M; ++mm) {
        double y = 0.0;
        for (int c = 0; c < C; ++c) {
          if (prog.commodities[c].session != mm) continue;
          const double x = v[ix.x(h, c)];
          y = prog.coding == CodingSemantics::kMax ? std::max(y, x) : y + x;
        }
        v[ix.y(h, mm)] = y;
        z += y;
      }
      v[ix.z(h)] = z;
      const double P = z / prog.hyperarcs[h].gamma;
      v[ix.power(h)] = P;
      total += P;
    }
    return total;
  }

  std::vector<double> node_load(const std::vector<double>& v) const {
    std::vector<double> load(prog.num_nodes(), 0.0);
    for (int h = 0; h < prog.num_hyperarcs(); ++h) load[prog.hyperarc_node[h]] += v[prog.index.power(h)];
    return load;
  }

  bool within_budget(const std::vector<double>& load) const {
    for (int i = 0; i < prog.num_nodes(); ++i) {
      if (load[i] > prog.nodes[i].power_budget) return false;
    }
    return true;
  }

  void offer_primal(std::vector<double> v) {
    if (max_conservation_violation(prog, v) > kConservationTolerance) return;
    double obj = repair(v);
    std::vector<double> load = node_load(v);
    if (!within_budget(load)) {
      if (best_point.empty()) return;
      // Blend toward the best feasible point; y, z and P of the repaired
      // blend are at most the blend of the repaired endpoints.
      const std::vector<double> anchor_load = node_load(best_point);
      double t = 1.0;
      for (int i = 0; i < prog.num_nodes(); ++i) {
        const double budget = prog.nodes[i].power_budget;
        if (load[i] > budget) t = std::min(t, (budget - anchor_load[i]) / (load[i] - anchor_load[i]));
      }
      t *= 1.0 - 1e-12;
      if (!(t > 0.0)) return;
      const int flows = C * prog.index.flow_block_size();
      for (int j = 0; j < flows; ++j) v[j] = t * v[j] + (1.0 - t) * best_point[j];
      obj = repair(v);
      if (!within_budget(node_load(v))) return;
    }
    if (obj < st.best_primal) {
      st.best_primal = obj;
      best_residual = max_row_violation(prog, v);
      best_point = std::move(v);
    }
  }

  // Evaluates g at a scaled dual point and at its polished variant; returns
  // the routing minimizer of the better one.
  std::vector<double> offer_dual(std::span<const double> d) {
    DualPoint dual = unscale_dual(d);
    DualEvaluation ev = evaluate_dual(prog, dual, opt.execution);
    if (ev.value > st.best_dual) {
      st.best_dual = ev.value;
      best_dual_point = dual;
    }
    // For fixed lambda and zeta the best mu makes P's reduced cost zero, and
    // nu = mu is then optimal.
    DualPoint polished = dual;
    for (int h = 0; h < prog.num_hyperarcs(); ++h) {
      polished.mu[h] = (1.0 + polished.zeta[prog.hyperarc_node[h]]) / prog.hyperarcs[h].gamma;
      polished.nu[h] = polished.mu[h];
    }
    DualEvaluation pev = evaluate_dual(prog, polished, opt.execution);
    if (pev.value > st.best_dual) {
      st.best_dual = pev.value;
      best_dual_point = polished;
    }
    return pev.value > ev.value ? std::move(pev.minimizer) : std::move(ev.minimizer);
  }

  void update_gap() {
    double gap = kInf;
    if (std::isfinite(st.best_primal)) {
      gap = std::max(0.0, st.best_primal - st.best_dual) / std::max(st.best_primal, 1e-12);
    }
    st.best_gap = std::min(st.best_gap, gap);
  }

  void restart() {
    // Caps grow where the averaged multipliers press against them.
    bool pressed[kBlocks] = {};
    for (int r = 0; r < m; ++r) {
      if (std::abs(st.dual_avg[r]) >= kCapPressure * cap[block[r]]) pressed[block[r]] = true;
    }
    for (int b = 0; b < kBlocks; ++b) {
      if (pressed[b]) cap[b] *= 2.0;
    }
    // Rebalance the primal weight toward the ratio of dual to primal
    // movement over the epoch.
    if (opt.primal_weight == 0.0 && !restart_primal.empty()) {
      double dp = 0.0, dd = 0.0;
      for (int j = 0; j < n; ++j) dp += (st.primal_avg[j] - restart_primal[j]) * (st.primal_avg[j] - restart_primal[j]);
      for (int r = 0; r < m; ++r) dd += (st.dual_avg[r] - restart_dual[r]) * (st.dual_avg[r] - restart_dual[r]);
      if (dp > 1e-20 && dd > 1e-20) omega = std::exp(0.5 * std::log(std::sqrt(dd / dp)) + 0.5 * std::log(omega));
    }
    // Widen the budget margin while averaged points still overshoot.
    std::vector<double> avg = unscale_primal(st.primal_avg);
    repair(avg);
    if (!within_budget(node_load(avg))) set_margin(std::min(kMaxMargin, 2.0 * margin));

    restart_primal = st.primal_avg;
    restart_dual = st.dual_avg;
    st.primal_center = st.primal_avg;
    st.dual_center = st.dual_avg;
    st.primal = st.primal_center;
    st.dual = st.dual_center;
    std::fill(st.s.begin(), st.s.end(), 0.0);
    st.S = 0.0;
    st.k = 0;
    ++restarts;
    epoch_start_gap = st.best_gap;
  }

  // Prox step from `from` against the weighted direction `dir`.
  void prox(std::span<const double> from_p, std::span<const double> from_d,
            std::span<const double> dir, double theta, std::span<double> to_p,
            std::span<double> to_d, std::vector<ProjectionWarmStart>& starts) {
    for (int j = 0; j < n; ++j) to_p[j] = from_p[j] - dir[j] / (theta * omega);
    for (int r = 0; r < m; ++r) to_d[r] = from_d[r] - dir[n + r] * omega / theta;
    project_primal(to_p, starts);
    project_dual(to_d);
  }

  void step() {
    std::vector<double> g(n + m);
    subgradient(st.primal, st.dual, g);
    const bool extrapolate = opt.step_rule == StepRule::kExtrapolated;
    if (theta_hat == 0.0) {
      if (opt.theta_hat > 0.0) {
        theta_hat = opt.theta_hat;
      } else if (extrapolate) {
        theta_hat = operator_norm();
      } else {
        theta_hat = std::max(1e-12, norm2(g) / std::sqrt(double(n + m)));
      }
    }
    if (extrapolate) {
      // Extragradient point y = T(x, g(x)); the aggregated subgradient and
      // the averages use g(y) and y.
      st.theta = theta_hat;
      prox(st.primal, st.dual, g, st.theta, probe_p, probe_d, warm_probe);
      subgradient(probe_p, probe_d, g);
    } else {
      probe_p = st.primal;
      probe_d = st.dual;
      st.theta = theta_hat * std::sqrt(st.k + 2.0);
    }
    accumulate_subgradient(st, g, 1.0);
    ++st.k;
    const double w = 1.0 / st.S;
    for (int j = 0; j < n; ++j) st.primal_avg[j] += w * (probe_p[j] - st.primal_avg[j]);
    for (int r = 0; r < m; ++r) st.dual_avg[r] += w * (probe_d[r] - st.dual_avg[r]);
    prox(st.primal_center, st.dual_center, st.s, st.theta, st.primal, st.dual, warm);
  }

  void bookkeeping() {
    offer_primal(unscale_primal(probe_p));
    offer_primal(unscale_primal(st.primal_avg));
    std::vector<double> routed = offer_dual(probe_d);
    offer_primal(std::move(routed));
    routed = offer_dual(st.dual_avg);
    offer_primal(std::move(routed));
    update_gap();
  }

  void record() {
    ++iterations;
    if (!opt.record_trace) return;
    TraceRow row;
    row.iter = iterations;
    row.dual_value = st.best_dual;
    row.primal_value = st.best_primal;
    row.gap = st.best_gap;
    row.max_residual = best_residual;
    row.wallclock_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    trace.push_back(row);
  }

  void iterate() {
    step();
    bookkeeping();
    record();
    if (!opt.restart) return;
    if (st.best_gap <= 0.5 * epoch_start_gap && std::isfinite(st.best_gap)) {
      restart();
    } else if (st.k >= kFirstEpochLength && st.k >= kLongEpoch * iterations) {
      restart();
    }
  }
};

PdsgSolver::PdsgSolver(const FlowProgram& program, const PdsgOptions& options)
    : impl_(std::make_unique<Impl>(program, options)) {}

PdsgSolver::~PdsgSolver() = default;

const IterationState& PdsgSolver::state() const { return impl_->st; }

const std::vector<double>& PdsgSolver::best_point() const { return impl_->best_point; }

std::vector<double> PdsgSolver::subgradient(std::span<const double> primal,
                                            std::span<const double> dual) const {
  std::vector<double> g(impl_->n + impl_->m);
  impl_->subgradient(primal, dual, g);
  return g;
}

std::vector<double> PdsgSolver::scale_primal(std::span<const double> values) const {
  std::vector<double> p(impl_->n);
  for (int j = 0; j < impl_->n; ++j) p[j] = values[j] / impl_->D[j];
  return p;
}

std::vector<double> PdsgSolver::unscale_primal(std::span<const double> scaled) const {
  return impl_->unscale_primal(scaled);
}

std::vector<double> PdsgSolver::scale_dual(const DualPoint& dual) const {
  return impl_->scale_dual(dual);
}

DualPoint PdsgSolver::unscale_dual(std::span<const double> scaled) const {
  return impl_->unscale_dual(scaled);
}

void PdsgSolver::project(std::span<double> primal, std::span<double> dual) {
  impl_->project_primal(primal, impl_->warm);
  impl_->project_dual(dual);
}

void PdsgSolver::iterate() { impl_->iterate(); }

SolveReport PdsgSolver::solve() {
  Impl& s = *impl_;
  s.start = std::chrono::steady_clock::now();
  SolveReport rep;
  if (s.C == 0) {
    // Nothing to route: the zero point is optimal and g(0) = 0 certifies it.
    s.best_point.assign(s.n, 0.0);
    s.st.best_primal = 0.0;
    s.st.best_gap = 0.0;
    s.record();
    rep.status = PdsgStatus::kConverged;
  } else {
    s.bookkeeping();
    s.epoch_start_gap = s.st.best_gap;
    rep.status = PdsgStatus::kIterationLimit;
    while (s.iterations < s.opt.max_iter) {
      s.iterate();
      if (s.st.best_gap <= s.opt.gap_tol) {
        rep.status = PdsgStatus::kConverged;
        break;
      }
      if (s.opt.time_limit_s > 0.0 &&
          std::chrono::duration<double>(std::chrono::steady_clock::now() - s.start).count() >
              s.opt.time_limit_s) {
        rep.status = PdsgStatus::kTimeLimit;
        break;
      }
    }
  }
  rep.objective = s.st.best_primal;
  rep.dual_bound = s.st.best_dual;
  rep.gap = s.st.best_gap;
  rep.max_residual = s.best_residual;
  rep.iterations = s.iterations;
  rep.restarts = s.restarts;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - s.start).count();
  rep.primal = s.best_point;
  rep.dual = s.best_dual_point;
  rep.trace = s.trace;
  return rep;
}

SolveReport solve_pdsg(const FlowProgram& program, const PdsgOptions& options) {
  PdsgSolver solver(program, options);
  return solver.solve();
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
  out << "iter,dual_value,primal_value,gap,max_residual,wallclock_ns\n";
  const auto old_precision = out.precision(17);
  for (const TraceRow& r : trace) {
    out << r.iter << ',' << r.dual_value << ',' << r.primal_value << ',' << r.gap << ','
        << r.max_residual << ',' << r.wallclock_ns << '\n';
  }
  out.precision(old_precision);
}

SlaterResult slater_check(const FlowProgram& program) {
  // max t  s.t. (coding, capacity, budget rows) - t >= rhs, t <= 1, with the
  // artificial boxes on y, z and P lifted (they are not constraints of the
  // problem, only of the solver's search set).
  LinearProgram lp = program.lp;
  std::fill(lp.cost.begin(), lp.cost.end(), 0.0);
  const VariableIndex& ix = program.index;
  for (int h = 0; h < program.num_hyperarcs(); ++h) {
    for (int mm = 0; mm < program.num_sessions(); ++mm) lp.upper[ix.y(h, mm)] = kInfinity;
    lp.upper[ix.z(h)] = kInfinity;
    lp.upper[ix.power(h)] = kInfinity;
  }
  // t = t_plus - 1 with t_plus in [0, 2] keeps every column nonnegative.
  const int t_col = lp.add_column(-1.0, 2.0);
  std::vector<int> strict_rows;
  for (int r = 0; r < lp.num_rows(); ++r) {
    if (lp.rows[r].sense != RowSense::kGreaterEqual) continue;
    lp.rows[r].cols.push_back(t_col);
    lp.rows[r].vals.push_back(-1.0);
    lp.rows[r].rhs -= 1.0;
    strict_rows.push_back(r);
  }
  SlaterResult res;
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    if (sol.status == LpStatus::kInfeasible) return res;
    throw std::logic_error("slater_check: max-slack program did not solve");
  }
  res.min_slack = sol.x[t_col] - 1.0;
  res.holds = res.min_slack > 1e-9;
  if (!res.holds) {
    for (int r : strict_rows) {
      if (sol.dual[r] > 1e-9) res.blocking_rows.push_back(r);
    }
  }
  return res;
}

}  // namespace lowsnr

// Mehrotra predictor-corrector interior point method with upper bounds.
//
// The program is brought to  min c.x  s.t.  A x = b,  0 <= x <= u  by adding
// one slack column per inequality row and dropping columns fixed at zero,
// then equilibrated (Ruiz) before iterating. The normal equations
// A Theta A^T dy = r are factorized with a sparse LDL^T. A tiny diagonal
// regularization, relative to each row's own diagonal, keeps the
// factorization defined when rows are linearly dependent (flow conservation
// rows always are); a few refinement steps against the unregularized matrix
// remove its effect. Iterates that stop improving near convergence are
// accepted at a looser tolerance.
//
// When the iteration fails to converge, an elastic phase-1 program decides
// infeasibility and its row duals become the Farkas certificate.
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "lowsnr/lp.h"

namespace lowsnr {
namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr double kStepFraction = 0.9995;
constexpr double kRegularization = 1e-11;
constexpr double kDivergence = 1e14;
constexpr double kLooseTolerance = 1e-9;
constexpr int kStallLimit = 8;
constexpr double kStallWatch = 1e-6;  // stall detection starts below this merit
constexpr int kRefinementSteps = 3;

struct StandardForm {
  SpMat A;                     // m x N, equilibrated
  Vec b, c, u;                 // u_j = +inf for unbounded columns
  std::vector<char> bounded;   // u_j finite
  Vec row_scale;               // original row r = row_scale_r^-1 * scaled row
  Vec col_scale;               // x_j = col_scale_j * x_hat_j * b_scale
  double b_scale = 1.0;
  double c_scale = 1.0;
  std::vector<int> col_origin;  // original column, or -1 - row for slacks
  std::vector<int> kept_col;    // original column -> standard column or -1
  bool trivially_infeasible = false;
  int infeasible_row = -1;
};

StandardForm to_standard_form(const LinearProgram& lp, int scaling_passes) {
  StandardForm sf;
  const int m = lp.num_rows();
  const int n = lp.num_cols();
  sf.kept_col.assign(n, -1);
  for (int j = 0; j < n; ++j) {
    if (lp.upper[j] > 0.0) {
      sf.kept_col[j] = static_cast<int>(sf.col_origin.size());
      sf.col_origin.push_back(j);
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> rhs(m);
  for (int r = 0; r < m; ++r) {
    const LpRow& row = lp.rows[r];
    rhs[r] = row.rhs;
    bool any = false;
    for (std::size_t k = 0; k < row.cols.size(); ++k) {
      const int j = sf.kept_col[row.cols[k]];
      if (j < 0 || row.vals[k] == 0.0) continue;
      trip.emplace_back(r, j, row.vals[k]);
      any = true;
    }
    if (row.sense != RowSense::kEqual) {
      const int s = static_cast<int>(sf.col_origin.size());
      sf.col_origin.push_back(-1 - r);
      trip.emplace_back(r, s, row.sense == RowSense::kGreaterEqual ? -1.0 : 1.0);
      any = true;
    }
    if (!any && std::abs(row.rhs) > 0.0 && !sf.trivially_infeasible) {
      sf.trivially_infeasible = true;
      sf.infeasible_row = r;
    }
  }
  const int N = static_cast<int>(sf.col_origin.size());
  sf.A.resize(m, N);
  sf.A.setFromTriplets(trip.begin(), trip.end(), [](double a, double b) { return a + b; });
  sf.A.makeCompressed();
  sf.b = Eigen::Map<Vec>(rhs.data(), m);
  sf.c = Vec::Zero(N);
  sf.u = Vec::Constant(N, kInfinity);
  for (int j = 0; j < N; ++j) {
    if (sf.col_origin[j] >= 0) {
      sf.c[j] = lp.cost[sf.col_origin[j]];
      sf.u[j] = lp.upper[sf.col_origin[j]];
    }
  }

  // Ruiz equilibration.
  sf.row_scale = Vec::Ones(m);
  sf.col_scale = Vec::Ones(N);
  for (int pass = 0; pass < scaling_passes; ++pass) {
    Vec rmax = Vec::Zero(m), cmax = Vec::Zero(N);
    for (int j = 0; j < N; ++j) {
      for (SpMat::InnerIterator it(sf.A, j); it; ++it) {
        const double a = std::abs(it.value());
        rmax[it.row()] = std::max(rmax[it.row()], a);
        cmax[j] = std::max(cmax[j], a);
      }
    }
    Vec rs(m), cs(N);
    for (int r = 0; r < m; ++r) rs[r] = rmax[r] > 0 ? 1.0 / std::sqrt(rmax[r]) : 1.0;
    for (int j = 0; j < N; ++j) cs[j] = cmax[j] > 0 ? 1.0 / std::sqrt(cmax[j]) : 1.0;
    sf.A = rs.asDiagonal() * sf.A * cs.asDiagonal();
    sf.row_scale.array() *= rs.array();
    sf.col_scale.array() *= cs.array();
  }
  sf.A.makeCompressed();
  sf.b = sf.row_scale.asDiagonal() * sf.b;
  sf.c = sf.col_scale.asDiagonal() * sf.c;
  for (int j = 0; j < N; ++j) sf.u[j] /= sf.col_scale[j];

  sf.b_scale = std::max(1.0, m > 0 ? sf.b.lpNorm<Eigen::Infinity>() : 0.0);
  sf.c_scale = std::max(1.0, N > 0 ? sf.c.lpNorm<Eigen::Infinity>() : 0.0);
  sf.b /= sf.b_scale;
  sf.u /= sf.b_scale;
  sf.c /= sf.c_scale;
  sf.bounded.resize(N);
  for (int j = 0; j < N; ++j) sf.bounded[j] = std::isfinite(sf.u[j]) ? 1 : 0;
  return sf;
}

struct Iterate {
  Vec x, w, y, z, v;  // w, v are zero on unbounded columns
};

struct Direction {
  Vec dx, dw, dy, dz, dv;
};

class NormalSolver {
 public:
  explicit NormalSolver(const SpMat& A) : A_(A), At_(A.transpose()) {}

  bool factorize(const Vec& theta) {
    theta_ = theta;
    M_ = A_ * theta.asDiagonal() * At_;
    SpMat reg = M_;
    for (int r = 0; r < reg.rows(); ++r) {
      reg.coeffRef(r, r) += kRegularization * (reg.coeff(r, r) + 1e-8);
    }
    if (!analyzed_) {
      ldlt_.analyzePattern(reg);
      analyzed_ = true;
    }
    ldlt_.factorize(reg);
    return ldlt_.info() == Eigen::Success;
  }

  Vec solve(const Vec& rhs) const {
    Vec dy = ldlt_.solve(rhs);
    for (int step = 0; step < kRefinementSteps; ++step) {
      Vec res = rhs - M_ * dy;
      dy += ldlt_.solve(res);
    }
    return dy;
  }

 private:
  const SpMat& A_;
  SpMat At_;
  SpMat M_;
  Vec theta_;
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

double max_step(const Vec& val, const Vec& dir, const std::vector<char>* mask) {
  double alpha = 1.0;
  for (int j = 0; j < val.size(); ++j) {
    if (mask && !(*mask)[j]) continue;
    if (dir[j] < 0.0) alpha = std::min(alpha, -val[j] / dir[j]);
  }
  return alpha;
}

enum class IpmOutcome { kConverged, kStalled };

struct IpmResult {
  IpmOutcome outcome = IpmOutcome::kStalled;
  Iterate it;
  int iterations = 0;
};

IpmResult run_ipm(const StandardForm& sf, const IpmOptions& opt) {
  const int m = static_cast<int>(sf.A.rows());
  const int N = static_cast<int>(sf.A.cols());
  const auto& bd = sf.bounded;
  IpmResult res;
  Iterate& it = res.it;
  it.x.resize(N);
  it.w = Vec::Zero(N);
  it.z = Vec::Ones(N);
  it.v = Vec::Zero(N);
  it.y = Vec::Zero(m);
  for (int j = 0; j < N; ++j) {
    if (bd[j]) {
      it.x[j] = sf.u[j] < 2.0 ? 0.5 * sf.u[j] : 1.0;
      it.w[j] = sf.u[j] - it.x[j];
      it.v[j] = 1.0;
    } else {
      it.x[j] = 1.0;
    }
  }
  int nb = 0;
  for (char f : bd) nb += f;
  const double bnorm = 1.0 + (m > 0 ? sf.b.lpNorm<Eigen::Infinity>() : 0.0);
  const double cnorm = 1.0 + (N > 0 ? sf.c.lpNorm<Eigen::Infinity>() : 0.0);

  NormalSolver normal(sf.A);
  Vec theta(N);
  Iterate best = it;
  double best_merit = kInfinity;
  int stall = 0;
  auto solve_direction = [&](const Vec& rp, const Vec& ru, const Vec& rd, const Vec& rxz,
                             const Vec& rwv, Direction& d) {
    Vec rhat = rd - (rxz.array() / it.x.array()).matrix();
    for (int j = 0; j < N; ++j) {
      if (bd[j]) rhat[j] += (rwv[j] - it.v[j] * ru[j]) / it.w[j];
    }
    Vec rhs = rp + sf.A * (theta.asDiagonal() * rhat);
    d.dy = normal.solve(rhs);
    d.dx = theta.asDiagonal() * (sf.A.transpose() * d.dy - rhat);
    d.dz = ((rxz.array() - it.z.array() * d.dx.array()) / it.x.array()).matrix();
    d.dw = Vec::Zero(N);
    d.dv = Vec::Zero(N);
    for (int j = 0; j < N; ++j) {
      if (!bd[j]) continue;
      d.dw[j] = ru[j] - d.dx[j];
      d.dv[j] = (rwv[j] - it.v[j] * d.dw[j]) / it.w[j];
    }
  };

  for (int k = 0; k < opt.max_iterations; ++k) {
    res.iterations = k + 1;
    Vec rp = sf.b - sf.A * it.x;
    Vec ru = Vec::Zero(N);
    for (int j = 0; j < N; ++j) {
      if (bd[j]) ru[j] = sf.u[j] - it.x[j] - it.w[j];
    }
    Vec rd = sf.c - sf.A.transpose() * it.y - it.z + it.v;
    double comp = it.x.dot(it.z) + it.w.dot(it.v);
    const double mu = comp / std::max(1, N + nb);
    double pobj = sf.c.dot(it.x);
    double dobj = sf.b.dot(it.y);
    for (int j = 0; j < N; ++j) {
      if (bd[j]) dobj -= sf.u[j] * it.v[j];
    }
    const double pres = std::max(m > 0 ? rp.lpNorm<Eigen::Infinity>() : 0.0,
                                 N > 0 ? ru.lpNorm<Eigen::Infinity>() : 0.0) /
                        bnorm;
    const double dres = (N > 0 ? rd.lpNorm<Eigen::Infinity>() : 0.0) / cnorm;
    const double gap =
        std::abs(pobj - dobj) / std::max({std::abs(pobj), std::abs(dobj), opt.objective_floor});
    const double merit = std::max({pres, dres, gap, mu});
    if (merit < best_merit) {
      best_merit = merit;
      best = it;
      stall = 0;
    } else if (best_merit < kStallWatch && ++stall > kStallLimit) {
      break;
    }
    if (pres <= opt.tolerance && dres <= opt.tolerance && gap <= opt.tolerance &&
        mu <= opt.tolerance) {
      res.outcome = IpmOutcome::kConverged;
      return res;
    }
    if (!std::isfinite(mu) || it.x.lpNorm<Eigen::Infinity>() > kDivergence ||
        (m > 0 && it.y.lpNorm<Eigen::Infinity>() > kDivergence)) {
      break;
    }

    for (int j = 0; j < N; ++j) {
      double inv = it.z[j] / it.x[j];
      if (bd[j]) inv += it.v[j] / it.w[j];
      theta[j] = 1.0 / inv;
    }
    if (!normal.factorize(theta)) break;

    // Predictor.
    Direction aff;
    Vec rxz = -(it.x.array() * it.z.array()).matrix();
    Vec rwv = -(it.w.array() * it.v.array()).matrix();
    solve_direction(rp, ru, rd, rxz, rwv, aff);
    const double ap_aff = std::min(max_step(it.x, aff.dx, nullptr), max_step(it.w, aff.dw, &bd));
    const double ad_aff = std::min(max_step(it.z, aff.dz, nullptr), max_step(it.v, aff.dv, &bd));
    double comp_aff = (it.x + ap_aff * aff.dx).dot(it.z + ad_aff * aff.dz);
    for (int j = 0; j < N; ++j) {
      if (bd[j]) comp_aff += (it.w[j] + ap_aff * aff.dw[j]) * (it.v[j] + ad_aff * aff.dv[j]);
    }
    const double mu_aff = comp_aff / std::max(1, N + nb);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

    // Corrector.
    Direction d;
    rxz = (sigma * mu - it.x.array() * it.z.array() - aff.dx.array() * aff.dz.array()).matrix();
    rwv = Vec::Zero(N);
    for (int j = 0; j < N; ++j) {
      if (bd[j]) rwv[j] = sigma * mu - it.w[j] * it.v[j] - aff.dw[j] * aff.dv[j];
    }
    solve_direction(rp, ru, rd, rxz, rwv, d);
    const double ap =
        std::min(1.0, kStepFraction * std::min(max_step(it.x, d.dx, nullptr),
                                               max_step(it.w, d.dw, &bd)));
    const double ad =
        std::min(1.0, kStepFraction * std::min(max_step(it.z, d.dz, nullptr),
                                               max_step(it.v, d.dv, &bd)));
    it.x += ap * d.dx;
    it.w += ap * d.dw;
    it.y += ad * d.dy;
    it.z += ad * d.dz;
    it.v += ad * d.dv;
  }
  // Stalled: accept the best iterate if it meets the loose tolerance.
  if (best_merit <= kLooseTolerance) {
    res.it = best;
    res.outcome = IpmOutcome::kConverged;
  }
  return res;
}

// Elastic program: the same rows with violation columns, minimizing their sum.
LinearProgram elastic_program(const LinearProgram& lp) {
  LinearProgram e;
  e.cost.assign(lp.num_cols(), 0.0);
  e.upper = lp.upper;
  e.rows = lp.rows;
  for (auto& row : e.rows) {
    if (row.sense != RowSense::kLessEqual) {
      row.cols.push_back(e.add_column(1.0, kInfinity));
      row.vals.push_back(1.0);
    }
    if (row.sense != RowSense::kGreaterEqual) {
      row.cols.push_back(e.add_column(1.0, kInfinity));
      row.vals.push_back(-1.0);
    }
  }
  return e;
}

LpSolution recover(const LinearProgram& lp, const StandardForm& sf, const Iterate& it) {
  const int m = lp.num_rows();
  const int n = lp.num_cols();
  LpSolution sol;
  sol.x.assign(n, 0.0);
  for (std::size_t j = 0; j < sf.col_origin.size(); ++j) {
    const int o = sf.col_origin[j];
    if (o < 0) continue;
    sol.x[o] = std::clamp(it.x[j] * sf.col_scale[j] * sf.b_scale, 0.0, lp.upper[o]);
  }
  sol.dual.assign(m, 0.0);
  for (int r = 0; r < m; ++r) sol.dual[r] = it.y[r] * sf.row_scale[r] * sf.c_scale;
  sol.reduced_cost = lp.cost;
  for (int r = 0; r < m; ++r) {
    const LpRow& row = lp.rows[r];
    for (std::size_t k = 0; k < row.cols.size(); ++k) {
      sol.reduced_cost[row.cols[k]] -= row.vals[k] * sol.dual[r];
    }
  }
  sol.primal_objective = 0.0;
  for (int j = 0; j < n; ++j) sol.primal_objective += lp.cost[j] * sol.x[j];
  // Dual objective from the Lagrangian: b.y plus the bound contributions of
  // the reduced costs (negative reduced cost pays at the upper bound).
  double dobj = 0.0;
  for (int r = 0; r < m; ++r) dobj += lp.rows[r].rhs * sol.dual[r];
  double dual_res = 0.0;
  for (int j = 0; j < n; ++j) {
    const double rc = sol.reduced_cost[j];
    if (rc < 0.0) {
      if (std::isfinite(lp.upper[j])) {
        dobj += rc * lp.upper[j];
      } else {
        dual_res = std::max(dual_res, -rc);
      }
    }
  }
  sol.dual_objective = dobj;

  double pres = 0.0, cmax = 0.0;
  for (int r = 0; r < m; ++r) {
    const LpRow& row = lp.rows[r];
    double norm = 0.0;
    for (double a : row.vals) norm = std::max(norm, std::abs(a));
    norm = std::max(norm, 1e-300);
    const double slack = row.activity(sol.x) - row.rhs;
    double viol = 0.0;
    switch (row.sense) {
      case RowSense::kEqual: viol = std::abs(slack); break;
      case RowSense::kGreaterEqual: viol = std::max(0.0, -slack); break;
      case RowSense::kLessEqual: viol = std::max(0.0, slack); break;
    }
    pres = std::max(pres, viol / norm);
    if (row.sense == RowSense::kGreaterEqual) dual_res = std::max(dual_res, -sol.dual[r]);
    if (row.sense == RowSense::kLessEqual) dual_res = std::max(dual_res, sol.dual[r]);
    if (row.sense != RowSense::kEqual) {
      cmax = std::max(cmax, std::abs(slack / norm * sol.dual[r]));
    }
  }
  for (int j = 0; j < n; ++j) {
    const double rc = sol.reduced_cost[j];
    if (rc > 0.0) cmax = std::max(cmax, rc * sol.x[j]);
    if (rc < 0.0 && std::isfinite(lp.upper[j])) {
      cmax = std::max(cmax, -rc * (lp.upper[j] - sol.x[j]));
    }
  }
  sol.max_primal_residual = pres;
  sol.max_dual_residual = dual_res;
  sol.max_complementarity = cmax;
  return sol;
}

LpSolution solve_impl(const LinearProgram& lp, const IpmOptions& opt, bool allow_phase1) {
  StandardForm sf = to_standard_form(lp, opt.scaling_passes);
  IpmResult res;
  if (!sf.trivially_infeasible) res = run_ipm(sf, opt);
  if (res.outcome == IpmOutcome::kConverged) {
    LpSolution sol = recover(lp, sf, res.it);
    sol.status = LpStatus::kOptimal;
    sol.iterations = res.iterations;
    return sol;
  }
  LpSolution sol;
  sol.iterations = res.iterations;
  if (!allow_phase1) return sol;

  const LinearProgram elastic = elastic_program(lp);
  LpSolution p1 = solve_impl(elastic, opt, false);
  if (p1.status != LpStatus::kOptimal) return sol;
  double scale = 0.0;
  for (const auto& row : lp.rows) {
    scale = std::max(scale, std::abs(row.rhs));
  }
  if (p1.primal_objective > 1e-8 * std::max(1.0, scale)) {
    sol.status = LpStatus::kInfeasible;
    sol.farkas = p1.dual;
    sol.x.assign(p1.x.begin(), p1.x.begin() + lp.num_cols());
    return sol;
  }
  // Feasible but the main iteration failed: with a nonnegative objective on
  // bounded data this is numerical trouble, otherwise the program is unbounded.
  bool bounded = true;
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (lp.cost[j] < 0.0 && !std::isfinite(lp.upper[j])) bounded = false;
  }
  sol.status = bounded ? LpStatus::kNumericalFailure : LpStatus::kUnbounded;
  return sol;
}

}  // namespace

const char* lp_status_name(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

LpSolution solve_lp(const LinearProgram& lp, const IpmOptions& options) {
  return solve_impl(lp, options, true);
}

double farkas_margin(const LinearProgram& lp, const std::vector<double>& weights) {
  if (static_cast<int>(weights.size()) != lp.num_rows()) return -kInfinity;
  std::vector<double> aty(lp.num_cols(), 0.0);
  double margin = 0.0;
  for (int r = 0; r < lp.num_rows(); ++r) {
    const LpRow& row = lp.rows[r];
    double w = weights[r];
    if (row.sense == RowSense::kGreaterEqual) w = std::max(0.0, w);
    if (row.sense == RowSense::kLessEqual) w = std::min(0.0, w);
    margin += w * row.rhs;
    for (std::size_t k = 0; k < row.cols.size(); ++k) aty[row.cols[k]] += row.vals[k] * w;
  }
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (aty[j] <= 0.0) continue;
    if (!std::isfinite(lp.upper[j])) return -kInfinity;
    margin -= lp.upper[j] * aty[j];
  }
  return margin;
}

}  // namespace lowsnr

// Solver-neutral sparse linear program and a primal-dual interior point
// solver for it.
//
//   minimize    cost . x
//   subject to  row_r . x  (>= | = | <=)  rhs_r
//               0 <= x_j <= upper_j        (upper_j may be +infinity)
#pragma once

#include <limits>
#include <string>
#include <vector>

namespace lowsnr {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kGreaterEqual, kEqual, kLessEqual };

struct LpRow {
  RowSense sense = RowSense::kEqual;
  double rhs = 0.0;
  std::vector<int> cols;
  std::vector<double> vals;

  double activity(const std::vector<double>& x) const {
    double a = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) a += vals[k] * x[cols[k]];
    return a;
  }
};

struct LinearProgram {
  std::vector<double> cost;
  std::vector<double> upper;
  std::vector<LpRow> rows;

  int num_cols() const { return static_cast<int>(cost.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
  int add_column(double c, double ub) {
    cost.push_back(c);
    upper.push_back(ub);
    return num_cols() - 1;
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };
const char* lp_status_name(LpStatus status);

struct IpmOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;  // relative residuals and gap, on equilibrated data
  int scaling_passes = 12;
  // The duality gap is measured relative to max(|primal|, |dual|, floor).
  double objective_floor = 1e-6;
};

struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  std::vector<double> x;
  // Row multipliers with the sign convention of L = c.x - sum_r dual_r (a_r.x - b_r):
  // >= rows have dual >= 0, <= rows dual <= 0, equality rows are free.
  std::vector<double> dual;
  std::vector<double> reduced_cost;  // c - A^T dual
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double max_primal_residual = 0.0;  // on rows scaled to unit max-norm
  double max_dual_residual = 0.0;
  double max_complementarity = 0.0;  // max over rows of |slack * dual| and bound pairs
  int iterations = 0;
  // When infeasible: row weights w with the sign convention above such that
  // w.b - sum_j upper_j max(0, (A^T w)_j) > 0 while A^T w <= 0 on unbounded
  // columns, proving that no x satisfies the rows and bounds.
  std::vector<double> farkas;
};

// Deterministic: identical input gives bit-identical output.
LpSolution solve_lp(const LinearProgram& lp, const IpmOptions& options = {});

// Checks a Farkas certificate against the program; returns the certified
// infeasibility margin (positive when the certificate is valid).
double farkas_margin(const LinearProgram& lp, const std::vector<double>& weights);

}  // namespace lowsnr

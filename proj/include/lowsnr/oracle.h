// Exact reference solver for the flow program: the interior point method of
// lp.h run to tight tolerances, with the optimality certificate checked.
#pragma once

#include "lowsnr/formulation.h"
#include "lowsnr/lp.h"

namespace lowsnr {

using OracleSolution = LpSolution;

inline constexpr double kOracleResidualTolerance = 1e-8;
inline constexpr double kOracleGapTolerance = 1e-7;

// Status kOptimal comes with primal/dual objectives agreeing within
// kOracleGapTolerance (relative) and residuals within
// kOracleResidualTolerance on the normalized rows; kInfeasible with a Farkas
// certificate. Throws std::logic_error when the solver reports an unbounded
// program or fails numerically, neither of which a well-formed flow program
// can produce.
OracleSolution solve_exact(const FlowProgram& program, const IpmOptions& options = {});

// Relative primal/dual objective gap of an optimal solution.
double relative_gap(const OracleSolution& sol);

}  // namespace lowsnr

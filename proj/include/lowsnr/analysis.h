// Accuracy of the linear low-SNR capacity model, and side-by-side runs of the
// exact and first-order solvers.
#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowsnr/lp.h"
#include "lowsnr/model.h"
#include "lowsnr/pdsg.h"

namespace lowsnr {

// Rows with SNR per degree of freedom above this are outside the regime where
// the linear model is within about 0.5% of capacity.
inline constexpr double kLowSnrThreshold = 0.01;

struct ApproximationRow {
  double snr_per_dof = 0.0;  // P / (W D^alpha N0)
  double exact_rate = 0.0;   // W ln(1 + x)
  double linear_rate = 0.0;  // P / (D^alpha N0)
  double relative_error = 0.0;  // (linear - exact) / linear
  bool out_of_regime = false;
};

struct ApproximationReport {
  std::vector<ApproximationRow> rows;
  double max_relative_error = 0.0;
  double regime_threshold = kLowSnrThreshold;
};

ApproximationRow linearity_error(double power, double distance, double alpha,
                                 double noise_density, double bandwidth);

// One row per snr value x, at D = W = N0 = 1 and P = x.
ApproximationReport linearity_sweep(std::span<const double> snr_values);

// Rate of transmitter i at receiver j while every node of `transmitters`
// sends at its full power budget. The SINR divides the interferers' received
// power by N0 inside the W (N0 + sum) denominator.
struct InterferenceRow {
  NodeId transmitter = 0;
  NodeId receiver = 0;
  double snr_per_dof = 0.0;           // P_i / (W D_ij^alpha N0)
  double sinr = 0.0;
  double exact_rate = 0.0;            // W ln(1 + sinr)
  double interference_free_rate = 0.0;  // W ln(1 + snr_per_dof)
  double linear_rate = 0.0;           // P_i / (D_ij^alpha N0)
  double step_one_error = 0.0;        // (interference_free - exact) / interference_free
  double step_two_error = 0.0;        // (linear - interference_free) / linear
  double total_error = 0.0;           // (linear - exact) / linear
  bool out_of_regime = false;
};

struct InterferenceReport {
  std::vector<InterferenceRow> rows;
  double max_step_one_error = 0.0;
  double max_total_error = 0.0;
  double regime_threshold = kLowSnrThreshold;
};

// One row per transmitter in `transmitters`, all aimed at `receiver`. Throws
// std::invalid_argument on an empty set, unknown ids or a receiver inside the
// set.
InterferenceReport interference_error(const NetworkInstance& instance,
                                      std::span<const NodeId> transmitters, NodeId receiver);

// Two transmitters of equal power at unit distance from one receiver
// (W = N0 = 1, alpha = 2); two rows per power.
NetworkInstance two_transmitter_instance(double power);
InterferenceReport interference_sweep(std::span<const double> powers);

struct CompareOptions {
  PdsgOptions pdsg;
  IpmOptions ipm;
};

struct ComparisonRow {
  std::string label;
  int node_count = 0;
  int session_count = 0;
  double oracle_objective = 0.0;
  double pdsg_objective = 0.0;
  // (pdsg - oracle) / pdsg, the same normalization as the solver's own gap,
  // so a converged run lands in [-1e-9, gap_tol].
  double relative_gap = 0.0;
  double pdsg_gap = 0.0;
  int iterations = 0;
  PdsgStatus pdsg_status = PdsgStatus::kConverged;
  double oracle_seconds = 0.0;
  double pdsg_seconds = 0.0;
};

struct Comparison {
  ComparisonRow row;
  std::vector<TraceRow> trace;
};

// Thrown when the exact solver cannot certify an optimum.
class OracleFailure : public std::runtime_error {
 public:
  explicit OracleFailure(LpStatus status)
      : std::runtime_error(std::string("exact solver status: ") + lp_status_name(status)),
        status_(status) {}
  LpStatus status() const { return status_; }

 private:
  LpStatus status_;
};

Comparison compare_methods(const NetworkInstance& instance, const CompareOptions& options = {},
                           std::string label = {});

// CSV writers. Columns other than the trailing *_seconds ones are
// deterministic for a fixed seed.
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);
void write_approximation_csv(std::ostream& out, const ApproximationReport& report);
// Starts with a '#' line describing the SINR convention.
void write_interference_csv(std::ostream& out, const InterferenceReport& report);

// Standalone SVG line charts.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 400;
};

// Points that cannot be drawn (non-finite, or nonpositive on a log axis) are
// skipped.
std::string line_chart_svg(std::span<const Series> series, const ChartOptions& options);

// Relative gap against iteration, one series per trace.
std::string gap_chart_svg(std::span<const std::vector<TraceRow>> traces,
                          std::span<const std::string> names);
// Relative error of the linear model against SNR per degree of freedom.
std::string error_chart_svg(const ApproximationReport& report);

}  // namespace lowsnr

#include "lowsnr/analysis.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "lowsnr/oracle.h"

namespace lowsnr {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ApproximationRow linearity_error(double power, double distance, double alpha,
                                 double noise_density, double bandwidth) {
  ApproximationRow row;
  const double attenuated = std::pow(distance, alpha) * noise_density;
  row.snr_per_dof = power / (bandwidth * attenuated);
  row.exact_rate = bandwidth * std::log1p(row.snr_per_dof);
  row.linear_rate = power / attenuated;
  row.relative_error = (row.linear_rate - row.exact_rate) / row.linear_rate;
  row.out_of_regime = row.snr_per_dof > kLowSnrThreshold;
  return row;
}

ApproximationReport linearity_sweep(std::span<const double> snr_values) {
  ApproximationReport rep;
  for (double x : snr_values) {
    rep.rows.push_back(linearity_error(x, 1.0, 2.0, 1.0, 1.0));
    rep.max_relative_error = std::max(rep.max_relative_error, rep.rows.back().relative_error);
  }
  return rep;
}

InterferenceReport interference_error(const NetworkInstance& instance,
                                      std::span<const NodeId> transmitters, NodeId receiver) {
  if (transmitters.empty()) throw std::invalid_argument("transmitter set is empty");
  if (std::find(transmitters.begin(), transmitters.end(), receiver) != transmitters.end()) {
    throw std::invalid_argument("receiver is one of the transmitters");
  }
  auto node = [&](NodeId id) -> const NodeSpec& {
    try {
      return instance.nodes[instance.index_of(id)];
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("unknown node id " + std::to_string(id));
    }
  };
  const NodeSpec& rx = node(receiver);
  const double W = instance.bandwidth, N0 = instance.noise_density;
  auto received = [&](const NodeSpec& tx) {
    return tx.power_budget / std::pow(distance(tx.location, rx.location), instance.alpha);
  };

  InterferenceReport rep;
  for (NodeId i : transmitters) {
    const NodeSpec& tx = node(i);
    double interference = 0.0;
    for (NodeId v : transmitters) {
      if (v != i) interference += received(node(v)) / N0;
    }
    InterferenceRow row;
    row.transmitter = i;
    row.receiver = receiver;
    const double signal = received(tx);
    row.sinr = signal / (W * (N0 + interference));
    row.snr_per_dof = signal / (W * N0);
    row.exact_rate = W * std::log1p(row.sinr);
    row.interference_free_rate = W * std::log1p(row.snr_per_dof);
    row.linear_rate = signal / N0;
    row.step_one_error = (row.interference_free_rate - row.exact_rate) / row.interference_free_rate;
    row.step_two_error = (row.linear_rate - row.interference_free_rate) / row.linear_rate;
    row.total_error = (row.linear_rate - row.exact_rate) / row.linear_rate;
    row.out_of_regime = row.snr_per_dof > kLowSnrThreshold;
    rep.max_step_one_error = std::max(rep.max_step_one_error, row.step_one_error);
    rep.max_total_error = std::max(rep.max_total_error, row.total_error);
    rep.rows.push_back(row);
  }
  return rep;
}

NetworkInstance two_transmitter_instance(double power) {
  NetworkInstance inst;
  inst.nodes = {{0, {0.0, 0.0}, power}, {1, {1.0, 0.0}, power}, {2, {0.5, std::sqrt(0.75)}, 1.0}};
  return inst;
}

InterferenceReport interference_sweep(std::span<const double> powers) {
  const std::vector<NodeId> transmitters = {0, 1};
  InterferenceReport rep;
  for (double p : powers) {
    const InterferenceReport one = interference_error(two_transmitter_instance(p), transmitters, 2);
    rep.rows.insert(rep.rows.end(), one.rows.begin(), one.rows.end());
    rep.max_step_one_error = std::max(rep.max_step_one_error, one.max_step_one_error);
    rep.max_total_error = std::max(rep.max_total_error, one.max_total_error);
  }
  return rep;
}

Comparison compare_methods(const NetworkInstance& instance, const CompareOptions& options,
                           std::string label) {
  const FlowProgram program = assemble_program(instance);
  Comparison out;
  ComparisonRow& row = out.row;
  row.label = std::move(label);
  row.node_count = static_cast<int>(instance.nodes.size());
  row.session_count = static_cast<int>(instance.sessions.size());

  const auto t0 = std::chrono::steady_clock::now();
  const OracleSolution exact = solve_exact(program, options.ipm);
  row.oracle_seconds = seconds_since(t0);
  if (exact.status != LpStatus::kOptimal) throw OracleFailure(exact.status);
  row.oracle_objective = exact.primal_objective;

  SolveReport rep = solve_pdsg(program, options.pdsg);
  row.pdsg_objective = rep.objective;
  row.pdsg_gap = rep.gap;
  row.iterations = rep.iterations;
  row.pdsg_status = rep.status;
  row.pdsg_seconds = rep.seconds;
  if (!std::isfinite(rep.objective)) {
    row.relative_gap = rep.objective;
  } else if (rep.objective > 0.0) {
    row.relative_gap = (rep.objective - exact.primal_objective) / rep.objective;
  }
  out.trace = std::move(rep.trace);
  return out;
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  const auto precision = out.precision(17);
  out << "label,node_count,session_count,oracle_objective,pdsg_objective,relative_gap,"
         "pdsg_gap,iterations,pdsg_status,oracle_seconds,pdsg_seconds\n";
  for (const ComparisonRow& r : rows) {
    out << r.label << ',' << r.node_count << ',' << r.session_count << ',' << r.oracle_objective
        << ',' << r.pdsg_objective << ',' << r.relative_gap << ',' << r.pdsg_gap << ','
        << r.iterations << ',' << pdsg_status_name(r.pdsg_status) << ',' << r.oracle_seconds
        << ',' << r.pdsg_seconds << '\n';
  }
  out.precision(precision);
}

void write_approximation_csv(std::ostream& out, const ApproximationReport& report) {
  const auto precision = out.precision(17);
  out << "snr_per_dof,exact_rate,linear_rate,relative_error,out_of_regime\n";
  for (const ApproximationRow& r : report.rows) {
    out << r.snr_per_dof << ',' << r.exact_rate << ',' << r.linear_rate << ','
        << r.relative_error << ',' << (r.out_of_regime ? 1 : 0) << '\n';
  }
  out.precision(precision);
}

void write_interference_csv(std::ostream& out, const InterferenceReport& report) {
  const auto precision = out.precision(17);
  out << "# sinr = (P_i/D_ij^alpha) / (W (N0 + sum_v P_v/(D_vj^alpha N0))): the interference"
         " term carries its own 1/N0, so it does not scale like the W N0 noise term\n";
  out << "transmitter,receiver,snr_per_dof,sinr,exact_rate,interference_free_rate,linear_rate,"
         "step_one_error,step_two_error,total_error,out_of_regime\n";
  for (const InterferenceRow& r : report.rows) {
    out << r.transmitter << ',' << r.receiver << ',' << r.snr_per_dof << ',' << r.sinr << ','
        << r.exact_rate << ',' << r.interference_free_rate << ',' << r.linear_rate << ','
        << r.step_one_error << ',' << r.step_two_error << ',' << r.total_error << ','
        << (r.out_of_regime ? 1 : 0) << '\n';
  }
  out.precision(precision);
}

}  // namespace lowsnr

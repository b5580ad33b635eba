// CPLEX LP text writer. Column and row names come from FlowProgram:
//   P_i_k, z_i_k          power and total rate of the k-th hyperarc of node i
//   y_m_i_k               coded rate of session m on that hyperarc
//   x_m_t_i_k             flow of session m towards sink t on the hyperarc
//   f_m_t_i_k_l           part of that flow delivered to receiver l
// Numbers are printed with 17 significant digits; expressions wrap every
// eight terms.
#include <cstdio>
#include <sstream>

#include "lowsnr/formulation.h"

namespace lowsnr {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_terms(std::ostringstream& os, const FlowProgram& p, const std::vector<int>& cols,
                 const std::vector<double>& vals) {
  bool first = true;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (vals[k] == 0.0) continue;
    if (k > 0 && k % 8 == 0) os << "\n   ";
    const double v = vals[k];
    if (first) {
      if (v < 0) os << " -";
    } else {
      os << (v < 0 ? " - " : " + ");
    }
    const double a = v < 0 ? -v : v;
    if (a != 1.0) os << num(a) << " ";
    if (first && v >= 0) os << " ";
    os << p.column_name(cols[k]);
    first = false;
  }
  if (first) os << " 0 " << (cols.empty() ? "" : p.column_name(cols[0]));
}

}  // namespace

std::string export_lp_text(const FlowProgram& p) {
  std::ostringstream os;
  os << "\\ minimum total transmit power, network-coded multicast\n";
  os << "Minimize\n obj:";
  std::vector<int> obj_cols;
  std::vector<double> obj_vals;
  for (int j = 0; j < p.lp.num_cols(); ++j) {
    if (p.lp.cost[j] != 0.0) {
      obj_cols.push_back(j);
      obj_vals.push_back(p.lp.cost[j]);
    }
  }
  if (obj_cols.empty()) {
    os << " 0";
  } else {
    write_terms(os, p, obj_cols, obj_vals);
  }
  os << "\nSubject To\n";
  for (int r = 0; r < p.lp.num_rows(); ++r) {
    const LpRow& row = p.lp.rows[r];
    if (row.cols.empty()) continue;
    os << " " << p.row_name(r) << ":";
    write_terms(os, p, row.cols, row.vals);
    const char* sense = row.sense == RowSense::kEqual          ? " = "
                        : row.sense == RowSense::kGreaterEqual ? " >= "
                                                               : " <= ";
    os << sense << num(row.rhs) << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < p.lp.num_cols(); ++j) {
    const double ub = p.lp.upper[j];
    if (ub == kInfinity) continue;
    os << " 0 <= " << p.column_name(j) << " <= " << num(ub) << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace lowsnr

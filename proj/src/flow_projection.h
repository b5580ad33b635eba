#pragma once

#include <span>

#include "lowsnr/pdsg.h"

namespace lowsnr::detail {

// project_flows in units of the commodity's demand: the box is [0, 1] and the
// source/sink supplies are +1/-1.
ProjectionStats project_unit_flows(const FlowProgram& program, int c, std::span<const double> raw,
                                   std::span<double> out, ProjectionWarmStart* warm);

}  // namespace lowsnr::detail

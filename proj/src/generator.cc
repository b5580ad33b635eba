#include <algorithm>
#include <numeric>

#include "lowsnr/formulation.h"
#include "lowsnr/model.h"
#include "lowsnr/rng.h"

namespace lowsnr {
namespace {

// Stream tags derived from the generator seed.
constexpr std::uint64_t kPlacementStream = 1;
constexpr std::uint64_t kSessionStream = 2;
constexpr std::uint64_t kDemandStream = 3;

}  // namespace

NetworkInstance generate_instance(const GeneratorOptions& opt) {
  if (opt.node_count < 2) throw std::invalid_argument("generate_instance: need at least 2 nodes");
  if (!(opt.area_side > 0.0)) throw std::invalid_argument("generate_instance: area must be positive");
  if (opt.session_count < 0) throw std::invalid_argument("generate_instance: negative session count");
  if (opt.max_sinks < 1) throw std::invalid_argument("generate_instance: max_sinks must be >= 1");

  const Rng root(opt.seed);
  NetworkInstance inst;
  inst.alpha = opt.alpha;
  inst.noise_density = opt.noise_density;
  inst.bandwidth = opt.bandwidth;
  inst.reach_limit = opt.reach_limit;

  Rng place = root.split(kPlacementStream);
  for (int i = 0; i < opt.node_count; ++i) {
    NodeSpec n;
    n.id = i;
    n.power_budget = opt.power_budget;
    bool clash = true;
    while (clash) {
      n.location = {place.uniform(0.0, opt.area_side), place.uniform(0.0, opt.area_side)};
      clash = std::any_of(inst.nodes.begin(), inst.nodes.end(),
                          [&](const NodeSpec& o) { return o.location == n.location; });
    }
    inst.nodes.push_back(n);
  }

  Rng pick = root.split(kSessionStream);
  Rng demand = root.split(kDemandStream);
  const int n = opt.node_count;
  for (int m = 0; m < opt.session_count; ++m) {
    Session s;
    s.id = m;
    s.source = static_cast<NodeId>(pick.below(n));
    std::vector<NodeId> others;
    for (int i = 0; i < n; ++i) {
      if (i != s.source) others.push_back(i);
    }
    const int k = 1 + static_cast<int>(pick.below(std::min(opt.max_sinks, n - 1)));
    for (int j = 0; j < k; ++j) {
      const auto r = j + static_cast<int>(pick.below(others.size() - j));
      std::swap(others[j], others[r]);
    }
    s.receivers.assign(others.begin(), others.begin() + k);
    std::sort(s.receivers.begin(), s.receivers.end());
    s.demand = demand.uniform_open_closed();
    inst.sessions.push_back(std::move(s));
  }

  for (int attempt = 0; attempt < opt.max_rescale_attempts; ++attempt) {
    FlowProgram program;
    try {
      program = assemble_program(inst);
    } catch (const UnreachableSinkError& e) {
      throw GenerationError(std::string("generate_instance: ") + e.what());
    }
    if (check_feasibility(program).feasible) return inst;
    for (auto& s : inst.sessions) s.demand *= 0.5;
  }
  throw GenerationError("generate_instance: no feasible demand scaling within " +
                        std::to_string(opt.max_rescale_attempts) + " attempts");
}

}  // namespace lowsnr

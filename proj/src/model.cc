#include "lowsnr/model.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace lowsnr {

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double link_gamma(double dist, double alpha, double noise_density) {
  return 1.0 / (std::pow(dist, alpha) * noise_density);
}

double hyperarc_rate(double power, double gamma) {
  if (!(power >= 0.0)) throw std::invalid_argument("hyperarc_rate: negative power");
  if (!(gamma > 0.0)) throw std::invalid_argument("hyperarc_rate: gamma must be positive");
  return gamma * power;
}

std::size_t NetworkInstance::index_of(NodeId id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  throw std::out_of_range("unknown node id " + std::to_string(id));
}

int NetworkInstance::total_sinks() const {
  int total = 0;
  for (const auto& s : sessions) total += static_cast<int>(s.receivers.size());
  return total;
}

void NetworkInstance::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("alpha", "must be positive and finite");
  }
  if (!(noise_density > 0.0) || !std::isfinite(noise_density)) {
    throw ValidationError("noise_density", "must be positive and finite");
  }
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ValidationError("bandwidth", "must be positive and finite");
  }
  if (reach_limit && *reach_limit < 1) {
    throw ValidationError("reach_limit", "must be a positive integer");
  }
  std::unordered_set<NodeId> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!ids.insert(n.id).second) {
      throw ValidationError(where + ".id", "duplicate node id " + std::to_string(n.id));
    }
    if (!std::isfinite(n.location.x) || !std::isfinite(n.location.y)) {
      throw ValidationError(where + ".location", "coordinates must be finite");
    }
    if (!(n.power_budget > 0.0) || !std::isfinite(n.power_budget)) {
      throw ValidationError(where + ".power_budget", "must be positive and finite");
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i].location == nodes[j].location) {
        throw ValidationError("nodes[" + std::to_string(j) + "].location",
                              "coincides with node " + std::to_string(nodes[i].id));
      }
    }
  }
  std::unordered_set<int> session_ids;
  for (std::size_t m = 0; m < sessions.size(); ++m) {
    const auto& s = sessions[m];
    const std::string where = "sessions[" + std::to_string(m) + "]";
    if (!session_ids.insert(s.id).second) {
      throw ValidationError(where + ".id", "duplicate session id " + std::to_string(s.id));
    }
    if (!ids.count(s.source)) {
      throw ValidationError(where + ".source", "unknown node " + std::to_string(s.source));
    }
    if (s.receivers.empty()) {
      throw ValidationError(where + ".receivers", "must be nonempty");
    }
    std::set<NodeId> seen;
    for (NodeId r : s.receivers) {
      if (!ids.count(r)) {
        throw ValidationError(where + ".receivers", "unknown node " + std::to_string(r));
      }
      if (r == s.source) {
        throw ValidationError(where + ".receivers", "contains the source " + std::to_string(r));
      }
      if (!seen.insert(r).second) {
        throw ValidationError(where + ".receivers", "duplicate receiver " + std::to_string(r));
      }
    }
    if (!(s.demand > 0.0) || !std::isfinite(s.demand)) {
      throw ValidationError(where + ".demand", "must be positive and finite");
    }
  }
}

std::vector<Hyperarc> decompose_broadcast(const NetworkInstance& instance) {
  instance.validate();
  std::vector<Hyperarc> out;
  const std::size_t n = instance.nodes.size();
  if (n < 2) return out;
  const std::size_t chain =
      instance.reach_limit ? std::min<std::size_t>(*instance.reach_limit, n - 1) : n - 1;

  struct Neighbor {
    double dist;
    NodeId id;
  };
  for (const auto& sender : instance.nodes) {
    std::vector<Neighbor> order;
    order.reserve(n - 1);
    for (const auto& other : instance.nodes) {
      if (other.id == sender.id) continue;
      const double d = distance(sender.location, other.location);
      if (!(d > 0.0)) {
        throw ValidationError("nodes", "nodes " + std::to_string(sender.id) + " and " +
                                           std::to_string(other.id) + " coincide");
      }
      order.push_back({d, other.id});
    }
    std::sort(order.begin(), order.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.dist != b.dist ? a.dist < b.dist : a.id < b.id;
    });
    std::vector<NodeId> prefix;
    for (std::size_t k = 0; k < chain; ++k) {
      prefix.push_back(order[k].id);
      const double g = link_gamma(order[k].dist, instance.alpha, instance.noise_density);
      if (!(g > 0.0) || !std::isfinite(g)) {
        throw ValidationError("nodes", "non-finite channel gain from node " +
                                           std::to_string(sender.id));
      }
      out.push_back(Hyperarc{sender.id, prefix, g});
    }
  }
  return out;
}

}  // namespace lowsnr

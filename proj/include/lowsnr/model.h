// Network model: node geometry, low-SNR channel constants, sessions, and the
// nested hyperarc decomposition of each node's broadcast channel.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lowsnr {

using NodeId = int;

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(const Point& a, const Point& b);

struct NodeSpec {
  NodeId id = 0;
  Point location;
  double power_budget = 1.0;  // watts
  bool operator==(const NodeSpec&) const = default;
};

// A multicast session; unicast when there is exactly one receiver.
struct Session {
  int id = 0;
  NodeId source = 0;
  std::vector<NodeId> receivers;
  double demand = 0.0;  // nats/s, delivered to every receiver
  bool operator==(const Session&) const = default;
};

// Raised when an instance (or a file describing one) breaks an invariant.
// `field()` names the offending field, e.g. "nodes[3].id".
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct NetworkInstance {
  std::vector<NodeSpec> nodes;
  double alpha = 2.0;          // path-loss exponent
  double noise_density = 1.0;  // N0, watts per Hz
  double bandwidth = 1.0;      // W, only used by the approximation analysis
  std::vector<Session> sessions;
  // Maximum receivers per sender; nullopt means every other node.
  std::optional<int> reach_limit;

  bool operator==(const NetworkInstance&) const = default;

  // Throws ValidationError on the first broken invariant.
  void validate() const;

  // Position of `id` in `nodes`; throws std::out_of_range when absent.
  std::size_t index_of(NodeId id) const;
  const NodeSpec& node(NodeId id) const { return nodes[index_of(id)]; }

  int total_sinks() const;
};

// Connection from one sender to a reliability-ordered receiver set. The
// common rate of the hyperarc is gamma * power.
struct Hyperarc {
  NodeId sender = 0;
  std::vector<NodeId> receivers;  // best (nearest) first
  double gamma = 0.0;             // 1 / (d_worst^alpha * N0)
  bool operator==(const Hyperarc&) const = default;
};

// Rate gain of a link of length `dist`: 1 / (dist^alpha * N0).
double link_gamma(double dist, double alpha, double noise_density);

// For every sender, min(reach_limit, |N|-1) nested hyperarcs J^1 c J^2 c ...
// built from the receivers sorted by (distance, id). Senders appear in node
// order; within a sender the chain is ordered by size.
std::vector<Hyperarc> decompose_broadcast(const NetworkInstance& instance);

// Rate carried by a hyperarc at the given transmit power.
double hyperarc_rate(double power, double gamma);

// ---------------------------------------------------------------------------
// Instance generation and serialization.

enum class DemandPolicy {
  // Draw demands uniform in (0, 1], halve all of them until the instance
  // passes the phase-1 feasibility check.
  kHalveUntilFeasible,
};

struct GeneratorOptions {
  std::uint64_t seed = 0;
  int node_count = 4;
  double area_side = 10.0;  // meters
  int session_count = 1;
  int max_sinks = 3;
  DemandPolicy demand_policy = DemandPolicy::kHalveUntilFeasible;
  int max_rescale_attempts = 30;
  double alpha = 2.0;
  double noise_density = 1.0;
  double bandwidth = 1.0;
  double power_budget = 1.0;
  std::optional<int> reach_limit;
};

// Raised when the demand policy cannot produce a feasible instance.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

NetworkInstance generate_instance(const GeneratorOptions& options);

NetworkInstance parse_instance(const std::string& text);
std::string serialize_instance(const NetworkInstance& instance);
NetworkInstance read_instance(const std::string& path);
void write_instance(const NetworkInstance& instance, const std::string& path);

}  // namespace lowsnr

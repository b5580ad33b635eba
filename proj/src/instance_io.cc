// JSON instance files.
//
//   {
//     "alpha": 2.0, "noise_density": 1.0, "bandwidth": 1.0,
//     "reach_limit": null,                      // or a positive integer
//     "nodes":    [{"id": 0, "x": 1.5, "y": 2.0, "power_budget": 1.0}, ...],
//     "sessions": [{"id": 0, "source": 0, "receivers": [2, 3], "demand": 0.25}]
//   }
//
// Doubles are written in shortest round-trip form, which never needs more
// than 17 significant digits, so write/read is lossless.
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lowsnr/model.h"

namespace lowsnr {
namespace {

using Json = nlohmann::ordered_json;

const Json& member(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(where.empty() ? key : where + "." + key, "missing field");
  }
  return *it;
}

double number(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = member(obj, key, where);
  if (!v.is_number()) {
    throw ValidationError(where.empty() ? key : where + "." + key, "expected a number");
  }
  return v.get<double>();
}

long long integer(const Json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ValidationError(field, "expected an integer");
  return v.get<long long>();
}

}  // namespace

NetworkInstance parse_instance(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("<document>", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("<document>", "expected a JSON object");

  NetworkInstance inst;
  inst.alpha = number(doc, "alpha", "");
  inst.noise_density = number(doc, "noise_density", "");
  inst.bandwidth = number(doc, "bandwidth", "");
  const Json& reach = member(doc, "reach_limit", "");
  if (!reach.is_null()) inst.reach_limit = static_cast<int>(integer(reach, "reach_limit"));

  const Json& nodes = member(doc, "nodes", "");
  if (!nodes.is_array()) throw ValidationError("nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    NodeSpec n;
    n.id = static_cast<NodeId>(integer(member(nodes[i], "id", where), where + ".id"));
    n.location = {number(nodes[i], "x", where), number(nodes[i], "y", where)};
    n.power_budget = number(nodes[i], "power_budget", where);
    inst.nodes.push_back(n);
  }

  const Json& sessions = member(doc, "sessions", "");
  if (!sessions.is_array()) throw ValidationError("sessions", "expected an array");
  for (std::size_t m = 0; m < sessions.size(); ++m) {
    const std::string where = "sessions[" + std::to_string(m) + "]";
    Session s;
    s.id = static_cast<int>(integer(member(sessions[m], "id", where), where + ".id"));
    s.source = static_cast<NodeId>(
        integer(member(sessions[m], "source", where), where + ".source"));
    const Json& rx = member(sessions[m], "receivers", where);
    if (!rx.is_array()) throw ValidationError(where + ".receivers", "expected an array");
    for (const auto& r : rx) {
      s.receivers.push_back(static_cast<NodeId>(integer(r, where + ".receivers")));
    }
    s.demand = number(sessions[m], "demand", where);
    inst.sessions.push_back(std::move(s));
  }
  inst.validate();
  return inst;
}

std::string serialize_instance(const NetworkInstance& instance) {
  Json doc;
  doc["alpha"] = instance.alpha;
  doc["noise_density"] = instance.noise_density;
  doc["bandwidth"] = instance.bandwidth;
  doc["reach_limit"] = instance.reach_limit ? Json(*instance.reach_limit) : Json(nullptr);
  Json nodes = Json::array();
  for (const auto& n : instance.nodes) {
    nodes.push_back({{"id", n.id},
                     {"x", n.location.x},
                     {"y", n.location.y},
                     {"power_budget", n.power_budget}});
  }
  doc["nodes"] = std::move(nodes);
  Json sessions = Json::array();
  for (const auto& s : instance.sessions) {
    sessions.push_back(
        {{"id", s.id}, {"source", s.source}, {"receivers", s.receivers}, {"demand", s.demand}});
  }
  doc["sessions"] = std::move(sessions);
  return doc.dump(2) + "\n";
}

NetworkInstance read_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

void write_instance(const NetworkInstance& instance, const std::string& path) {
  instance.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write instance file " + path);
  out << serialize_instance(instance);
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace lowsnr

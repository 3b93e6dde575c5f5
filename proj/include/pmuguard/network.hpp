#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pmuguard/common.hpp"

namespace pmuguard {

struct Branch {
  BusId from = 0;
  BusId to = 0;
  Complex series_admittance;      // y_il, per-unit
  double shunt_susceptance = 0.;  // total line charging b^s_il, per-unit
};

struct Pmu {
  BusId bus = 0;
  std::vector<BusId> measured_neighbors;
};

/// Bus/branch topology plus PMU placement. Validated on construction and
/// immutable afterwards.
class NetworkModel {
 public:
  NetworkModel(std::vector<BusId> buses, std::vector<Branch> branches, std::vector<Pmu> pmus)
      : buses_(std::move(buses)), branches_(std::move(branches)), pmus_(std::move(pmus)) {
    validate();
  }

  const std::vector<BusId>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<Pmu>& pmus() const { return pmus_; }

  std::size_t bus_count() const { return buses_.size(); }
  std::size_t pmu_count() const { return pmus_.size(); }

  /// Column index of a bus id; throws for unknown ids.
  int bus_index(BusId id) const {
    auto it = bus_index_.find(id);
    if (it == bus_index_.end()) throw ValidationError("unknown bus " + std::to_string(id));
    return it->second;
  }

  bool has_bus(BusId id) const { return bus_index_.count(id) != 0; }

  /// The branch joining two buses, in either orientation.
  const Branch* find_branch(BusId a, BusId b) const {
    auto it = branch_index_.find(edge_key(a, b));
    return it == branch_index_.end() ? nullptr : &branches_[it->second];
  }

 private:
  static std::pair<BusId, BusId> edge_key(BusId a, BusId b) { return {std::min(a, b), std::max(a, b)}; }

  void validate() {
    if (buses_.empty()) throw ValidationError("network has no buses");
    for (std::size_t i = 0; i < buses_.size(); ++i) {
      if (!bus_index_.emplace(buses_[i], static_cast<int>(i)).second)
        throw ValidationError("duplicate bus " + std::to_string(buses_[i]));
    }
    for (std::size_t b = 0; b < branches_.size(); ++b) {
      const Branch& br = branches_[b];
      if (!has_bus(br.from) || !has_bus(br.to))
        throw ValidationError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                              " references an unknown bus");
      if (br.from == br.to) throw ValidationError("branch " + std::to_string(br.from) + " is a self loop");
      if (!std::isfinite(br.series_admittance.real()) || !std::isfinite(br.series_admittance.imag()) ||
          !std::isfinite(br.shunt_susceptance))
        throw ValidationError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                              " has non-finite parameters");
      if (!branch_index_.emplace(edge_key(br.from, br.to), b).second)
        throw ValidationError("duplicate branch " + std::to_string(br.from) + "-" + std::to_string(br.to));
    }
    std::set<BusId> seen;
    for (const Pmu& p : pmus_) {
      if (!has_bus(p.bus)) throw ValidationError("PMU at unknown bus " + std::to_string(p.bus));
      if (!seen.insert(p.bus).second) throw ValidationError("duplicate PMU at bus " + std::to_string(p.bus));
      std::set<BusId> nb;
      for (BusId l : p.measured_neighbors) {
        const Branch* br = find_branch(p.bus, l);
        if (br == nullptr)
          throw ValidationError("PMU at bus " + std::to_string(p.bus) + " measures nonexistent line to bus " +
                                std::to_string(l));
        if (!nb.insert(l).second)
          throw ValidationError("PMU at bus " + std::to_string(p.bus) + " lists line to " + std::to_string(l) +
                                " twice");
        if (br->series_admittance == Complex(0.0, 0.0))
          throw ValidationError("measured line " + std::to_string(p.bus) + "-" + std::to_string(l) +
                                " has zero series admittance");
      }
    }
  }

  std::vector<BusId> buses_;
  std::vector<Branch> branches_;
  std::vector<Pmu> pmus_;
  std::map<BusId, int> bus_index_;
  std::map<std::pair<BusId, BusId>, std::size_t> branch_index_;
};

namespace detail {

inline double number_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline BusId bus_field(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ValidationError(where + ": bus ids must be integers");
  return v.get<BusId>();
}

}  // namespace detail

/// Parses the JSON network schema:
///   {"buses":[...], "branches":[{"from","to","r","x","bs"} | {"from","to","g","b","bs"}],
///    "pmus":[{"bus", "measures":[...]}]}
inline NetworkModel parse_network(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("network file is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw ValidationError("network file must be a JSON object");
    for (const char* key : {"buses", "branches", "pmus"})
      if (!doc.contains(key) || !doc[key].is_array())
        throw ValidationError(std::string("network file needs an array '") + key + "'");

    std::vector<BusId> buses;
    for (const auto& b : doc["buses"]) buses.push_back(detail::bus_field(b, "buses"));

    std::vector<Branch> branches;
    for (const auto& jb : doc["branches"]) {
      if (!jb.is_object()) throw ValidationError("branches entries must be objects");
      Branch br;
      br.from = detail::bus_field(jb.at("from"), "branch");
      br.to = detail::bus_field(jb.at("to"), "branch");
      const std::string where = "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
      const bool impedance = jb.contains("r") || jb.contains("x");
      const bool admittance = jb.contains("g") || jb.contains("b");
      if (impedance == admittance)
        throw ValidationError(where + ": give exactly one of (r, x) or (g, b)");
      if (impedance) {
        const Complex zser(detail::number_field(jb, "r", where), detail::number_field(jb, "x", where));
        if (zser == Complex(0.0, 0.0)) throw ValidationError(where + ": zero series impedance");
        br.series_admittance = 1.0 / zser;
      } else {
        br.series_admittance = Complex(detail::number_field(jb, "g", where), detail::number_field(jb, "b", where));
      }
      br.shunt_susceptance = jb.contains("bs") ? detail::number_field(jb, "bs", where) : 0.0;
      branches.push_back(br);
    }

    std::vector<Pmu> pmus;
    for (const auto& jp : doc["pmus"]) {
      if (!jp.is_object()) throw ValidationError("pmus entries must be objects");
      Pmu p;
      p.bus = detail::bus_field(jp.at("bus"), "pmu");
      if (jp.contains("measures")) {
        if (!jp["measures"].is_array()) throw ValidationError("pmu 'measures' must be an array");
        for (const auto& l : jp["measures"]) p.measured_neighbors.push_back(detail::bus_field(l, "pmu measures"));
      }
      pmus.push_back(std::move(p));
    }
    return NetworkModel(std::move(buses), std::move(branches), std::move(pmus));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("network schema violation: ") + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline NetworkModel load_network(const std::string& path) {
  try {
    return parse_network(read_text_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

/// Serializes in the (g, b, bs) form so admittances round-trip exactly.
inline nlohmann::json network_to_json(const NetworkModel& net) {
  nlohmann::json doc;
  doc["buses"] = net.buses();
  doc["branches"] = nlohmann::json::array();
  for (const Branch& br : net.branches()) {
    doc["branches"].push_back({{"from", br.from},
                               {"to", br.to},
                               {"g", br.series_admittance.real()},
                               {"b", br.series_admittance.imag()},
                               {"bs", br.shunt_susceptance}});
  }
  doc["pmus"] = nlohmann::json::array();
  for (const Pmu& p : net.pmus()) doc["pmus"].push_back({{"bus", p.bus}, {"measures", p.measured_neighbors}});
  return doc;
}

}  // namespace pmuguard

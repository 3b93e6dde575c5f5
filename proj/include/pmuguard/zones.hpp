#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "pmuguard/measurement_system.hpp"
#include "pmuguard/network.hpp"

namespace pmuguard {

/// A connected component of the measurement graph.
struct Zone {
  std::vector<int> buses;  // column indices, file order
  std::vector<int> pmus;   // PMU indices, ascending
  std::vector<int> rows;   // rows of H owned by the zone's PMUs, global order
  int bus_count() const { return static_cast<int>(buses.size()); }
  int pmu_count() const { return static_cast<int>(pmus.size()); }
  int measurement_count() const { return static_cast<int>(rows.size()); }
};

struct ZonePartition {
  std::vector<Zone> zones;
  std::vector<int> pmu_to_zone;
  std::vector<int> bus_to_zone;  // -1 for buses outside the measurement graph

  int zone_count() const { return static_cast<int>(zones.size()); }
};

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

/// Zones are ordered by the smallest bus id they contain.
inline ZonePartition compute_zones(const NetworkModel& net) {
  const int n = static_cast<int>(net.bus_count());
  DisjointSets sets(n);
  std::vector<bool> covered(n, false);
  for (const Pmu& p : net.pmus()) {
    const int i = net.bus_index(p.bus);
    covered[i] = true;
    for (BusId l : p.measured_neighbors) {
      const int c = net.bus_index(l);
      covered[c] = true;
      sets.unite(i, c);
    }
  }

  std::map<int, std::vector<int>> members;  // root -> buses
  for (int b = 0; b < n; ++b)
    if (covered[b]) members[sets.find(b)].push_back(b);

  std::vector<std::pair<BusId, int>> order;  // (min bus id, root)
  for (const auto& [root, buses] : members) {
    BusId lo = net.buses()[buses.front()];
    for (int b : buses) lo = std::min(lo, net.buses()[b]);
    order.emplace_back(lo, root);
  }
  std::sort(order.begin(), order.end());

  ZonePartition zp;
  zp.bus_to_zone.assign(n, -1);
  std::map<int, int> root_to_zone;
  for (const auto& [lo, root] : order) {
    root_to_zone[root] = zp.zone_count();
    Zone z;
    z.buses = members[root];
    for (int b : z.buses) zp.bus_to_zone[b] = zp.zone_count();
    zp.zones.push_back(std::move(z));
  }

  zp.pmu_to_zone.resize(net.pmu_count());
  int row = 0;
  for (std::size_t p = 0; p < net.pmu_count(); ++p) {
    const int zone = root_to_zone.at(sets.find(net.bus_index(net.pmus()[p].bus)));
    zp.pmu_to_zone[p] = zone;
    zp.zones[zone].pmus.push_back(static_cast<int>(p));
    const int count = 1 + static_cast<int>(net.pmus()[p].measured_neighbors.size());
    for (int r = 0; r < count; ++r) zp.zones[zone].rows.push_back(row + r);
    row += count;
  }
  return zp;
}

/// Basis of the null space of H_delta over the covered buses: one block of
/// ones per zone.
struct NullBasis {
  std::vector<int> covered_columns;  // zone-major, file order within a zone
  Eigen::MatrixXd b_delta;           // covered_columns.size() x zone count

  /// The same basis with rows placed at the full set of H columns (zeros
  /// for uncovered buses).
  Eigen::MatrixXd embedded(int bus_count) const {
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(bus_count, b_delta.cols());
    for (std::size_t r = 0; r < covered_columns.size(); ++r) full.row(covered_columns[r]) = b_delta.row(r);
    return full;
  }
};

inline NullBasis null_space_basis(const ZonePartition& zp) {
  NullBasis nb;
  for (const Zone& z : zp.zones) nb.covered_columns.insert(nb.covered_columns.end(), z.buses.begin(), z.buses.end());
  nb.b_delta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nb.covered_columns.size()), zp.zone_count());
  int r = 0;
  for (int g = 0; g < zp.zone_count(); ++g)
    for (int i = 0; i < zp.zones[g].bus_count(); ++i) nb.b_delta(r++, g) = 1.0;
  return nb;
}

/// Selects columns of `m` in the given order.
inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(c) = m.col(cols[c]);
  return out;
}

}  // namespace pmuguard

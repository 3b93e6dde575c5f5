#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "pmuguard/network.hpp"

namespace pmuguard {

/// Random test network whose measurement graph has one zone per entry of
/// `zone_sizes`, with exactly that many PMUs. Each zone owns
/// `buses_per_zone` buses (0 picks 2K); all of them are covered by the
/// zone's measurements. Zones are joined by unmeasured tie lines and carry
/// a few unmeasured internal lines as well.
inline NetworkModel generate_synthetic_network(const std::vector<int>& zone_sizes, int buses_per_zone,
                                               std::uint64_t seed) {
  if (zone_sizes.empty()) throw ValidationError("at least one zone is required");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> r_dist(0.005, 0.03);
  std::uniform_real_distribution<double> x_dist(0.05, 0.3);
  std::uniform_real_distribution<double> bs_dist(0.0, 0.1);
  std::bernoulli_distribution coin(0.5);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  std::vector<BusId> buses;
  std::vector<Branch> branches;
  std::set<std::pair<BusId, BusId>> edges;
  std::map<BusId, std::vector<BusId>> measured;
  std::vector<std::vector<BusId>> zone_buses;

  auto add_edge = [&](BusId a, BusId b) {
    if (a == b || !edges.insert({std::min(a, b), std::max(a, b)}).second) return false;
    const Complex y = 1.0 / Complex(r_dist(rng), x_dist(rng));
    branches.push_back({a, b, y, bs_dist(rng)});
    return true;
  };

  BusId next_id = 1;
  for (int k : zone_sizes) {
    if (k < 1) throw ValidationError("every zone needs at least one PMU");
    const int nb = buses_per_zone > 0 ? buses_per_zone : 2 * k;
    if (k > nb)
      throw ValidationError("zone with " + std::to_string(k) + " PMUs does not fit in " + std::to_string(nb) +
                            " buses");
    std::vector<BusId> ids;
    for (int i = 0; i < nb; ++i) ids.push_back(next_id++);
    buses.insert(buses.end(), ids.begin(), ids.end());
    zone_buses.push_back(ids);

    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<BusId> pmus(ids.begin(), ids.begin() + k);
    std::vector<BusId> pool(ids.begin() + k, ids.end());
    for (BusId p : pmus) measured[p];

    // Attach each PMU to the measured component built so far.
    for (int j = 1; j < k; ++j) {
      const BusId p = pmus[j];
      const BusId q = pmus[pick(static_cast<std::size_t>(j))];
      if (!pool.empty() && coin(rng)) {
        const BusId n = pool.back();
        pool.pop_back();
        add_edge(p, n);
        add_edge(q, n);
        measured[p].push_back(n);
        measured[q].push_back(n);
      } else {
        add_edge(p, q);
        measured[p].push_back(q);
        if (coin(rng)) measured[q].push_back(p);
      }
    }
    for (BusId n : pool) {
      const BusId p = pmus[pick(pmus.size())];
      add_edge(p, n);
      measured[p].push_back(n);
    }
    const int extra = nb / 4;
    for (int e = 0; e < extra; ++e) {
      const BusId a = zone_buses.back()[pick(zone_buses.back().size())];
      const BusId b = zone_buses.back()[pick(zone_buses.back().size())];
      add_edge(a, b);
    }
  }
  for (std::size_t g = 1; g < zone_buses.size(); ++g) {
    const BusId a = zone_buses[g - 1][pick(zone_buses[g - 1].size())];
    const BusId b = zone_buses[g][pick(zone_buses[g].size())];
    add_edge(a, b);
  }

  std::vector<Pmu> pmus;
  for (const auto& [bus, nbrs] : measured) pmus.push_back({bus, nbrs});
  return NetworkModel(std::move(buses), std::move(branches), std::move(pmus));
}

}  // namespace pmuguard

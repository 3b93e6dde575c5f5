#pragma once

#include <vector>

#include "pmuguard/attack.hpp"
#include "pmuguard/zones.hpp"

namespace pmuguard {

/// ceil(k/2 - 1) for k >= 1, in integer arithmetic.
inline int spoof_budget(int pmu_count) { return pmu_count >= 1 ? (pmu_count - 1) / 2 : 0; }

struct IdentifiabilityBudgets {
  std::vector<int> per_zone;
  int global = 0;
  int k_min = 0;
};

inline IdentifiabilityBudgets zone_thresholds(const ZonePartition& zp) {
  if (zp.zones.empty()) throw ValidationError("network has no zones (no PMUs)");
  IdentifiabilityBudgets b;
  b.k_min = zp.zones.front().pmu_count();
  for (const Zone& z : zp.zones) {
    b.per_zone.push_back(spoof_budget(z.pmu_count()));
    b.k_min = std::min(b.k_min, z.pmu_count());
  }
  b.global = spoof_budget(b.k_min);
  return b;
}

/// Outcome of the per-zone sparsity test. Passing is sufficient for
/// identifiability; failing does not prove the attack unidentifiable.
struct IdentifiabilityCheck {
  bool sufficient_condition_holds = true;
  std::vector<int> spoofed_per_zone;
  std::vector<int> budget_per_zone;
};

inline IdentifiabilityCheck check_identifiable(const AttackVector& alpha, const ZonePartition& zp) {
  if (alpha.size() != static_cast<int>(zp.pmu_to_zone.size()))
    throw ValidationError("attack length does not match PMU count");
  IdentifiabilityCheck c;
  c.spoofed_per_zone.assign(zp.zone_count(), 0);
  c.budget_per_zone = zone_thresholds(zp).per_zone;
  for (int k : alpha.support()) ++c.spoofed_per_zone[zp.pmu_to_zone[k]];
  for (int g = 0; g < zp.zone_count(); ++g)
    if (c.spoofed_per_zone[g] > c.budget_per_zone[g]) c.sufficient_condition_holds = false;
  return c;
}

/// An attack one past the zone budget together with a sparser-or-equal
/// alias and the state rotation that makes both produce identical data.
struct UnidentifiableWitness {
  int zone = 0;
  double shift = 0.;  // radians, wrapped
  int kappa = 0;
  AttackVector alpha;
  AttackVector alpha_bar;
  std::vector<int> rotated_buses;

  /// x_bar: the zone's bus phasors rotated by exp(j * shift).
  StateVector transform_state(const StateVector& x) const {
    StateVector out = x;
    const Complex rot = std::polar(1.0, shift);
    for (int b : rotated_buses) out[b] *= rot;
    return out;
  }
};

/// Spoofs the first kappa = budget + 1 PMUs of `target_zone` by `shift`;
/// the alias spoofs the remaining PMUs of the zone by -shift. PMUs outside
/// the target zone are left at `others` (zero by default).
inline UnidentifiableWitness construct_unidentifiable_attack(const ZonePartition& zp, int target_zone, double shift,
                                                             const AttackVector* others = nullptr) {
  if (target_zone < 0 || target_zone >= zp.zone_count()) throw ValidationError("target zone out of range");
  const Zone& zone = zp.zones[target_zone];
  if (zone.pmu_count() < 1) throw ValidationError("target zone has no PMUs");
  const double a = wrap_angle(shift);
  if (a == 0.0 || std::abs(a) < 1e-15) throw ValidationError("shift is a multiple of 2*pi; the attack would be zero");

  const int k = static_cast<int>(zp.pmu_to_zone.size());
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(k);
  if (others != nullptr) {
    if (others->size() != k) throw ValidationError("attack length does not match PMU count");
    alpha = others->values();
  }
  UnidentifiableWitness w;
  w.zone = target_zone;
  w.shift = a;
  w.kappa = spoof_budget(zone.pmu_count()) + 1;
  for (int p : zone.pmus) alpha[p] = 0.0;
  for (int i = 0; i < w.kappa; ++i) alpha[zone.pmus[i]] = a;
  Eigen::VectorXd alpha_bar = alpha;
  for (int p : zone.pmus) alpha_bar[p] = alpha[p] - a;
  w.alpha = AttackVector(alpha);
  w.alpha_bar = AttackVector(alpha_bar);
  w.rotated_buses = zone.buses;
  return w;
}

}  // namespace pmuguard

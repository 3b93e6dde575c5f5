#pragma once

#include <optional>
#include <vector>

#include "pmuguard/identifiability.hpp"
#include "pmuguard/nls.hpp"
#include "pmuguard/projection.hpp"

namespace pmuguard {

enum class UpdateMode {
  ZoneLocal,  // re-fit and re-project only the zone of the selected PMU
  Global,     // re-fit every zone with a nonempty support and re-project all of H
};

struct CorrectionConfig {
  double tau = 0.;
  int max_support = -1;  // < 0: number of PMUs
  NlsOptions nls;
  int grid_points = 24;
  double rank_tol = 1e-10;
  /// The loop stops once ||r||^2 <= max(tau, residue_floor * ||z_bar||^2);
  /// the floor absorbs round-off when tau is 0.
  double residue_floor = 1e-16;
  UpdateMode mode = UpdateMode::ZoneLocal;
  bool record_iterates = false;
};

struct SupportEntry {
  int iteration = 0;
  int pmu = 0;
  int zone = 0;
};

struct IterationRecord {
  Eigen::VectorXd alpha;
  Eigen::VectorXcd residue;
};

struct CorrectionResult {
  AttackVector alpha_hat;
  std::vector<SupportEntry> support_trace;
  std::vector<double> residue_trace;  // ||r||^2 after each iteration's update
  double initial_residue_norm2 = 0.;
  double threshold = 0.;
  MeasurementVector z_hat;
  bool converged = false;
  int nls_failures = 0;
  std::vector<IterationRecord> iterates;  // filled when record_iterates is set

  double final_residue_norm2() const { return residue_trace.empty() ? initial_residue_norm2 : residue_trace.back(); }
};

/// Greedy sparse correction: repeatedly add the PMU with the largest
/// per-row residue energy to the support, re-fit the attack angles of its
/// zone, and update that zone's residue, until ||r||^2 falls to tau.
inline CorrectionResult greedy_correct(const MeasurementVector& z_bar, const MeasurementSystem& ms,
                                       const ZonePartition& zp, const ProjectionOperator& proj,
                                       const CorrectionConfig& cfg) {
  if (z_bar.size() != ms.measurement_count()) throw ValidationError("measurement length does not match H");
  if (cfg.tau < 0) throw ValidationError("tau must be non-negative");
  if (cfg.grid_points < 4) throw ValidationError("grid_points must be at least 4");
  const int k = ms.pmu_count();
  const int max_support = cfg.max_support < 0 ? k : std::min(cfg.max_support, k);

  std::optional<ZoneProjector> global;
  if (cfg.mode == UpdateMode::Global) global = build_global_projection(ms, cfg.rank_tol);

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(k);
  std::vector<std::vector<int>> zone_support(zp.zone_count());  // positions into zone pmus
  std::vector<bool> selected(k, false);

  auto full_residue = [&]() -> Eigen::VectorXcd {
    if (global) return global->complement(remove_attack(z_bar, AttackVector(alpha), ms));
    return residue(AttackVector(alpha), z_bar, proj);
  };

  Eigen::VectorXcd r = full_residue();
  CorrectionResult out;
  out.initial_residue_norm2 = r.squaredNorm();
  out.threshold = std::max(cfg.tau, cfg.residue_floor * z_bar.squaredNorm());
  double norm2 = out.initial_residue_norm2;

  int support_size = 0;
  int iteration = 0;
  while (norm2 > out.threshold && support_size < max_support) {
    ++iteration;
    int best = -1;
    double best_score = -1.0;
    for (int p = 0; p < k; ++p) {
      if (selected[p]) continue;
      const RowRange& rr = ms.pmu_rows[p];
      const double score = r.segment(rr.offset, rr.count).squaredNorm() / rr.count;
      if (score > best_score) {
        best_score = score;
        best = p;
      }
    }
    selected[best] = true;
    ++support_size;
    const int zone_star = zp.pmu_to_zone[best];
    const ZoneProjector& zproj = proj.zones[zone_star];
    const int local = static_cast<int>(std::find(zproj.pmus.begin(), zproj.pmus.end(), best) - zproj.pmus.begin());
    zone_support[zone_star].push_back(local);
    out.support_trace.push_back({iteration, best, zone_star});

    for (int g = 0; g < zp.zone_count(); ++g) {
      if (zone_support[g].empty()) continue;
      if (g != zone_star && cfg.mode == UpdateMode::ZoneLocal) continue;
      const ZoneProjector& zg = proj.zones[g];
      auto sorted = zone_support[g];
      std::sort(sorted.begin(), sorted.end());
      const Eigen::VectorXd initial = gather(alpha, zg.pmus);
      const std::optional<int> seed = g == zone_star ? std::optional<int>(local) : std::nullopt;
      const NlsFit fit = nls_support_fit(zg, gather(z_bar, zg.rows), sorted, initial, seed, cfg.grid_points, cfg.nls);
      if (!fit.converged) ++out.nls_failures;
      for (std::size_t i = 0; i < zg.pmus.size(); ++i) alpha[zg.pmus[i]] = fit.zone_alpha[static_cast<Eigen::Index>(i)];
    }

    if (global) {
      r = full_residue();
    } else {
      const Eigen::VectorXcd rz = zone_residue(zproj, alpha, z_bar);
      for (std::size_t i = 0; i < zproj.rows.size(); ++i) r[zproj.rows[i]] = rz[static_cast<Eigen::Index>(i)];
    }
    norm2 = r.squaredNorm();
    out.residue_trace.push_back(norm2);
    if (cfg.record_iterates) out.iterates.push_back({alpha, r});
  }

  out.alpha_hat = AttackVector(alpha);
  out.z_hat = remove_attack(z_bar, out.alpha_hat, ms);
  out.converged = norm2 <= out.threshold;
  return out;
}

inline CorrectionResult greedy_correct(const MeasurementVector& z_bar, const MeasurementSystem& ms,
                                       const ZonePartition& zp, const CorrectionConfig& cfg) {
  return greedy_correct(z_bar, ms, zp, build_projection(ms, zp, cfg.rank_tol), cfg);
}

}  // namespace pmuguard

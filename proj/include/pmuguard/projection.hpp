#pragma once

#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "pmuguard/attack.hpp"
#include "pmuguard/zones.hpp"

namespace pmuguard {

/// Orthonormal basis of the range of one zone's block of H.
struct ZoneProjector {
  std::vector<int> rows;            // global rows of H
  std::vector<int> cols;            // bus columns
  std::vector<int> pmus;            // global PMU indices
  std::vector<RowRange> pmu_local;  // each PMU's rows, relative to `rows`
  Eigen::MatrixXcd q;
  int rank = 0;

  int measurement_count() const { return static_cast<int>(rows.size()); }

  /// (I - Q Q^*) v, without forming the projector.
  Eigen::VectorXcd complement(const Eigen::VectorXcd& v) const {
    if (rank == 0) return v;
    return v - q * (q.adjoint() * v);
  }
};

namespace detail {

inline ZoneProjector make_projector(const Eigen::MatrixXcd& block, double rank_tol) {
  ZoneProjector zp;
  if (block.rows() == 0) throw ValidationError("zone has no measurements");
  if (block.cols() == 0) return zp;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int rank = 0;
  if (s.size() > 0 && s[0] > 0)
    while (rank < s.size() && s[rank] > rank_tol * s[0]) ++rank;
  zp.rank = rank;
  zp.q = svd.matrixU().leftCols(rank);
  return zp;
}

}  // namespace detail

/// Block-diagonal orthogonal-complement projector, one block per zone.
struct ProjectionOperator {
  std::vector<ZoneProjector> zones;
  int measurement_count = 0;
  int pmu_count = 0;

  int total_rank() const {
    int r = 0;
    for (const auto& z : zones) r += z.rank;
    return r;
  }
  int residual_dimension() const { return measurement_count - total_rank(); }
};

inline ProjectionOperator build_projection(const MeasurementSystem& ms, const ZonePartition& zp,
                                           double rank_tol = 1e-10) {
  ProjectionOperator proj;
  proj.measurement_count = ms.measurement_count();
  proj.pmu_count = ms.pmu_count();
  for (const Zone& zone : zp.zones) {
    Eigen::MatrixXcd block(zone.measurement_count(), zone.bus_count());
    for (int r = 0; r < zone.measurement_count(); ++r)
      for (int c = 0; c < zone.bus_count(); ++c) block(r, c) = ms.h(zone.rows[r], zone.buses[c]);
    ZoneProjector zproj = detail::make_projector(block, rank_tol);
    zproj.rows = zone.rows;
    zproj.cols = zone.buses;
    zproj.pmus = zone.pmus;
    int offset = 0;
    for (int p : zone.pmus) {
      zproj.pmu_local.push_back({offset, ms.pmu_rows[p].count});
      offset += ms.pmu_rows[p].count;
    }
    proj.zones.push_back(std::move(zproj));
  }
  return proj;
}

/// Single projector over all of H, ignoring the zone structure. Used to
/// cross-check the block decomposition.
inline ZoneProjector build_global_projection(const MeasurementSystem& ms, double rank_tol = 1e-10) {
  ZoneProjector g = detail::make_projector(ms.h, rank_tol);
  for (int r = 0; r < ms.measurement_count(); ++r) g.rows.push_back(r);
  for (int c = 0; c < ms.bus_count(); ++c) g.cols.push_back(c);
  for (int p = 0; p < ms.pmu_count(); ++p) {
    g.pmus.push_back(p);
    g.pmu_local.push_back(ms.pmu_rows[p]);
  }
  return g;
}

/// Rows of `z` belonging to the zone, with each PMU's rows de-rotated by
/// its entry of `zone_alpha` (indexed like `zp.pmus`).
inline Eigen::VectorXcd derotated_zone_measurements(const ZoneProjector& zp, const Eigen::VectorXcd& z_local,
                                                    const Eigen::VectorXd& zone_alpha) {
  Eigen::VectorXcd v = z_local;
  for (std::size_t i = 0; i < zp.pmus.size(); ++i) {
    if (zone_alpha[static_cast<Eigen::Index>(i)] == 0.0) continue;
    v.segment(zp.pmu_local[i].offset, zp.pmu_local[i].count) *=
        std::polar(1.0, -zone_alpha[static_cast<Eigen::Index>(i)]);
  }
  return v;
}

inline Eigen::VectorXcd gather(const Eigen::VectorXcd& v, const std::vector<int>& idx) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
  return out;
}

inline Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
  return out;
}

/// Projection residue of one zone for the given global attack estimate.
inline Eigen::VectorXcd zone_residue(const ZoneProjector& zp, const Eigen::VectorXd& alpha,
                                     const MeasurementVector& z_bar) {
  return zp.complement(derotated_zone_measurements(zp, gather(z_bar, zp.rows), gather(alpha, zp.pmus)));
}

/// r = (I - P_H) Phi^-1(alpha) z_bar, assembled zone by zone in global row order.
inline Eigen::VectorXcd residue(const AttackVector& alpha, const MeasurementVector& z_bar,
                                const ProjectionOperator& proj) {
  if (alpha.size() != proj.pmu_count) throw ValidationError("attack length does not match PMU count");
  if (z_bar.size() != proj.measurement_count) throw ValidationError("measurement length does not match H");
  Eigen::VectorXcd r = Eigen::VectorXcd::Zero(proj.measurement_count);
  for (const ZoneProjector& zp : proj.zones) {
    const Eigen::VectorXcd rz = zone_residue(zp, alpha.values(), z_bar);
    for (std::size_t i = 0; i < zp.rows.size(); ++i) r[zp.rows[i]] = rz[static_cast<Eigen::Index>(i)];
  }
  return r;
}

struct ResidueThreshold {
  double tau = 0.;
  int degrees_of_freedom = 0;  // 2 (m - rank)
  bool degenerate = false;      // no residual dimensions; tau forced to 0
};

/// tau such that ||(I - P_H) e||^2 <= tau with probability `confidence` for
/// circular Gaussian noise of per-entry variance sigma^2. The statistic is
/// (sigma^2 / 2) * chi^2 with 2 (m - rank) degrees of freedom.
inline ResidueThreshold set_tau(const ProjectionOperator& proj, double sigma_noise, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
  if (sigma_noise < 0) throw ValidationError("noise standard deviation must be non-negative");
  ResidueThreshold t;
  t.degrees_of_freedom = 2 * proj.residual_dimension();
  if (t.degrees_of_freedom <= 0) {
    t.degenerate = true;
    return t;
  }
  if (sigma_noise == 0) return t;
  const boost::math::chi_squared dist(t.degrees_of_freedom);
  t.tau = 0.5 * sigma_noise * sigma_noise * boost::math::quantile(dist, confidence);
  return t;
}

}  // namespace pmuguard

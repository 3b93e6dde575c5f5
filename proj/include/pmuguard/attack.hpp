#pragma once

#include <random>
#include <vector>

#include "pmuguard/common.hpp"
#include "pmuguard/measurement_system.hpp"

namespace pmuguard {

using StateVector = Eigen::VectorXcd;
using MeasurementVector = Eigen::VectorXcd;

/// Per-PMU phase bias in radians. Entries are kept wrapped to (-pi, pi];
/// the support is the set of nonzero entries.
class AttackVector {
 public:
  AttackVector() = default;
  explicit AttackVector(Eigen::VectorXd angles) : alpha_(std::move(angles)) {
    for (Eigen::Index k = 0; k < alpha_.size(); ++k) alpha_[k] = wrap_angle(alpha_[k]);
  }

  static AttackVector zeros(int k) { return AttackVector(Eigen::VectorXd::Zero(k)); }

  const Eigen::VectorXd& values() const { return alpha_; }
  double operator[](Eigen::Index k) const { return alpha_[k]; }
  int size() const { return static_cast<int>(alpha_.size()); }

  std::vector<int> support() const {
    std::vector<int> s;
    for (Eigen::Index k = 0; k < alpha_.size(); ++k)
      if (alpha_[k] != 0.0) s.push_back(static_cast<int>(k));
    return s;
  }

  int l0() const { return static_cast<int>(support().size()); }

 private:
  Eigen::VectorXd alpha_;
};

/// Angles of the alternative (linear) measurement model.
struct AlternativeMeasurements {
  Eigen::VectorXd w_angle_v;  // one per PMU
  Eigen::VectorXd w_delta;    // one per measured line, aligned with h_delta rows
};

inline StateVector flat_state(int n) { return StateVector::Constant(n, Complex(1.0, 0.0)); }

/// Gaussian perturbation of voltage magnitudes and angles around `base`.
inline StateVector sample_state(const StateVector& base, double sigma_mag, double sigma_ang, std::uint64_t seed) {
  if (sigma_mag < 0 || sigma_ang < 0) throw ValidationError("state standard deviations must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  StateVector x(base.size());
  constexpr int kMaxRetries = 100;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    const double mag0 = std::abs(base[i]);
    if (mag0 <= 0) throw ValidationError("base state has a zero phasor");
    const double ang0 = std::arg(base[i]);
    double mag = mag0;
    int tries = 0;
    do {
      if (tries++ == kMaxRetries) throw ValidationError("could not sample a positive voltage magnitude");
      mag = mag0 + sigma_mag * unit(rng);
    } while (mag <= 0);
    const double ang = ang0 + sigma_ang * unit(rng);
    x[i] = (sigma_mag == 0 && sigma_ang == 0) ? base[i] : std::polar(mag, ang);
  }
  return x;
}

/// Circular complex Gaussian noise with E|e_i|^2 = sigma^2.
inline Eigen::VectorXcd complex_noise(int m, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> part(0.0, sigma / std::sqrt(2.0));
  Eigen::VectorXcd e(m);
  for (int i = 0; i < m; ++i) {
    const double re = part(rng);
    const double im = part(rng);
    e[i] = Complex(re, im);
  }
  return e;
}

inline MeasurementVector generate_measurements(const MeasurementSystem& ms, const StateVector& x,
                                               double sigma_noise, std::uint64_t seed) {
  if (x.size() != ms.bus_count()) throw ValidationError("state length does not match bus count");
  if (sigma_noise < 0) throw ValidationError("noise standard deviation must be non-negative");
  MeasurementVector z = ms.h * x;
  if (sigma_noise > 0) {
    std::mt19937_64 rng(seed);
    z += complex_noise(ms.measurement_count(), sigma_noise, rng);
  }
  return z;
}

/// Rotates every row of PMU k by exp(j * sign * alpha_k).
inline MeasurementVector rotate_pmus(const MeasurementVector& z, const Eigen::VectorXd& alpha,
                                     const MeasurementSystem& ms, double sign) {
  if (alpha.size() != ms.pmu_count()) throw ValidationError("attack length does not match PMU count");
  if (z.size() != ms.measurement_count()) throw ValidationError("measurement length does not match H");
  MeasurementVector out = z;
  for (int k = 0; k < ms.pmu_count(); ++k) {
    if (alpha[k] == 0.0) continue;
    const Complex rot = std::polar(1.0, sign * alpha[k]);
    out.segment(ms.pmu_rows[k].offset, ms.pmu_rows[k].count) *= rot;
  }
  return out;
}

inline MeasurementVector apply_attack(const MeasurementVector& z, const AttackVector& alpha,
                                      const MeasurementSystem& ms) {
  return rotate_pmus(z, alpha.values(), ms, +1.0);
}

/// Inverse rotation, i.e. Phi(alpha)^-1 z.
inline MeasurementVector remove_attack(const MeasurementVector& z, const AttackVector& alpha,
                                       const MeasurementSystem& ms) {
  return rotate_pmus(z, alpha.values(), ms, -1.0);
}

/// Maps spoofed phasors to voltage angles and line angle differences. The
/// line differences do not depend on the PMU's phase bias.
inline AlternativeMeasurements transform_alternative(const MeasurementVector& z_bar, const MeasurementSystem& ms) {
  if (z_bar.size() != ms.measurement_count()) throw ValidationError("measurement length does not match H");
  AlternativeMeasurements w;
  w.w_angle_v.resize(ms.pmu_count());
  w.w_delta.resize(static_cast<Eigen::Index>(ms.delta_rows.size()));
  for (int k = 0; k < ms.pmu_count(); ++k) {
    const Complex zv = z_bar[ms.pmu_rows[k].offset];
    if (zv == Complex(0.0, 0.0))
      throw ValidationError("zero voltage measurement at bus " + std::to_string(ms.rows[ms.pmu_rows[k].offset].bus_i));
    w.w_angle_v[k] = wrap_angle(std::arg(zv));
  }
  for (std::size_t d = 0; d < ms.delta_rows.size(); ++d) {
    const MeasurementRow& row = ms.rows[ms.delta_rows[d]];
    const Complex zv = z_bar[ms.pmu_rows[row.pmu].offset];
    const Complex zi = z_bar[ms.delta_rows[d]];
    const Complex yc = std::conj(row.series_admittance);
    const Complex num = (yc - Complex(0.0, row.shunt_susceptance / 2.0)) * std::norm(zv) - zv * std::conj(zi);
    w.w_delta[static_cast<Eigen::Index>(d)] = wrap_angle(std::arg(num / yc));
  }
  return w;
}

}  // namespace pmuguard

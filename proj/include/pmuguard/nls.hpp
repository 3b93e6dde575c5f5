#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "pmuguard/levenberg_marquardt.hpp"
#include "pmuguard/projection.hpp"

namespace pmuguard {

/// f(alpha) = ||(I - P) Phi^-1(alpha) z||^2 for one zone, as a real
/// least-squares problem in the supported coordinates. The residual is the
/// complex projection residue stacked as [Re; Im].
class ZoneResidueProblem {
 public:
  /// `support` holds positions into `zone.pmus`; all other coordinates are 0.
  ZoneResidueProblem(const ZoneProjector& zone, Eigen::VectorXcd z_local, std::vector<int> support)
      : zone_(zone), z_(std::move(z_local)), support_(std::move(support)) {}

  const std::vector<int>& support() const { return support_; }

  Eigen::VectorXd zone_alpha(const Eigen::VectorXd& params) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(zone_.pmus.size()));
    for (std::size_t j = 0; j < support_.size(); ++j) a[support_[j]] = params[static_cast<Eigen::Index>(j)];
    return a;
  }

  Eigen::VectorXcd complex_residual(const Eigen::VectorXd& params) const {
    return zone_.complement(derotated_zone_measurements(zone_, z_, zone_alpha(params)));
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& params) const { return stack(complex_residual(params)); }

  double cost(const Eigen::VectorXd& params) const { return complex_residual(params).squaredNorm(); }

  /// d r / d alpha_k = (I - P) u_k with u_k = -j exp(-j alpha_k) z on PMU k's rows.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& params) const {
    const Eigen::Index m = z_.size();
    Eigen::MatrixXd jac(2 * m, static_cast<Eigen::Index>(support_.size()));
    for (std::size_t j = 0; j < support_.size(); ++j) {
      const RowRange& rr = zone_.pmu_local[support_[j]];
      Eigen::VectorXcd u = Eigen::VectorXcd::Zero(m);
      const Complex d = Complex(0.0, -1.0) * std::polar(1.0, -params[static_cast<Eigen::Index>(j)]);
      u.segment(rr.offset, rr.count) = d * z_.segment(rr.offset, rr.count);
      jac.col(static_cast<Eigen::Index>(j)) = stack(zone_.complement(u));
    }
    return jac;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& params) const {
    return 2.0 * jacobian(params).transpose() * residual(params);
  }

 private:
  static Eigen::VectorXd stack(const Eigen::VectorXcd& c) {
    Eigen::VectorXd s(2 * c.size());
    s.head(c.size()) = c.real();
    s.tail(c.size()) = c.imag();
    return s;
  }

  const ZoneProjector& zone_;
  Eigen::VectorXcd z_;
  std::vector<int> support_;
};

struct NlsOptions {
  int max_iters = 200;
  double gradient_tol = 1e-12;
  double damping_init = 1e-3;
};

struct NlsFit {
  Eigen::VectorXd zone_alpha;  // indexed like ZoneProjector::pmus, wrapped
  double cost = 0.;
  double gradient_norm = 0.;
  int iterations = 0;
  bool converged = false;
};

/// Fits the zone's attack angles restricted to `support` (positions into
/// zone.pmus). Coordinates start from `initial` (zone-indexed); when
/// `new_coordinate` is given it is first seeded by the best of `grid_points`
/// equispaced angles in (-pi, pi] with the other coordinates held fixed.
inline NlsFit nls_support_fit(const ZoneProjector& zone, const Eigen::VectorXcd& z_local,
                              const std::vector<int>& support, const Eigen::VectorXd& initial,
                              std::optional<int> new_coordinate, int grid_points, const NlsOptions& opt) {
  if (support.empty()) throw ValidationError("support must be nonempty");
  ZoneResidueProblem problem(zone, z_local, support);
  Eigen::VectorXd x(static_cast<Eigen::Index>(support.size()));
  std::optional<Eigen::Index> seeded;
  for (std::size_t j = 0; j < support.size(); ++j) {
    x[static_cast<Eigen::Index>(j)] = initial[support[j]];
    if (new_coordinate && support[j] == *new_coordinate) seeded = static_cast<Eigen::Index>(j);
  }
  if (seeded) {
    double best = std::numeric_limits<double>::infinity();
    double best_angle = 0.0;
    for (int g = 1; g <= grid_points; ++g) {
      const double angle = -kPi + 2.0 * kPi * g / grid_points;
      x[*seeded] = angle;
      const double c = problem.cost(x);
      if (c < best) {
        best = c;
        best_angle = angle;
      }
    }
    x[*seeded] = best_angle;
  }

  LmOptions lm;
  lm.max_iters = opt.max_iters;
  lm.gradient_tol = opt.gradient_tol;
  lm.damping_init = opt.damping_init;
  const LmResult r = levenberg_marquardt(problem, x, lm);

  NlsFit fit;
  fit.zone_alpha = problem.zone_alpha(r.x);
  for (Eigen::Index i = 0; i < fit.zone_alpha.size(); ++i) fit.zone_alpha[i] = wrap_angle(fit.zone_alpha[i]);
  fit.cost = r.cost;
  fit.gradient_norm = r.gradient_norm;
  fit.iterations = r.iterations;
  fit.converged = r.converged;
  return fit;
}

}  // namespace pmuguard

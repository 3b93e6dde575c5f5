#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pmuguard/attack.hpp"
#include "pmuguard/greedy.hpp"
#include "pmuguard/measurement_io.hpp"
#include "pmuguard/identifiability.hpp"
#include "pmuguard/projection.hpp"
#include "pmuguard/synthetic.hpp"
#include "pmuguard/zones.hpp"

namespace pmuguard {

struct SyntheticSpec {
  std::vector<int> zone_sizes;
  int buses_per_zone = 0;
  std::uint64_t seed = 1;
};

/// Monte Carlo protocol: perturbed states, noisy measurements, the same
/// fraction of PMUs spoofed in every zone with angles drawn from
/// +/- Uniform(0.8 mu, 1.2 mu).
struct ExperimentSpec {
  std::string network_path;  // empty: use `synthetic`
  SyntheticSpec synthetic{{7, 14}, 0, 1};
  double spoof_fraction = 0.1;
  double attack_mean = deg_to_rad(20.0);  // radians
  int runs = 100;
  std::uint64_t seed = 1;
  double sigma_mag = 0.01;
  double sigma_ang = deg_to_rad(5.73);
  double sigma_noise = 0.001;
  double confidence = 0.99;
  int threads = 0;  // 0: hardware concurrency
  CorrectionConfig correction;
};

inline void validate(const ExperimentSpec& s) {
  if (!(s.spoof_fraction >= 0.0 && s.spoof_fraction <= 1.0)) throw ValidationError("spoof_fraction must be in [0, 1]");
  if (s.runs < 1) throw ValidationError("runs must be at least 1");
  if (s.attack_mean < 0) throw ValidationError("attack mean must be non-negative");
  if (s.sigma_mag < 0 || s.sigma_ang < 0 || s.sigma_noise < 0)
    throw ValidationError("standard deviations must be non-negative");
}

/// Reads an experiment description. Angles are given in degrees.
inline ExperimentSpec parse_experiment_spec(const nlohmann::json& j) {
  ExperimentSpec s;
  try {
    if (j.contains("network")) s.network_path = j.at("network").get<std::string>();
    if (j.contains("synthetic")) {
      const auto& syn = j.at("synthetic");
      s.synthetic.zone_sizes = syn.at("zone_sizes").get<std::vector<int>>();
      s.synthetic.buses_per_zone = syn.value("buses_per_zone", 0);
      s.synthetic.seed = syn.value("seed", std::uint64_t{1});
    }
    s.spoof_fraction = j.value("spoof_fraction", s.spoof_fraction);
    s.attack_mean = deg_to_rad(j.value("attack_mean_deg", 20.0));
    s.runs = j.value("runs", s.runs);
    s.seed = j.value("seed", s.seed);
    s.sigma_mag = j.value("sigma_mag", s.sigma_mag);
    s.sigma_ang = deg_to_rad(j.value("sigma_ang_deg", 5.73));
    s.sigma_noise = j.value("sigma_noise", s.sigma_noise);
    s.confidence = j.value("confidence", s.confidence);
    s.threads = j.value("threads", s.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("experiment spec: ") + e.what());
  }
  validate(s);
  return s;
}

/// round(A * K) spoofed PMUs per zone, at least one when A > 0 and K >= 2.
inline int spoof_count(double fraction, int pmu_count) {
  int c = static_cast<int>(std::lround(fraction * pmu_count));
  if (fraction > 0 && pmu_count >= 2) c = std::max(c, 1);
  return c;
}

inline AttackVector generate_attack(const ZonePartition& zp, double spoof_fraction, double attack_mean,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> magnitude(0.8 * attack_mean, 1.2 * attack_mean);
  std::bernoulli_distribution negative(0.5);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(zp.pmu_to_zone.size()));
  for (const Zone& z : zp.zones) {
    const int count = spoof_count(spoof_fraction, z.pmu_count());
    if (count > z.pmu_count()) throw ValidationError("spoof count exceeds the zone's PMU count");
    std::vector<int> pmus = z.pmus;
    std::shuffle(pmus.begin(), pmus.end(), rng);
    for (int i = 0; i < count; ++i) {
      const double mag = magnitude(rng);
      alpha[pmus[i]] = negative(rng) ? -mag : mag;
    }
  }
  return AttackVector(alpha);
}

struct RunRecord {
  int index = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd alpha;      // radians
  Eigen::VectorXd alpha_hat;  // radians
  double linf_deg = 0.;
  bool support_recovered = false;
  bool converged = false;
  int spoofed = 0;
  double wall_seconds = 0.;
};

struct ExperimentSummary {
  std::vector<RunRecord> runs;
  double median_deg = 0.;
  double std_deg = 0.;  // sample standard deviation
  double max_deg = 0.;
  double support_recovery_rate = 0.;
  double mean_wall_seconds = 0.;
};

/// max_k |wrap(alpha_hat_k - alpha_k)| in degrees.
inline double linf_error_deg(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& alpha) {
  double e = 0.0;
  for (Eigen::Index k = 0; k < alpha.size(); ++k) e = std::max(e, std::abs(wrap_angle(alpha_hat[k] - alpha[k])));
  return rad_to_deg(e);
}

struct SummaryStats {
  double median = 0., std = 0., max = 0.;
};

inline SummaryStats summarize(std::vector<double> v) {
  SummaryStats s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  s.max = v.back();
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  s.std = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  return s;
}

inline ExperimentSummary aggregate(std::vector<RunRecord> runs) {
  ExperimentSummary sum;
  std::vector<double> errs;
  int recovered = 0;
  double wall = 0.0;
  for (const RunRecord& r : runs) {
    errs.push_back(r.linf_deg);
    recovered += r.support_recovered ? 1 : 0;
    wall += r.wall_seconds;
  }
  const SummaryStats st = summarize(errs);
  sum.median_deg = st.median;
  sum.std_deg = st.std;
  sum.max_deg = st.max;
  if (!runs.empty()) {
    sum.support_recovery_rate = static_cast<double>(recovered) / static_cast<double>(runs.size());
    sum.mean_wall_seconds = wall / static_cast<double>(runs.size());
  }
  sum.runs = std::move(runs);
  return sum;
}

inline NetworkModel experiment_network(const ExperimentSpec& spec) {
  if (!spec.network_path.empty()) return load_network(spec.network_path);
  return generate_synthetic_network(spec.synthetic.zone_sizes, spec.synthetic.buses_per_zone, spec.synthetic.seed);
}

/// Runs are independent and keyed by index, so the result does not depend
/// on the number of worker threads.
inline ExperimentSummary run_experiment(const NetworkModel& net, const ExperimentSpec& spec) {
  validate(spec);
  const MeasurementSystem ms = build_measurement_system(net);
  const ZonePartition zp = compute_zones(net);
  const ProjectionOperator proj = build_projection(ms, zp, spec.correction.rank_tol);
  CorrectionConfig cfg = spec.correction;
  cfg.tau = set_tau(proj, spec.sigma_noise, spec.confidence).tau;
  const StateVector base = flat_state(ms.bus_count());

  std::vector<RunRecord> records(static_cast<std::size_t>(spec.runs));
  auto one_run = [&](int i) {
    RunRecord rec;
    rec.index = i;
    rec.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(i));
    const StateVector x = sample_state(base, spec.sigma_mag, spec.sigma_ang, mix_seed(rec.seed, 1));
    const MeasurementVector z = generate_measurements(ms, x, spec.sigma_noise, mix_seed(rec.seed, 2));
    const AttackVector alpha = generate_attack(zp, spec.spoof_fraction, spec.attack_mean, mix_seed(rec.seed, 3));
    const MeasurementVector z_bar = apply_attack(z, alpha, ms);
    const auto t0 = std::chrono::steady_clock::now();
    const CorrectionResult res = greedy_correct(z_bar, ms, zp, proj, cfg);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.alpha = alpha.values();
    rec.alpha_hat = res.alpha_hat.values();
    rec.linf_deg = linf_error_deg(rec.alpha_hat, rec.alpha);
    rec.support_recovered = res.alpha_hat.support() == alpha.support();
    rec.converged = res.converged;
    rec.spoofed = alpha.l0();
    records[static_cast<std::size_t>(i)] = std::move(rec);
  };

  int threads = spec.threads > 0 ? spec.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, spec.runs);
  if (threads == 1) {
    for (int i = 0; i < spec.runs; ++i) one_run(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int i = next++; i < spec.runs; i = next++) one_run(i);
      });
    for (auto& th : pool) th.join();
  }
  return aggregate(std::move(records));
}

inline ExperimentSummary run_experiment(const ExperimentSpec& spec) { return run_experiment(experiment_network(spec), spec); }

inline constexpr const char* kRunsCsvHeader =
    "run,seed,linf_deg,support_recovered,converged,spoofed,wall_seconds,alpha_deg,alpha_hat_deg";

namespace detail {

inline std::string join_degrees(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) s += ';';
    s += format_double(rad_to_deg(v[k]));
  }
  return s;
}

}  // namespace detail

/// Per-run rows; vectors are ';'-separated degrees.
inline void write_runs_csv(std::ostream& out, const ExperimentSummary& s) {
  out << kRunsCsvHeader << '\n';
  for (const RunRecord& r : s.runs) {
    out << r.index << ',' << r.seed << ',' << detail::format_double(r.linf_deg) << ',' << (r.support_recovered ? 1 : 0)
        << ',' << (r.converged ? 1 : 0) << ',' << r.spoofed << ',' << detail::format_double(r.wall_seconds) << ','
        << detail::join_degrees(r.alpha) << ',' << detail::join_degrees(r.alpha_hat) << '\n';
  }
}

inline nlohmann::json summary_to_json(const ExperimentSummary& s) {
  return {{"runs", s.runs.size()},
          {"median_linf_deg", s.median_deg},
          {"std_linf_deg", s.std_deg},
          {"max_linf_deg", s.max_deg},
          {"support_recovery_rate", s.support_recovery_rate},
          {"mean_wall_seconds", s.mean_wall_seconds}};
}

/// Writes <dir>/runs.csv and <dir>/summary.json.
inline void emit_results(const ExperimentSummary& s, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create " + dir.string() + ": " + ec.message());
  const auto csv_path = dir / "runs.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw ValidationError("cannot write " + csv_path.string());
  write_runs_csv(csv, s);
  if (!csv) throw ValidationError("write failed for " + csv_path.string());
  const auto json_path = dir / "summary.json";
  std::ofstream js(json_path);
  if (!js) throw ValidationError("cannot write " + json_path.string());
  js << summary_to_json(s).dump(2) << '\n';
  if (!js) throw ValidationError("write failed for " + json_path.string());
}

}  // namespace pmuguard

// pmuguard command line: topology analysis, Monte Carlo simulation,
// spoofed-measurement correction and witness construction.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "pmuguard/pmuguard.hpp"

namespace {

using nlohmann::json;
using namespace pmuguard;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;

json bus_list(const NetworkModel& net, const std::vector<int>& cols) {
  json a = json::array();
  for (int c : cols) a.push_back(net.buses()[static_cast<std::size_t>(c)]);
  return a;
}

json pmu_bus_list(const NetworkModel& net, const std::vector<int>& pmus) {
  json a = json::array();
  for (int p : pmus) a.push_back(net.pmus()[static_cast<std::size_t>(p)].bus);
  return a;
}

json degrees(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(rad_to_deg(v[i]));
  return a;
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

json analyze(const NetworkModel& net) {
  const MeasurementSystem ms = build_measurement_system(net);
  const ZonePartition zp = compute_zones(net);
  const IdentifiabilityBudgets b = zone_thresholds(zp);
  json zones = json::array();
  for (int g = 0; g < zp.zone_count(); ++g) {
    const Zone& z = zp.zones[static_cast<std::size_t>(g)];
    zones.push_back({{"zone", g + 1},
                     {"buses", bus_list(net, z.buses)},
                     {"pmu_buses", pmu_bus_list(net, z.pmus)},
                     {"pmu_count", z.pmu_count()},
                     {"bus_count", z.bus_count()},
                     {"measurement_count", z.measurement_count()},
                     {"budget", b.per_zone[static_cast<std::size_t>(g)]}});
  }
  return {{"bus_count", ms.bus_count()}, {"pmu_count", ms.pmu_count()}, {"measurement_count", ms.measurement_count()},
          {"zones", zones},         {"k_min", b.k_min},         {"global_budget", b.global}};
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("bad zone size '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError("no zone sizes given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPS-spoofing attack analysis and correction for PMU networks"};
  app.require_subcommand(1);

  auto* analyze_cmd = app.add_subcommand("analyze", "zones and identifiability budgets of a network (JSON)");
  std::string analyze_net;
  analyze_cmd->add_option("network", analyze_net, "network JSON file")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "run a Monte Carlo experiment spec");
  std::string sim_spec;
  std::string sim_out;
  int sim_threads = -1;
  sim_cmd->add_option("spec", sim_spec, "experiment spec JSON")->required();
  sim_cmd->add_option("-o,--out", sim_out, "directory for runs.csv and summary.json");
  sim_cmd->add_option("--threads", sim_threads, "worker threads (0: hardware concurrency)");

  auto* corr_cmd = app.add_subcommand("correct", "estimate and remove spoofing angles from a measurement CSV");
  std::string corr_net;
  std::string corr_meas;
  double corr_sigma = 0.001;
  double corr_conf = 0.99;
  int corr_max_support = -1;
  std::string corr_json;
  std::string corr_csv;
  corr_cmd->add_option("network_file", corr_net, "network JSON file");
  corr_cmd->add_option("measurement_file", corr_meas, "measurement CSV");
  corr_cmd->add_option("--network", corr_net, "network JSON file");
  corr_cmd->add_option("--measurements", corr_meas, "measurement CSV");
  corr_cmd->add_option("--sigma", corr_sigma, "measurement noise std (p.u.)")->check(CLI::NonNegativeNumber);
  corr_cmd->add_option("--confidence", corr_conf, "threshold confidence in (0, 1)");
  corr_cmd->add_option("--max-support", corr_max_support, "cap on the number of PMUs flagged");
  corr_cmd->add_option("--out-json", corr_json, "result JSON path (default stdout)");
  corr_cmd->add_option("--out-csv", corr_csv, "corrected measurement CSV path");

  auto* wit_cmd = app.add_subcommand("witness", "construct an unidentifiable attack one past a zone's budget");
  std::string wit_net;
  int wit_zone = 1;
  double wit_shift = 20.0;
  wit_cmd->add_option("network", wit_net, "network JSON file")->required();
  wit_cmd->add_option("--zone", wit_zone, "zone number (1-based, as printed by analyze)");
  wit_cmd->add_option("--shift", wit_shift, "shift a in degrees");

  auto* gen_cmd = app.add_subcommand("gen-net", "generate a synthetic multi-zone network");
  std::string gen_sizes;
  int gen_bpz = 0;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen_cmd->add_option("sizes", gen_sizes, "comma-separated PMU counts per zone, e.g. 7,14")->required();
  gen_cmd->add_option("--buses-per-zone", gen_bpz, "buses per zone (0: twice the PMU count)");
  gen_cmd->add_option("--seed", gen_seed, "generator seed");
  gen_cmd->add_option("-o,--out", gen_out, "output path (default stdout)");

  auto* meas_cmd = app.add_subcommand("measure", "synthesize (optionally spoofed) measurements as CSV");
  std::string meas_net;
  std::string meas_out;
  double meas_sigma = 0.001;
  std::uint64_t meas_seed = 1;
  std::vector<std::string> meas_attacks;
  meas_cmd->add_option("network", meas_net, "network JSON file")->required();
  meas_cmd->add_option("-o,--out", meas_out, "output CSV (default stdout)");
  meas_cmd->add_option("--sigma", meas_sigma, "measurement noise std (p.u.)")->check(CLI::NonNegativeNumber);
  meas_cmd->add_option("--seed", meas_seed, "seed for state and noise");
  meas_cmd->add_option("--attack", meas_attacks, "spoof PMU:DEGREES (0-based PMU index, file order); repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*analyze_cmd) {
      std::cout << analyze(load_network(analyze_net)).dump(2) << '\n';
      return kExitOk;
    }

    if (*sim_cmd) {
      const std::filesystem::path spec_path(sim_spec);
      json j;
      try {
        j = json::parse(read_text_file(sim_spec));
      } catch (const json::exception& e) {
        throw ValidationError(sim_spec + ": " + e.what());
      }
      ExperimentSpec spec = parse_experiment_spec(j);
      if (!spec.network_path.empty() && std::filesystem::path(spec.network_path).is_relative())
        spec.network_path = (spec_path.parent_path() / spec.network_path).string();
      if (sim_threads >= 0) spec.threads = sim_threads;
      const ExperimentSummary s = run_experiment(spec);
      if (!sim_out.empty()) emit_results(s, sim_out);
      std::cout << summary_to_json(s).dump(2) << '\n';
      return kExitOk;
    }

    if (*corr_cmd) {
      if (corr_net.empty() || corr_meas.empty()) throw ValidationError("correct needs a network and a measurement file");
      const NetworkModel net = load_network(corr_net);
      const MeasurementSystem ms = build_measurement_system(net);
      const ZonePartition zp = compute_zones(net);
      const MeasurementVector z_bar = read_measurements_csv(corr_meas, ms);
      CorrectionConfig cfg;
      cfg.max_support = corr_max_support;
      const ProjectionOperator proj = build_projection(ms, zp, cfg.rank_tol);
      const ResidueThreshold th = set_tau(proj, corr_sigma, corr_conf);
      if (th.degenerate) std::cerr << "warning: no residual degrees of freedom; tau = 0\n";
      cfg.tau = th.tau;
      const CorrectionResult res = greedy_correct(z_bar, ms, zp, proj, cfg);

      json support = json::array();
      for (const SupportEntry& e : res.support_trace)
        support.push_back({{"iteration", e.iteration},
                           {"pmu", e.pmu},
                           {"bus", net.pmus()[static_cast<std::size_t>(e.pmu)].bus},
                           {"zone", e.zone + 1}});
      const json out = {{"alpha_hat_degrees", degrees(res.alpha_hat.values())},
                        {"support", support},
                        {"residue_trace", res.residue_trace},
                        {"initial_residue", res.initial_residue_norm2},
                        {"tau", res.threshold},
                        {"converged", res.converged}};
      write_json(out, corr_json);
      if (!corr_csv.empty()) write_measurements_csv(corr_csv, res.z_hat, ms);
      if (!res.converged) {
        std::cerr << "residue " << res.final_residue_norm2() << " did not reach tau " << res.threshold << '\n';
        return kExitNotConverged;
      }
      return kExitOk;
    }

    if (*wit_cmd) {
      const NetworkModel net = load_network(wit_net);
      const ZonePartition zp = compute_zones(net);
      if (wit_zone < 1 || wit_zone > zp.zone_count())
        throw ValidationError("zone must be in 1.." + std::to_string(zp.zone_count()));
      const UnidentifiableWitness w = construct_unidentifiable_attack(zp, wit_zone - 1, deg_to_rad(wit_shift));

      // Check the construction on a flat-start-perturbed state before printing it.
      const MeasurementSystem ms = build_measurement_system(net);
      const StateVector x = sample_state(flat_state(ms.bus_count()), 0.01, deg_to_rad(5.73), 7);
      const MeasurementVector lhs = apply_attack(ms.h * x, w.alpha, ms);
      const MeasurementVector rhs = apply_attack(ms.h * w.transform_state(x), w.alpha_bar, ms);
      const json out = {{"zone", wit_zone},
                        {"shift_degrees", rad_to_deg(w.shift)},
                        {"kappa", w.kappa},
                        {"budget", spoof_budget(zp.zones[static_cast<std::size_t>(w.zone)].pmu_count())},
                        {"alpha_degrees", degrees(w.alpha.values())},
                        {"alpha_bar_degrees", degrees(w.alpha_bar.values())},
                        {"alpha_l0", w.alpha.l0()},
                        {"alpha_bar_l0", w.alpha_bar.l0()},
                        {"rotated_buses", bus_list(net, w.rotated_buses)},
                        {"max_measurement_difference", (lhs - rhs).cwiseAbs().maxCoeff()}};
      std::cout << out.dump(2) << '\n';
      return kExitOk;
    }

    if (*gen_cmd) {
      const NetworkModel net = generate_synthetic_network(parse_sizes(gen_sizes), gen_bpz, gen_seed);
      write_json(network_to_json(net), gen_out);
      return kExitOk;
    }

    if (*meas_cmd) {
      const NetworkModel net = load_network(meas_net);
      const MeasurementSystem ms = build_measurement_system(net);
      Eigen::VectorXd alpha = Eigen::VectorXd::Zero(ms.pmu_count());
      for (const std::string& spec : meas_attacks) {
        const auto colon = spec.find(':');
        int pmu = -1;
        double deg = 0.0;
        try {
          if (colon == std::string::npos) throw std::invalid_argument(spec);
          pmu = std::stoi(spec.substr(0, colon));
          deg = std::stod(spec.substr(colon + 1));
        } catch (const std::exception&) {
          throw ValidationError("attack must be PMU:DEGREES, got '" + spec + "'");
        }
        if (pmu < 0 || pmu >= ms.pmu_count())
          throw ValidationError("PMU index " + std::to_string(pmu) + " out of range 0.." +
                                std::to_string(ms.pmu_count() - 1));
        alpha[pmu] = wrap_angle(deg_to_rad(deg));
      }
      const StateVector x = sample_state(flat_state(ms.bus_count()), 0.01, deg_to_rad(5.73), mix_seed(meas_seed, 1));
      const MeasurementVector z = generate_measurements(ms, x, meas_sigma, mix_seed(meas_seed, 2));
      const MeasurementVector z_bar = apply_attack(z, AttackVector(alpha), ms);
      if (meas_out.empty() || meas_out == "-")
        write_measurements_csv(std::cout, z_bar, ms);
      else
        write_measurements_csv(meas_out, z_bar, ms);
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pmuguard/pmuguard.hpp"

using namespace pmuguard;

namespace {

ExperimentSpec small_spec(int runs) {
  ExperimentSpec s;
  s.synthetic = {{7, 14}, 0, 1};
  s.runs = runs;
  s.seed = 42;
  s.threads = 1;
  return s;
}

std::vector<double> parse_degrees(const std::string& cell) {
  std::vector<double> v;
  std::stringstream ss(cell);
  std::string item;
  while (std::getline(ss, item, ';')) v.push_back(std::stod(item));
  return v;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pmuguard_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(GenerateAttack, CountsAndMagnitudes) {
  const ZonePartition zp = compute_zones(generate_synthetic_network({7, 14}, 0, 1));
  for (std::uint64_t s = 0; s < 50; ++s) {
    const AttackVector a = generate_attack(zp, 0.1, deg_to_rad(20.0), s);
    const auto c = check_identifiable(a, zp);
    EXPECT_EQ(c.spoofed_per_zone, (std::vector<int>{1, 1}));
    for (int k : a.support()) {
      EXPECT_GT(std::abs(rad_to_deg(a[k])), 16.0);
      EXPECT_LT(std::abs(rad_to_deg(a[k])), 24.0);
    }
  }
  EXPECT_EQ(generate_attack(zp, 0.0, deg_to_rad(20.0), 3).l0(), 0);
}

TEST(GenerateAttack, SpoofCountRounding) {
  EXPECT_EQ(spoof_count(0.1, 7), 1);
  EXPECT_EQ(spoof_count(0.1, 14), 1);
  EXPECT_EQ(spoof_count(0.2, 14), 3);
  EXPECT_EQ(spoof_count(0.4, 7), 3);
  EXPECT_EQ(spoof_count(0.01, 2), 1);
  EXPECT_EQ(spoof_count(0.3, 1), 0);
  EXPECT_EQ(spoof_count(0.0, 9), 0);
  EXPECT_EQ(spoof_count(1.0, 9), 9);
}

TEST(GenerateAttack, MagnitudeMeanAndSignBalance) {
  const ZonePartition zp = compute_zones(generate_synthetic_network({7, 14}, 0, 1));
  double sum = 0.0;
  int n = 0, negative = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const AttackVector a = generate_attack(zp, 0.1, deg_to_rad(20.0), s);
    for (int k : a.support()) {
      sum += std::abs(rad_to_deg(a[k]));
      negative += a[k] < 0;
      ++n;
    }
  }
  EXPECT_NEAR(sum / n / 20.0, 1.0, 0.02);
  EXPECT_NEAR(static_cast<double>(negative) / n, 0.5, 0.02);
}

TEST(ExperimentSpec, ParseAndValidate) {
  const auto s = parse_experiment_spec(nlohmann::json::parse(
      R"({"synthetic":{"zone_sizes":[3,4]},"spoof_fraction":0.25,"attack_mean_deg":10,"runs":5,"sigma_noise":0})"));
  EXPECT_EQ(s.synthetic.zone_sizes, (std::vector<int>{3, 4}));
  EXPECT_DOUBLE_EQ(s.spoof_fraction, 0.25);
  EXPECT_NEAR(s.attack_mean, deg_to_rad(10.0), 1e-15);
  EXPECT_EQ(s.runs, 5);
  EXPECT_THROW(parse_experiment_spec(nlohmann::json::parse(R"({"spoof_fraction":1.5})")), ValidationError);
  EXPECT_THROW(parse_experiment_spec(nlohmann::json::parse(R"({"runs":0})")), ValidationError);
  EXPECT_THROW(parse_experiment_spec(nlohmann::json::parse(R"({"runs":"many"})")), ValidationError);
}

TEST(RunExperiment, DeterministicAndThreadIndependent) {
  ExperimentSpec s = small_spec(1);
  const ExperimentSummary a = run_experiment(s);
  const ExperimentSummary b = run_experiment(s);
  EXPECT_EQ(a.median_deg, b.median_deg);
  EXPECT_EQ(a.runs[0].alpha_hat, b.runs[0].alpha_hat);

  s.runs = 12;
  const ExperimentSummary seq = run_experiment(s);
  s.threads = 3;
  const ExperimentSummary par = run_experiment(s);
  ASSERT_EQ(seq.runs.size(), par.runs.size());
  for (std::size_t i = 0; i < seq.runs.size(); ++i) {
    EXPECT_EQ(seq.runs[i].seed, par.runs[i].seed);
    EXPECT_EQ(seq.runs[i].alpha, par.runs[i].alpha);
    EXPECT_EQ(seq.runs[i].alpha_hat, par.runs[i].alpha_hat);
  }
  EXPECT_EQ(seq.median_deg, par.median_deg);
  EXPECT_EQ(seq.max_deg, par.max_deg);
}

TEST(RunExperiment, NoiselessMedianIsNearZero) {
  ExperimentSpec s = small_spec(100);
  s.sigma_noise = 0.0;
  const ExperimentSummary sum = run_experiment(s);
  EXPECT_EQ(sum.runs.size(), 100u);
  EXPECT_LT(sum.median_deg, 0.01);
}

TEST(RunExperiment, ReportedLinfMatchesStoredVectors) {
  const ExperimentSummary sum = run_experiment(small_spec(20));
  for (const RunRecord& r : sum.runs) {
    double e = 0.0;
    for (Eigen::Index k = 0; k < r.alpha.size(); ++k)
      e = std::max(e, std::abs(wrap_angle(r.alpha_hat[k] - r.alpha[k])));
    EXPECT_DOUBLE_EQ(r.linf_deg, rad_to_deg(e));
  }
}

TEST(EmitResults, EmptyRunListGivesHeaderOnly) {
  const ExperimentSummary empty = aggregate({});
  std::stringstream ss;
  write_runs_csv(ss, empty);
  EXPECT_EQ(ss.str(), std::string(kRunsCsvHeader) + "\n");
}

TEST(EmitResults, CsvRoundTripMatchesSummary) {
  const ExperimentSummary sum = run_experiment(small_spec(100));
  const auto dir = temp_dir("emit");
  emit_results(sum, dir);

  std::ifstream csv(dir / "runs.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, kRunsCsvHeader);
  std::vector<double> linf;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    ASSERT_EQ(cells.size(), 9u);
    const auto alpha = parse_degrees(cells[7]);
    const auto alpha_hat = parse_degrees(cells[8]);
    double e = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k)
      e = std::max(e, std::abs(rad_to_deg(wrap_angle(deg_to_rad(alpha_hat[k] - alpha[k])))));
    EXPECT_NEAR(e, std::stod(cells[2]), 1e-9);
    linf.push_back(std::stod(cells[2]));
  }
  EXPECT_EQ(linf.size(), 100u);

  std::ifstream js(dir / "summary.json");
  const auto j = nlohmann::json::parse(js);
  const SummaryStats st = summarize(linf);
  EXPECT_EQ(j.at("runs").get<int>(), 100);
  EXPECT_DOUBLE_EQ(j.at("median_linf_deg").get<double>(), st.median);
  EXPECT_DOUBLE_EQ(j.at("std_linf_deg").get<double>(), st.std);
  EXPECT_DOUBLE_EQ(j.at("max_linf_deg").get<double>(), st.max);
  std::filesystem::remove_all(dir);
}

TEST(EmitResults, UnwritableDirectoryReportsPath) {
  const auto blocker = temp_dir("blocker");
  { std::ofstream(blocker) << "x"; }
  try {
    emit_results(aggregate({}), blocker / "sub");
    FAIL() << "expected an error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("blocker"), std::string::npos);
  }
  std::filesystem::remove(blocker);
}

TEST(Summarize, MedianStdMax) {
  const SummaryStats s = summarize({3.0, 1.0, 2.0, 10.0});
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.max, 10.0);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(50.0 / 3.0));
  const SummaryStats one = summarize({4.0});
  EXPECT_DOUBLE_EQ(one.median, 4.0);
  EXPECT_DOUBLE_EQ(one.std, 0.0);
}

TEST(Scaling, DoublingZoneCountIsRoughlyLinear) {
  auto per_run = [](const std::vector<int>& sizes) {
    ExperimentSpec s;
    s.synthetic = {sizes, 0, 3};
    s.runs = 40;
    s.threads = 1;
    s.spoof_fraction = 0.15;
    const NetworkModel net = experiment_network(s);
    run_experiment(net, s);  // warm-up
    return run_experiment(net, s).mean_wall_seconds;
  };
  const double t1 = per_run({7, 7});
  const double t2 = per_run({7, 7, 7, 7});
  EXPECT_LT(t2 / t1, 3.0) << t1 << " " << t2;
}

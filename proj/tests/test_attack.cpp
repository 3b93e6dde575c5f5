#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "pmuguard/pmuguard.hpp"
#include "support/random_networks.hpp"

using namespace pmuguard;

namespace {

NetworkModel five_bus(double g = 1.0, double b = 0.0, double bs = 0.0) {
  std::vector<Branch> br;
  for (auto [f, t] : std::vector<std::pair<BusId, BusId>>{{1, 2}, {1, 3}, {3, 5}, {1, 4}})
    br.push_back({f, t, Complex(g, b), bs});
  return NetworkModel({1, 2, 3, 4, 5}, br, {{2, {1}}, {4, {1}}, {5, {3}}});
}

double angle_diff(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace

TEST(WrapAngle, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-15);
  EXPECT_NEAR(wrap_angle(0.5 + 4 * kPi), 0.5, 1e-14);
  for (double x = -20; x < 20; x += 0.37) {
    const double w = wrap_angle(x);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
  }
}

TEST(SampleState, ZeroVarianceReturnsBase) {
  const StateVector base = flat_state(6) * std::polar(1.05, 0.2);
  const StateVector x = sample_state(base, 0.0, 0.0, 99);
  EXPECT_EQ(x, base);
}

TEST(SampleState, Deterministic) {
  const StateVector base = flat_state(8);
  EXPECT_EQ(sample_state(base, 0.01, 0.1, 5), sample_state(base, 0.01, 0.1, 5));
  EXPECT_NE(sample_state(base, 0.01, 0.1, 5), sample_state(base, 0.01, 0.1, 6));
}

TEST(SampleState, AngleSpreadMatchesSigma) {
  const double sigma = deg_to_rad(5.73);
  const StateVector base = flat_state(10);
  std::vector<double> angles;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const StateVector x = sample_state(base, 0.01, sigma, s);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      EXPECT_GT(std::abs(x[i]), 0.0);
      angles.push_back(std::arg(x[i]));
    }
  }
  double mean = 0, ss = 0;
  for (double a : angles) mean += a;
  mean /= angles.size();
  for (double a : angles) ss += (a - mean) * (a - mean);
  const double sd = std::sqrt(ss / (angles.size() - 1));
  EXPECT_NEAR(sd / sigma, 1.0, 0.05);
}

TEST(SampleState, RejectsNegativeSigma) { EXPECT_THROW(sample_state(flat_state(2), -1.0, 0.0, 1), ValidationError); }

TEST(GenerateMeasurements, FlatStateCurrentsAreChargingTerms) {
  const NetworkModel net = five_bus(1.0, 0.0, 0.3);
  const MeasurementSystem ms = build_measurement_system(net);
  const MeasurementVector z = generate_measurements(ms, flat_state(5), 0.0, 1);
  for (int r = 0; r < ms.measurement_count(); ++r) {
    if (ms.rows[r].kind == RowKind::Voltage)
      EXPECT_EQ(z[r], Complex(1.0, 0.0));
    else
      EXPECT_EQ(z[r], Complex(0.0, 0.15));
  }
}

TEST(GenerateMeasurements, NoiselessIsInRange) {
  const NetworkModel net = generate_synthetic_network({4, 5}, 0, 3);
  const MeasurementSystem ms = build_measurement_system(net);
  const ProjectionOperator proj = build_projection(ms, compute_zones(net));
  const StateVector x = sample_state(flat_state(ms.bus_count()), 0.01, 0.1, 2);
  const MeasurementVector z = generate_measurements(ms, x, 0.0, 3);
  EXPECT_LT(residue(AttackVector::zeros(ms.pmu_count()), z, proj).norm(), 1e-10);
}

TEST(GenerateMeasurements, NoisePowerMatchesSigma) {
  const NetworkModel net = five_bus();
  const MeasurementSystem ms = build_measurement_system(net);
  const StateVector x = flat_state(5);
  const MeasurementVector clean = ms.h * x;
  double power = 0.0, re = 0.0, im = 0.0;
  int n = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const MeasurementVector e = generate_measurements(ms, x, 0.01, s) - clean;
    power += e.squaredNorm();
    re += e.real().squaredNorm();
    im += e.imag().squaredNorm();
    n += static_cast<int>(e.size());
  }
  EXPECT_NEAR(power / n / 1e-4, 1.0, 0.05);
  EXPECT_NEAR(re / im, 1.0, 0.05);
}

TEST(ApplyAttack, ZeroIsIdentity) {
  const MeasurementSystem ms = build_measurement_system(five_bus());
  const MeasurementVector z = generate_measurements(ms, sample_state(flat_state(5), 0.01, 0.1, 1), 0.01, 2);
  EXPECT_EQ(apply_attack(z, AttackVector::zeros(3), ms), z);
}

TEST(ApplyAttack, PiNegatesOnlyThatPmu) {
  const MeasurementSystem ms = build_measurement_system(five_bus());
  const MeasurementVector z = generate_measurements(ms, sample_state(flat_state(5), 0.01, 0.1, 1), 0.01, 2);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
  a[1] = kPi;
  const MeasurementVector zb = apply_attack(z, AttackVector(a), ms);
  for (int r = 0; r < ms.measurement_count(); ++r) {
    EXPECT_NEAR(std::abs(zb[r]), std::abs(z[r]), 1e-15);
    if (ms.rows[r].pmu == 1)
      EXPECT_NEAR(std::abs(zb[r] + z[r]), 0.0, 1e-15);
    else
      EXPECT_EQ(zb[r], z[r]);
  }
}

TEST(ApplyAttack, InverseRoundTripAndGroupAction) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const NetworkModel net = fixtures::random_network(seed, 12, 6);
    const MeasurementSystem ms = build_measurement_system(net);
    const int k = ms.pmu_count();
    MeasurementVector z(ms.measurement_count());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = Complex(u(rng), u(rng));
    Eigen::VectorXd a(k), b(k), ab(k);
    for (int i = 0; i < k; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      ab[i] = wrap_angle(a[i] + b[i]);
    }
    const MeasurementVector back = apply_attack(apply_attack(z, AttackVector(a), ms), AttackVector(-a), ms);
    EXPECT_LT((back - z).cwiseAbs().maxCoeff(), 1e-14);
    const MeasurementVector two = apply_attack(apply_attack(z, AttackVector(a), ms), AttackVector(b), ms);
    EXPECT_LT((two - apply_attack(z, AttackVector(ab), ms)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((remove_attack(apply_attack(z, AttackVector(a), ms), AttackVector(a), ms) - z).cwiseAbs().maxCoeff(),
              1e-14);
  }
}

TEST(AttackVector, SupportAndWrapping) {
  Eigen::VectorXd a(4);
  a << 0.0, 2 * kPi + 0.1, 0.0, -kPi;
  const AttackVector v(a);
  EXPECT_EQ(v.support(), (std::vector<int>{1, 3}));
  EXPECT_EQ(v.l0(), 2);
  EXPECT_NEAR(v[1], 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(v[3], kPi);
}

TEST(TransformAlternative, AngleDifferencesOnCleanData) {
  const NetworkModel net = five_bus(0.7, -4.0, 0.08);
  const MeasurementSystem ms = build_measurement_system(net);
  const StateVector x = sample_state(flat_state(5), 0.02, 0.3, 4);
  const AlternativeMeasurements w = transform_alternative(ms.h * x, ms);
  ASSERT_EQ(w.w_delta.size(), 3);
  for (Eigen::Index r = 0; r < w.w_delta.size(); ++r) {
    const MeasurementRow& row = ms.rows[ms.delta_rows[r]];
    EXPECT_LT(angle_diff(w.w_delta[r], std::arg(x[row.col_i]) - std::arg(x[row.col_l])), 1e-12);
  }
}

TEST(TransformAlternative, AttackShiftsOnlyVoltageAngles) {
  const NetworkModel net = five_bus(0.7, -4.0, 0.08);
  const MeasurementSystem ms = build_measurement_system(net);
  const StateVector x = sample_state(flat_state(5), 0.02, 0.3, 4);
  const MeasurementVector z = ms.h * x;
  Eigen::VectorXd a(3);
  a << 0.0, deg_to_rad(20.0), deg_to_rad(-35.0);
  const AlternativeMeasurements clean = transform_alternative(z, ms);
  const AlternativeMeasurements spoofed = transform_alternative(apply_attack(z, AttackVector(a), ms), ms);
  for (int k = 0; k < 3; ++k) {
    const int col = ms.rows[ms.pmu_rows[k].offset].col_i;
    EXPECT_LT(angle_diff(spoofed.w_angle_v[k], std::arg(x[col]) + a[k]), 1e-12);
  }
  for (Eigen::Index r = 0; r < clean.w_delta.size(); ++r)
    EXPECT_LT(angle_diff(spoofed.w_delta[r], clean.w_delta[r]), 1e-12);
}

TEST(TransformAlternative, DeltaInvariantUnderCommonRotation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const NetworkModel net = fixtures::random_network(seed, 10, 5, 0.8);
    const MeasurementSystem ms = build_measurement_system(net);
    MeasurementVector z(ms.measurement_count());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = std::polar(1.0 + 0.3 * u(rng) / kPi, u(rng));
    Eigen::VectorXd a(ms.pmu_count());
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = u(rng);
    const auto w0 = transform_alternative(z, ms);
    const auto w1 = transform_alternative(rotate_pmus(z, a, ms, 1.0), ms);
    for (Eigen::Index r = 0; r < w0.w_delta.size(); ++r) EXPECT_LT(angle_diff(w0.w_delta[r], w1.w_delta[r]), 1e-12);
  }
}

TEST(TransformAlternative, LinearModelConsistency) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const NetworkModel net = fixtures::random_network(seed, 14, 7, 0.7);
    const MeasurementSystem ms = build_measurement_system(net);
    const StateVector x = sample_state(flat_state(ms.bus_count()), 0.01, 0.5, seed);
    Eigen::VectorXd theta(ms.bus_count());
    for (int i = 0; i < ms.bus_count(); ++i) theta[i] = std::arg(x[i]);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    Eigen::VectorXd a(ms.pmu_count());
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = u(rng);
    const auto w = transform_alternative(apply_attack(ms.h * x, AttackVector(a), ms), ms);
    const Eigen::VectorXd pred_v = ms.h_angle_v * theta + a;
    const Eigen::VectorXd pred_d = ms.h_delta * theta;
    for (Eigen::Index i = 0; i < pred_v.size(); ++i) EXPECT_LT(angle_diff(w.w_angle_v[i], pred_v[i]), 1e-12);
    for (Eigen::Index i = 0; i < pred_d.size(); ++i) EXPECT_LT(angle_diff(w.w_delta[i], pred_d[i]), 1e-12);
  }
}

TEST(TransformAlternative, ZeroVoltageIsRejected) {
  const MeasurementSystem ms = build_measurement_system(five_bus());
  MeasurementVector z = ms.h * flat_state(5);
  z[ms.pmu_rows[2].offset] = 0.0;
  EXPECT_THROW(transform_alternative(z, ms), ValidationError);
}

TEST(MeasurementCsv, RoundTripIsExact) {
  const NetworkModel net = fixtures::random_network(2, 10, 5);
  const MeasurementSystem ms = build_measurement_system(net);
  const MeasurementVector z = generate_measurements(ms, sample_state(flat_state(10), 0.01, 0.1, 1), 0.01, 2);
  std::stringstream ss;
  write_measurements_csv(ss, z, ms);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "row_id,pmu,kind,bus_i,bus_l,re,im");
  ss.seekg(0);
  EXPECT_EQ(read_measurements_csv(ss, ms), z);
}

TEST(MeasurementCsv, RejectsMismatchedRows) {
  const MeasurementSystem ms = build_measurement_system(five_bus());
  const MeasurementVector z = ms.h * flat_state(5);
  std::stringstream ss;
  write_measurements_csv(ss, z, ms);
  const std::string good = ss.str();

  auto reject = [&](const std::string& text) {
    std::stringstream in(text);
    EXPECT_THROW(read_measurements_csv(in, ms), ValidationError) << text;
  };
  reject("");
  reject(good.substr(0, good.rfind('\n', good.size() - 2) + 1));  // last row missing
  std::string wrong_kind = good;
  wrong_kind.replace(wrong_kind.find(",V,"), 3, ",I,");
  reject(wrong_kind);
  reject(good + "5,2,I,5,3,0,0\n");  // duplicate row id
  std::string bad_number = good;
  bad_number.replace(bad_number.rfind(',') + 1, 1, "x");
  reject(bad_number);
}

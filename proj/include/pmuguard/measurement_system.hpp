#pragma once

#include <vector>

#include "pmuguard/common.hpp"
#include "pmuguard/network.hpp"

namespace pmuguard {

enum class RowKind { Voltage, Current };

/// Tag for one row of H. For voltage rows `bus_l` is unused (-1 column).
struct MeasurementRow {
  RowKind kind = RowKind::Voltage;
  int pmu = 0;
  BusId bus_i = 0;
  BusId bus_l = 0;
  int col_i = 0;
  int col_l = -1;
  Complex series_admittance;
  double shunt_susceptance = 0.;
};

struct RowRange {
  int offset = 0;
  int count = 0;
};

/// Complex measurement matrix H together with the real matrices of the
/// angle model: H_angleV (one row per PMU) and H_delta (one row per
/// measured line).
struct MeasurementSystem {
  Eigen::MatrixXcd h;
  std::vector<MeasurementRow> rows;
  std::vector<RowRange> pmu_rows;
  std::vector<BusId> bus_ids;
  Eigen::MatrixXd h_angle_v;
  Eigen::MatrixXd h_delta;
  std::vector<int> delta_rows;  // row of h for each row of h_delta

  int measurement_count() const { return static_cast<int>(h.rows()); }
  int bus_count() const { return static_cast<int>(h.cols()); }
  int pmu_count() const { return static_cast<int>(pmu_rows.size()); }
};

/// Columns follow the file order of buses; rows follow PMU order, each PMU
/// contributing its voltage row followed by one current row per measured
/// neighbor, in listed order.
inline MeasurementSystem build_measurement_system(const NetworkModel& net) {
  MeasurementSystem ms;
  ms.bus_ids = net.buses();
  const int n = static_cast<int>(net.bus_count());
  const int k = static_cast<int>(net.pmu_count());

  for (int p = 0; p < k; ++p) {
    const Pmu& pmu = net.pmus()[p];
    RowRange range{static_cast<int>(ms.rows.size()), 0};
    MeasurementRow v;
    v.kind = RowKind::Voltage;
    v.pmu = p;
    v.bus_i = pmu.bus;
    v.bus_l = pmu.bus;
    v.col_i = net.bus_index(pmu.bus);
    ms.rows.push_back(v);
    for (BusId l : pmu.measured_neighbors) {
      const Branch* br = net.find_branch(pmu.bus, l);
      MeasurementRow c;
      c.kind = RowKind::Current;
      c.pmu = p;
      c.bus_i = pmu.bus;
      c.bus_l = l;
      c.col_i = v.col_i;
      c.col_l = net.bus_index(l);
      c.series_admittance = br->series_admittance;
      c.shunt_susceptance = br->shunt_susceptance;
      ms.rows.push_back(c);
    }
    range.count = static_cast<int>(ms.rows.size()) - range.offset;
    ms.pmu_rows.push_back(range);
  }

  const int m = static_cast<int>(ms.rows.size());
  ms.h = Eigen::MatrixXcd::Zero(m, n);
  ms.h_angle_v = Eigen::MatrixXd::Zero(k, n);
  ms.h_delta = Eigen::MatrixXd::Zero(m - k, n);
  int delta = 0;
  for (int r = 0; r < m; ++r) {
    const MeasurementRow& row = ms.rows[r];
    if (row.kind == RowKind::Voltage) {
      ms.h(r, row.col_i) = 1.0;
      ms.h_angle_v(row.pmu, row.col_i) = 1.0;
    } else {
      const Complex y = row.series_admittance;
      ms.h(r, row.col_i) = y + Complex(0.0, row.shunt_susceptance / 2.0);
      ms.h(r, row.col_l) = -y;
      ms.h_delta(delta, row.col_i) = 1.0;
      ms.h_delta(delta, row.col_l) = -1.0;
      ms.delta_rows.push_back(r);
      ++delta;
    }
  }
  return ms;
}

}  // namespace pmuguard

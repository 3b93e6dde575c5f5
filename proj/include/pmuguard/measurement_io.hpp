#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pmuguard/attack.hpp"

namespace pmuguard {

inline constexpr const char* kMeasurementCsvHeader = "row_id,pmu,kind,bus_i,bus_l,re,im";

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// One line per row of H. `pmu` is the 0-based PMU index; `bus_l` is empty
/// for voltage rows.
inline void write_measurements_csv(std::ostream& out, const MeasurementVector& z, const MeasurementSystem& ms) {
  if (z.size() != ms.measurement_count()) throw ValidationError("measurement length does not match H");
  out << kMeasurementCsvHeader << '\n';
  for (int r = 0; r < ms.measurement_count(); ++r) {
    const MeasurementRow& row = ms.rows[r];
    out << r << ',' << row.pmu << ',' << (row.kind == RowKind::Voltage ? "V" : "I") << ',' << row.bus_i << ',';
    if (row.kind == RowKind::Current) out << row.bus_l;
    out << ',' << detail::format_double(z[r].real()) << ',' << detail::format_double(z[r].imag()) << '\n';
  }
}

inline void write_measurements_csv(const std::string& path, const MeasurementVector& z, const MeasurementSystem& ms) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  write_measurements_csv(out, z, ms);
  if (!out) throw ValidationError("write failed for " + path);
}

/// Reads a measurement CSV and checks every row tag against `ms`.
inline MeasurementVector read_measurements_csv(std::istream& in, const MeasurementSystem& ms) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("measurement CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMeasurementCsvHeader) throw ValidationError("measurement CSV header must be '" +
                                                           std::string(kMeasurementCsvHeader) + "'");
  MeasurementVector z = MeasurementVector::Zero(ms.measurement_count());
  std::vector<bool> filled(static_cast<std::size_t>(ms.measurement_count()), false);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = "measurement CSV line " + std::to_string(line_no);
    if (cells.size() != 7) throw ValidationError(where + ": expected 7 columns");
    try {
      const int r = std::stoi(cells[0]);
      if (r < 0 || r >= ms.measurement_count()) throw ValidationError(where + ": row_id out of range");
      const MeasurementRow& row = ms.rows[r];
      const bool voltage = cells[2] == "V";
      if (!voltage && cells[2] != "I") throw ValidationError(where + ": kind must be V or I");
      if (std::stoi(cells[1]) != row.pmu || voltage != (row.kind == RowKind::Voltage) ||
          std::stol(cells[3]) != row.bus_i || (!voltage && std::stol(cells[4]) != row.bus_l))
        throw ValidationError(where + ": row tag does not match the network's measurement layout");
      if (filled[r]) throw ValidationError(where + ": duplicate row_id");
      filled[r] = true;
      z[r] = Complex(std::stod(cells[5]), std::stod(cells[6]));
    } catch (const std::logic_error&) {
      throw ValidationError(where + ": malformed number");
    }
  }
  for (int r = 0; r < ms.measurement_count(); ++r)
    if (!filled[r]) throw ValidationError("measurement CSV is missing row " + std::to_string(r));
  return z;
}

inline MeasurementVector read_measurements_csv(const std::string& path, const MeasurementSystem& ms) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return read_measurements_csv(in, ms);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace pmuguard

#pragma once

// CSV import/export of vehicle traces.
//
// Columns: t,vehicle_id,position_m,velocity_mps,ber,collided,responsible,lane,info_source
// The last two are optional on input. Rows are written step-major (all
// vehicles for t0, then t1, ...) with fixed-precision numbers so identical
// traces always serialize to identical bytes.

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sdc/error.hpp"
#include "sdc/ltl.hpp"

namespace sdc::io {

inline constexpr const char* kTraceHeader =
    "t,vehicle_id,position_m,velocity_mps,ber,collided,responsible,lane,info_source";

namespace detail {

inline std::string fixed(double value, int digits) {
  // Values that round to zero print as "0.000..." rather than "-0.000...".
  if (std::abs(value) < 0.5 * std::pow(10.0, -digits)) value = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

inline void write_trace_csv(std::ostream& out, std::span<const ltl::Trace> traces) {
  ltl::detail::require_common_horizon(traces);
  out << kTraceHeader << '\n';
  if (traces.empty()) return;
  const std::size_t steps = traces.front().size();
  const double dt = traces.front().dt;
  for (std::size_t k = 0; k < steps; ++k) {
    const std::string t = detail::fixed(static_cast<double>(k) * dt, 6);
    for (const ltl::Trace& tr : traces) {
      const ltl::VehicleState& s = tr.steps[k];
      out << t << ',' << tr.vehicle_id << ',' << detail::fixed(s.position, 6) << ',' << detail::fixed(s.velocity, 6)
          << ',' << (s.ber_active ? 1 : 0) << ',' << (s.collided ? 1 : 0) << ',' << (s.responsible ? 1 : 0) << ','
          << tr.lane << ',' << tr.info_source << '\n';
    }
  }
}

/// Reads traces back, grouped by vehicle_id in order of first appearance.
/// dt is inferred from consecutive timestamps and must be uniform.
inline std::vector<ltl::Trace> read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing CSV header", 1, 1);
  ++line_no;
  const auto header = detail::split_csv_line(line);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  for (const char* required : {"t", "vehicle_id", "position_m", "velocity_mps", "ber", "collided", "responsible"}) {
    if (!column.count(required)) throw ParseError(std::string("missing column '") + required + "'", 1, 1);
  }

  std::vector<ltl::Trace> traces;
  std::map<std::string, std::size_t> index_of;
  std::map<std::string, std::vector<double>> times;

  auto number = [&](const std::vector<std::string>& cells, const char* name) {
    const std::size_t col = column.at(name);
    if (col >= cells.size()) throw ParseError(std::string("missing value for '") + name + "'", line_no, col + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(cells[col], &used);
      if (used != cells[col].size() || !std::isfinite(v)) throw std::invalid_argument(cells[col]);
      return v;
    } catch (const std::exception&) {
      throw ParseError(std::string("invalid number for '") + name + "': '" + cells[col] + "'", line_no, col + 1);
    }
  };
  auto flag = [&](const std::vector<std::string>& cells, const char* name) {
    const std::size_t col = column.at(name);
    if (col >= cells.size()) throw ParseError(std::string("missing value for '") + name + "'", line_no, col + 1);
    const std::string& c = cells[col];
    if (c == "1" || c == "true") return true;
    if (c == "0" || c == "false") return false;
    throw ParseError(std::string("invalid flag for '") + name + "': '" + c + "'", line_no, col + 1);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    const std::size_t id_col = column.at("vehicle_id");
    if (id_col >= cells.size() || cells[id_col].empty()) throw ParseError("missing vehicle_id", line_no, id_col + 1);
    const std::string& id = cells[id_col];
    auto [it, inserted] = index_of.emplace(id, traces.size());
    if (inserted) {
      ltl::Trace t;
      t.vehicle_id = id;
      if (column.count("lane") && column["lane"] < cells.size() && !cells[column["lane"]].empty()) {
        t.lane = static_cast<int>(number(cells, "lane"));
      }
      if (column.count("info_source") && column["info_source"] < cells.size()) {
        t.info_source = cells[column["info_source"]];
      }
      traces.push_back(std::move(t));
    }
    ltl::VehicleState s;
    s.position = number(cells, "position_m");
    s.velocity = number(cells, "velocity_mps");
    s.ber_active = flag(cells, "ber");
    s.collided = flag(cells, "collided");
    s.responsible = flag(cells, "responsible");
    traces[it->second].steps.push_back(s);
    times[id].push_back(number(cells, "t"));
  }

  for (ltl::Trace& tr : traces) {
    const auto& ts = times[tr.vehicle_id];
    if (ts.size() < 2) {
      tr.dt = 1.0;
    } else {
      tr.dt = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
      if (!(tr.dt > 0.0)) throw InvalidInput("trace '" + tr.vehicle_id + "' has non-increasing timestamps");
      for (std::size_t k = 1; k < ts.size(); ++k) {
        // Timestamps carry 6 decimals.
        if (std::abs(ts[k] - ts[0] - static_cast<double>(k) * tr.dt) > 2e-6) {
          throw InvalidInput("trace '" + tr.vehicle_id + "' does not have a uniform time step");
        }
      }
    }
    tr.validate();
  }
  return traces;
}

}  // namespace sdc::io

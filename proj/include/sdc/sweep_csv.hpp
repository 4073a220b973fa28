#pragma once

// Sweep rows as CSV:
//   e_tau,e_brake,e_V,eta_s,D_pbv_m,D_cbv_m,SDC_pbv,SDC_cbv,e_L,speed_mps,eta_label

#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sdc/capacity.hpp"
#include "sdc/error.hpp"
#include "sdc/trace_io.hpp"
#include "sdc/units.hpp"

namespace sdc::io {

inline constexpr const char* kSweepHeader =
    "e_tau,e_brake,e_V,eta_s,D_pbv_m,D_cbv_m,SDC_pbv,SDC_cbv,e_L,speed_mps,eta_label";

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << kSweepHeader << '\n';
  for (const SweepRow& r : rows) {
    const SweepPoint& p = r.point;
    out << detail::fixed(p.e_tau, 6) << ',' << detail::fixed(p.e_brake, 6) << ',' << detail::fixed(p.e_V, 6) << ','
        << detail::fixed(p.eta.seconds, 6) << ',' << detail::fixed(r.d_pbv, 6) << ',' << detail::fixed(r.d_cbv, 6)
        << ',' << r.sdc_pbv << ',' << r.sdc_cbv << ',' << detail::fixed(p.e_L, 6) << ','
        << detail::fixed(units::kmh_to_mps(p.speed_kmh), 6) << ',' << p.eta.label << '\n';
  }
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing CSV header", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepHeader) throw ParseError("unexpected sweep CSV header", 1, 1);
  std::vector<SweepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 11) throw ParseError("expected 11 columns", line_no, 1);
    try {
      SweepRow r;
      r.point.e_tau = std::stod(cells[0]);
      r.point.e_brake = std::stod(cells[1]);
      r.point.e_V = std::stod(cells[2]);
      r.point.eta.seconds = std::stod(cells[3]);
      r.d_pbv = std::stod(cells[4]);
      r.d_cbv = std::stod(cells[5]);
      r.sdc_pbv = std::stoll(cells[6]);
      r.sdc_cbv = std::stoll(cells[7]);
      r.point.e_L = std::stod(cells[8]);
      r.point.speed_kmh = units::mps_to_kmh(std::stod(cells[9]));
      r.point.eta.label = cells[10];
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw ParseError("invalid number", line_no, 1);
    }
  }
  return rows;
}

}  // namespace sdc::io

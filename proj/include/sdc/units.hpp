#pragma once

namespace sdc::units {

inline constexpr double kKmhPerMps = 3.6;

constexpr double kmh_to_mps(double kmh) { return kmh / kKmhPerMps; }
constexpr double mps_to_kmh(double mps) { return mps * kKmhPerMps; }
constexpr double km_to_m(double km) { return km * 1000.0; }

}  // namespace sdc::units

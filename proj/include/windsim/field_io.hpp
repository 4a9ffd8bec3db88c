#pragma once
// Binary grid dumps for wind-field state and other nodal scalars.
//
// Layout (little-endian):
//   magic "DWGF" | version u32 | dims 3x u32 | channel_count u32 |
//   channel names (u32 byte length + utf-8 bytes, repeated) |
//   per channel: node-major f64 values (x-major order, z fastest; see grid.hpp).

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "windsim/grid.hpp"
#include "windsim/lbm.hpp"

namespace windsim {

constexpr std::uint32_t kGridDumpVersion = 1;

struct GridDump {
    GridDims dims;
    std::vector<std::pair<std::string, std::vector<double>>> channels;
};

void write_grid_dump(const GridDump& dump, const std::string& path);
GridDump read_grid_dump(const std::string& path);

// Conventional channel set for a wind field:
// rho, ux, uy, uz, Sxx, Syy, Szz, Sxy, Sxz, Syz, solid (0/1).
GridDump dump_wind_field(const LbmField& field);

}  // namespace windsim

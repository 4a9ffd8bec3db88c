#pragma once
// Interior densification: surface point clouds voxelise to a shell, a flood
// fill from the boundary classifies the enclosed region, and interior voxels
// are sampled into particles-to-be. Deterministic given the seed.

#include <cstdint>
#include <string>
#include <vector>

#include "windsim/grid.hpp"
#include "windsim/math.hpp"

namespace windsim {

enum class Voxel : std::uint8_t { Empty, Shell, Interior, Unseen };

struct OccupancyGrid {
    GridDims res;
    Vec3 bounds_min, bounds_max;
    double voxel = 0.0;  // edge length (cubic voxels)
    std::vector<Voxel> cells;

    std::size_t idx(int i, int j, int k) const { return res.idx(i, j, k); }
    Vec3 center(int i, int j, int k) const {
        return bounds_min + voxel * Vec3{i + 0.5, j + 0.5, k + 0.5};
    }
};

// Marks every voxel containing at least one point as Shell. Points use the
// half-open rule floor((p - min)/voxel); points exactly on the max boundary
// are clamped into the last voxel. Throws ValidationError for points outside
// the bounds or non-cubic voxels.
OccupancyGrid shell_voxelize(const std::vector<Vec3>& points, const Vec3& bounds_min,
                             const Vec3& bounds_max, int res_x, int res_y, int res_z);

// 6-connected flood fill from all boundary voxels: reachable Empty stays
// Empty (exterior), everything unreached becomes Interior. Idempotent.
void fill_interior(OccupancyGrid& grid);

// One point per Interior voxel: center plus a uniform jitter of at most
// jitter * voxel per axis (jitter < 0.5 keeps samples strictly inside).
// Deterministic for a given seed.
std::vector<Vec3> sample_interior(const OccupancyGrid& grid, std::uint64_t seed,
                                  double jitter = 0.25);

std::size_t count_cells(const OccupancyGrid& grid, Voxel state);

// Plain xyz point list (one "x y z" row per line) used by the densify command.
std::vector<Vec3> read_points_xyz(const std::string& path);
void write_points_xyz(const std::vector<Vec3>& pts, const std::string& path);

}  // namespace windsim

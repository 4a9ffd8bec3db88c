#include "windsim/volume.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "windsim/errors.hpp"
#include "windsim/rng.hpp"

namespace windsim {

OccupancyGrid shell_voxelize(const std::vector<Vec3>& points, const Vec3& bounds_min,
                             const Vec3& bounds_max, int res_x, int res_y, int res_z) {
    OccupancyGrid g;
    g.res = {res_x, res_y, res_z};
    g.bounds_min = bounds_min;
    g.bounds_max = bounds_max;
    if (res_x < 1 || res_y < 1 || res_z < 1)
        throw ValidationError("shell_voxelize: resolution must be positive");
    const Vec3 ext = bounds_max - bounds_min;
    if (!(ext.x > 0 && ext.y > 0 && ext.z > 0))
        throw ValidationError("shell_voxelize: bounds must have positive extent");
    double vx = ext.x / res_x, vy = ext.y / res_y, vz = ext.z / res_z;
    if (std::abs(vx - vy) > 1e-12 * vx || std::abs(vx - vz) > 1e-12 * vx)
        throw ValidationError("shell_voxelize: voxels must be cubic");
    g.voxel = vx;
    g.cells.assign(g.res.size(), Voxel::Empty);

    const int n[3] = {res_x, res_y, res_z};
    for (const auto& p : points) {
        int c[3];
        for (int d = 0; d < 3; ++d) {
            double t = (p[d] - bounds_min[d]) / g.voxel;
            int i = static_cast<int>(std::floor(t));
            if (i == n[d] && p[d] <= bounds_max[d]) i = n[d] - 1;  // clamp max face
            if (i < 0 || i >= n[d])
                throw ValidationError("shell_voxelize: point outside bounds");
            c[d] = i;
        }
        g.cells[g.idx(c[0], c[1], c[2])] = Voxel::Shell;
    }
    return g;
}

void fill_interior(OccupancyGrid& g) {
    const GridDims& d = g.res;
    std::vector<std::uint8_t> outside(d.size(), 0);
    std::deque<std::array<int, 3>> frontier;
    auto push = [&](int i, int j, int k) {
        std::size_t n = d.idx(i, j, k);
        if (outside[n] || g.cells[n] == Voxel::Shell) return;
        outside[n] = 1;
        frontier.push_back({i, j, k});
    };
    for (int i = 0; i < d.nx; ++i)
        for (int j = 0; j < d.ny; ++j)
            for (int k = 0; k < d.nz; ++k)
                if (i == 0 || i == d.nx - 1 || j == 0 || j == d.ny - 1 || k == 0 ||
                    k == d.nz - 1)
                    push(i, j, k);
    static const int steps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                    {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    while (!frontier.empty()) {
        auto [i, j, k] = frontier.front();
        frontier.pop_front();
        for (const auto& s : steps) {
            int a = i + s[0], b = j + s[1], c = k + s[2];
            if (d.contains(a, b, c)) push(a, b, c);
        }
    }
    for (std::size_t n = 0; n < g.cells.size(); ++n) {
        if (g.cells[n] == Voxel::Shell) continue;
        g.cells[n] = outside[n] ? Voxel::Empty : Voxel::Interior;
    }
}

std::vector<Vec3> sample_interior(const OccupancyGrid& g, std::uint64_t seed, double jitter) {
    if (!(jitter >= 0.0 && jitter < 0.5))
        throw ValidationError("sample_interior: jitter must be in [0, 0.5)");
    std::vector<Vec3> pts;
    SplitMix64 rng(seed);
    for (int i = 0; i < g.res.nx; ++i)
        for (int j = 0; j < g.res.ny; ++j)
            for (int k = 0; k < g.res.nz; ++k) {
                if (g.cells[g.idx(i, j, k)] != Voxel::Interior) continue;
                Vec3 c = g.center(i, j, k);
                Vec3 off{rng.sym(), rng.sym(), rng.sym()};
                pts.push_back(c + (jitter * g.voxel) * off);
            }
    return pts;
}

std::size_t count_cells(const OccupancyGrid& g, Voxel state) {
    std::size_t n = 0;
    for (Voxel v : g.cells) n += (v == state);
    return n;
}

std::vector<Vec3> read_points_xyz(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open point file: " + path);
    std::vector<Vec3> pts;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Vec3 p;
        if (!(ss >> p.x >> p.y >> p.z))
            throw ValidationError("point file: bad row '" + line + "'");
        pts.push_back(p);
    }
    return pts;
}

void write_points_xyz(const std::vector<Vec3>& pts, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write point file: " + path);
    os.precision(17);
    for (const auto& p : pts) os << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

}  // namespace windsim

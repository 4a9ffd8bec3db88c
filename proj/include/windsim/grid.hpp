#pragma once
// Dense cartesian grid indexing shared by the solid solver, the wind solver and
// all binary field formats. Linear node order is x-major: index = (i*ny + j)*nz + k,
// i.e. k (z) varies fastest.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "windsim/math.hpp"

namespace windsim {

struct GridDims {
    int nx = 0, ny = 0, nz = 0;

    std::size_t size() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * ny + j) * nz + k;
    }
    bool contains(int i, int j, int k) const {
        return i >= 0 && i < nx && j >= 0 && j < ny && k >= 0 && k < nz;
    }
    bool operator==(const GridDims& o) const {
        return nx == o.nx && ny == o.ny && nz == o.nz;
    }
};

inline int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

using Vec3Grid = std::vector<Vec3>;  // one Vec3 per node, GridDims::idx order

}  // namespace windsim

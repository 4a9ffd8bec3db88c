#pragma once
// Two-way coupling between the particle solver and the wind solver: particles
// occupy lattice nodes (no-slip obstacles), and the wind field pushes back
// through a quadratic drag closure on the occupied shell.

#include <cstdint>
#include <vector>

#include "windsim/grid.hpp"
#include "windsim/lbm.hpp"
#include "windsim/math.hpp"
#include "windsim/particles.hpp"
#include "windsim/scene.hpp"

namespace windsim {

// Wind slower than this (m/s) produces no drag and no guide direction.
constexpr double kSpeedEpsilon = 1e-8;

using SolidMask = std::vector<std::uint8_t>;

// Node (i,j,k) is occupied iff some particle sits in its cell:
// 0 <= (x_p - node_pos) / dx < 1 on every axis (lower edge inclusive).
SolidMask voxelize(const ParticleSet& ps, const Scene& scene);

// Chebyshev-dilates the mask by one node: the band where drag forces act.
SolidMask dilate(const SolidMask& mask, const GridDims& dims);

// Quadratic drag on the occupied shell: F = 1/2 rho_w c_d A |u|^2 u_hat with
// reference area A = dx^2, evaluated from the SI wind velocity per node.
// Returns N per node; zero off the shell and below kSpeedEpsilon.
Vec3Grid drag_force(const Vec3Grid& wind_si, const SolidMask& mask, const Scene& scene);

// Wind direction prior for the inverse problem. Nodes where the wind speed is
// below kSpeedEpsilon carry no direction (has_dir = 0).
struct GuideField {
    Vec3Grid dir;                     // unit vectors where has_dir
    std::vector<double> speed;        // m/s
    std::vector<std::uint8_t> has_dir;
};

GuideField guide_from_field(const LbmField& field, const Scene& scene);

}  // namespace windsim

#pragma once
// Moving least squares material point method on a dense grid, with a
// compressible neo-hookean solid model. Quadratic B-spline transfers over a
// 3x3x3 stencil; the affine velocity matrix C and the per-particle stress
// impulse are fused into a single scatter.

#include <vector>

#include "windsim/grid.hpp"
#include "windsim/math.hpp"
#include "windsim/particles.hpp"
#include "windsim/scene.hpp"

namespace windsim {

// Nodes lighter than this carry no velocity (avoids dividing by roundoff dust).
// Keep it tiny: a node whose stencil weight drifts across the cutoff flickers
// between live and dead, and the flicker feeds C_p (hence F_p) in proportion
// to the cutoff value.  1e-16 kg keeps that artifact below 1e-12 in F while
// still screening true roundoff dust (~1e-20 of a particle mass).
constexpr double kMassEpsilon = 1e-16;  // kg
// det(F) at or below this is treated as a collapsed element.
constexpr double kDetEpsilon = 1e-8;
// Wall boundary conditions act on this many node layers at each face.
constexpr int kWallBand = 3;

struct MpmGrid {
    GridDims dims;
    std::vector<double> mass;  // kg
    Vec3Grid mom;              // kg m/s
    Vec3Grid vel;              // m/s (valid after grid_velocities)

    void reset(const GridDims& d) {
        dims = d;
        mass.assign(d.size(), 0.0);
        mom.assign(d.size(), Vec3{});
        vel.assign(d.size(), Vec3{});
    }
};

// Quadratic B-spline stencil for one particle: 1D weights and d/dfx per axis.
struct SplineStencil {
    int base[3];
    double fx[3];
    double w[3][3];   // w[axis][offset]
    double dw[3][3];  // dw/dfx
};

// Throws SimulationError if the 3-wide stencil would leave the grid.
SplineStencil make_stencil(const Vec3& x, const Scene& scene);

// First Piola-Kirchhoff stress P = mu (F - F^-T) + lambda ln(det F) F^-T.
// Throws SimulationError when det(F) <= kDetEpsilon.
Mat3 neo_hookean_stress(const Mat3& F, double mu, double lambda);

// Strain energy density psi(F); neo_hookean_stress is d psi / dF (checked by test).
double neo_hookean_energy(const Mat3& F, double mu, double lambda);

// Adjoint of the stress map: given Pbar = dL/dP, returns dL/dF.
Mat3 neo_hookean_stress_pullback(const Mat3& F, double mu, double lambda, const Mat3& Pbar);

// Scatter mass, momentum and the fused stress impulse to the grid.
// dt enters through the stress impulse G_p = -dt (4/dx^2) V0 P F^T.
void p2g(const ParticleSet& ps, const Scene& scene, double dt, MpmGrid& grid);

// Momentum -> velocity with external nodal force (N per node, optional) and
// gravity. Leaves wall boundary conditions to apply_wall_bc.
void grid_velocities(MpmGrid& grid, const Vec3Grid* f_ext, const Scene& scene, double dt);

// Sticky zeroes the node velocity, slip zeroes the face-normal component,
// open leaves the band untouched.
void apply_wall_bc(MpmGrid& grid, const Scene& scene);

// Gather velocities and affine matrices back, then advect positions.
void g2p(ParticleSet& ps, const MpmGrid& grid, const Scene& scene, double dt);

// F <- (I + dt C) F. Throws SimulationError if any det(F) turns non-positive.
void update_deformation(ParticleSet& ps, double dt);

// One full substep: p2g, grid update + walls, g2p, deformation update.
void mpm_step(ParticleSet& ps, MpmGrid& grid, const Vec3Grid* f_ext, const Scene& scene,
              double dt);

}  // namespace windsim

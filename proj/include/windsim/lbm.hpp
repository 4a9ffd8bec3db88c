#pragma once
// Lattice Boltzmann wind solver on D3Q27.
//
// The primary stepper stores macroscopic moments only (rho, u, and the shifted
// second moment S with rho S_ab = sum_i (c_ia c_ib - cs2 delta_ab) f_i, so S = 0
// at rest). Each step reconstructs post-collision distributions from the
// moments via a Hermite expansion through third order, gather-streams them with
// boundary handling, and maps the streamed raw moments back through the
// single-relaxation-time update in moment space. A classical population-based
// BGK stepper with Guo forcing doubles as a reference implementation.
//
// All quantities in this module are in lattice units (dx = dt = 1, reference
// density rho0); the scene provides the SI conversions.

#include <cstdint>
#include <vector>

#include "windsim/grid.hpp"
#include "windsim/math.hpp"
#include "windsim/scene.hpp"

namespace windsim {

namespace d3q27 {
constexpr int Q = 27;
constexpr double cs2 = 1.0 / 3.0;
constexpr double cs4 = cs2 * cs2;
constexpr double cs6 = cs2 * cs2 * cs2;

// Direction i has (cx,cy,cz) = (i/9 - 1, (i/9)%3... ) via i = (cx+1)*9 + (cy+1)*3 + (cz+1).
constexpr int cx(int i) { return i / 9 - 1; }
constexpr int cy(int i) { return (i / 3) % 3 - 1; }
constexpr int cz(int i) { return i % 3 - 1; }
constexpr int opposite(int i) { return Q - 1 - i; }

constexpr double weight(int i) {
    int m = cx(i) * cx(i) + cy(i) * cy(i) + cz(i) * cz(i);
    return m == 0 ? 8.0 / 27.0 : (m == 1 ? 2.0 / 27.0 : (m == 2 ? 1.0 / 54.0 : 1.0 / 216.0));
}
}  // namespace d3q27

struct LbmField {
    GridDims dims;
    double rho0 = 1.0;
    std::vector<double> rho;        // lattice density
    Vec3Grid u;                     // lattice velocity
    std::vector<Sym3> S;            // shifted second moment (0 at rest)
    std::vector<std::uint8_t> solid;

    // Transient distribution buffer (Q per node) reused across steps.
    std::vector<double> f;
    // Persistent populations for the reference BGK stepper only.
    std::vector<double> f_bgk;

    // Scratch raw-moment arrays reused by lbm_step.
    std::vector<double> rho_s;
    Vec3Grid u_s;
    std::vector<Sym3> S_s;
};

// Face boundary setup in lattice units, derived from the scene.
struct LbmBc {
    FaceBc face[6];
    Vec3 u_inlet;   // lattice units
    double rho0 = 1.0;
};
LbmBc make_lbm_bc(const Scene& scene);

// Allocates the field at rest (rho = rho0, u = 0, S = 0, no solids).
void init_field(LbmField& field, const GridDims& dims, double rho0 = 1.0);

// Uniform equilibrium state: S is set to u0 (x) u0. Throws ValidationError when
// |u0| is outside the low-Mach validity range (>= 0.3 lattice units).
void init_equilibrium(LbmField& field, double rho0, const Vec3& u0);

// Post-collision distribution of one node from its moments (Hermite expansion
// through third order; the third-order coefficients are built recursively from
// S and u). Writes Q values into f_out.
void reconstruct_node(double rho, const Vec3& u, const Sym3& S, double* f_out);

// Fills field.f for every node (solid nodes get resting equilibrium; their
// populations are never gathered).
void reconstruct_distributions(LbmField& field);

// Pure gather streaming of a full distribution buffer with boundary handling:
// periodic wrap, halfway bounce-back at walls and solid nodes, velocity
// bounce-back at inlets, zero-gradient copy at outlets.
void stream(const std::vector<double>& f_in, const std::vector<std::uint8_t>& solid,
            const GridDims& dims, const LbmBc& bc, std::vector<double>& f_out);

// Single-relaxation-time update in moment space. Raw post-streaming moments
// (rho*, u* = first moment / rho*, S* shifted) map to the new state; the force
// enters the velocity as +F/(2 rho*) and the second moment through the
// tau-weighted source terms. force may be null (no forcing). Solid nodes are
// reset to rest. Throws SimulationError on non-finite or non-positive density.
void moment_update(LbmField& field, const std::vector<double>& rho_star, const Vec3Grid& u_star,
                   const std::vector<Sym3>& S_star, const Vec3Grid* force, double tau);

// One full step of the moment-based stepper: reconstruct -> stream -> raw
// moments -> moment_update. force is in lattice units (momentum density per
// step), solid_mask (optional) replaces field.solid before the step.
void lbm_step(LbmField& field, const Vec3Grid* force, const std::vector<std::uint8_t>* solid_mask,
              const Scene& scene);

// Reference stepper: classical BGK collision with Guo forcing on persistent
// populations (field.f_bgk, created from the current macroscopic state on
// first use), streamed with the same boundary handling. Refreshes rho/u/S.
void bgk_step(LbmField& field, const Vec3Grid* force, const std::vector<std::uint8_t>* solid_mask,
              const Scene& scene);

// Diagnostics (fluid nodes only; compensated sums).
double total_mass(const LbmField& field);
double kinetic_energy(const LbmField& field);

// Viscous (deviatoric) stress estimate from the moment state:
// sigma_ab = -rho (1 - 1/(2 tau)) (S_ab - u_a u_b) restricted to its deviator.
Mat3 viscous_stress(const LbmField& field, std::size_t node, double tau);

// Wind velocity converted to m/s for the coupling layer.
Vec3Grid wind_velocity_si(const LbmField& field, const Scene& scene);

}  // namespace windsim

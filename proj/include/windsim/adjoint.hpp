#pragma once
// Reverse-mode differentiation of a window of solid substeps with respect to
// the nodal force field. The forward pass checkpoints every substep (particle
// state plus grid mass and pre-boundary velocities); the backward pass walks
// the substeps in reverse, applying the hand-derived adjoint of each transfer.
// The force field is held constant across the window, so per-substep force
// gradients accumulate into one grid.

#include <functional>
#include <vector>

#include "windsim/grid.hpp"
#include "windsim/math.hpp"
#include "windsim/mpm.hpp"
#include "windsim/particles.hpp"
#include "windsim/scene.hpp"

namespace windsim {

struct TapeGrid {
    std::vector<double> mass;
    Vec3Grid v_pre;  // nodal velocities before wall boundary conditions
};

struct Tape {
    const Scene* scene = nullptr;
    double dt = 0.0;                  // substep length
    std::vector<ParticleSet> states;  // substeps+1 entries; front = start, back = end
    std::vector<TapeGrid> grids;      // one per substep
};

// Runs `substeps` solid substeps under the constant nodal force (N per node,
// null = none), recording everything the backward pass needs.
Tape forward_record(const ParticleSet& start, const Vec3Grid* force, const Scene& scene,
                    int substeps);

inline const ParticleSet& final_state(const Tape& tape) { return tape.states.back(); }

// Pulls dL/d(final positions) and dL/d(final velocities) back through the
// recorded window; returns dL/d(nodal force). Nodes that carried no mass in
// any substep get an exactly zero gradient.
Vec3Grid backward(const Tape& tape, const std::vector<Vec3>& dL_dx,
                  const std::vector<Vec3>& dL_dv);

// Central-difference reference gradient of an arbitrary end-of-window loss.
// Guarded against accidental use on big grids (> 16^3 nodes): quadratic cost.
using WindowLoss = std::function<double(const ParticleSet&)>;
Vec3Grid finite_difference_grad(const ParticleSet& start, const Vec3Grid& force,
                                const Scene& scene, int substeps, const WindowLoss& loss,
                                double h);

// Single-component probe of the same central difference (used by sampled
// gradient checks to keep the cost linear in the number of probes).
double finite_difference_component(const ParticleSet& start, const Vec3Grid& force,
                                   const Scene& scene, int substeps, const WindowLoss& loss,
                                   std::size_t node, int axis, double h);

}  // namespace windsim

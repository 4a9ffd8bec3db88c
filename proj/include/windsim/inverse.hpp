#pragma once
// Per-timestep recovery of an unknown nodal wind-force field from observed
// marker motion. Each frame solves
//     min_F  L_obs(F) + lambda_phys * L_phys(F)
// where L_obs is the mean squared marker position error at the end of the
// frame's substep window (gradient via the adjoint pass) and L_phys penalises
// the force component perpendicular to the wind direction prior.

#include <cstdint>
#include <string>
#include <vector>

#include "windsim/adjoint.hpp"
#include "windsim/coupling.hpp"
#include "windsim/grid.hpp"
#include "windsim/lbm.hpp"
#include "windsim/math.hpp"
#include "windsim/particles.hpp"
#include "windsim/scene.hpp"

namespace windsim {

// Marker trajectories: frames[t][m] is the position of marker m (particle
// index marker_ids[m]) at the end of frame t.
struct ObservationSequence {
    std::vector<int> marker_ids;
    std::vector<std::vector<Vec3>> frames;
};

void write_observations(const ObservationSequence& obs, const std::string& path);  // CSV
ObservationSequence read_observations(const std::string& path);

// Marker rows extracted from a particle state (appends one frame).
std::vector<int> marker_indices(const ParticleSet& ps);
std::vector<Vec3> marker_positions(const ParticleSet& ps, const std::vector<int>& ids);

// Per-frame nodal force field (N per node), and its binary container:
//   magic "DWFF" | version u32 | timesteps u32 | dims 3x u32 |
//   per timestep, node-major: fx f64, fy f64, fz f64.
struct ForceField {
    GridDims dims;
    std::vector<Vec3Grid> steps;
};

constexpr std::uint32_t kForceFieldVersion = 1;
void write_force_field(const ForceField& ff, const std::string& path);
ForceField read_force_field(const std::string& path);

// Mean squared marker position error against the target marker positions.
double observation_loss(const ParticleSet& ps, const std::vector<int>& marker_ids,
                        const std::vector<Vec3>& target);
// dL/dx for every particle (zero for non-markers).
std::vector<Vec3> observation_loss_grad(const ParticleSet& ps, const std::vector<int>& marker_ids,
                                        const std::vector<Vec3>& target);

// Sum over guided nodes of |F - (F.d) d|^2 (squared perpendicular component,
// raw newtons). Nodes without a guide direction contribute nothing.
double physics_loss(const Vec3Grid& force, const GuideField& guide);
// Accumulates scale * dL_phys/dF (= scale * 2 (I - d d^T) F) into grad.
void physics_loss_grad(const Vec3Grid& force, const GuideField& guide, double scale,
                       Vec3Grid& grad);

struct ReconOpts {
    int max_iters = 200;
    double rel_tol = 1e-8;       // relative per-iteration improvement cutoff
    double lambda_phys = 0.1;
    enum class Optimizer { GradientDescent, Adam } optimizer = Optimizer::GradientDescent;
    double adam_lr = 1e-3;       // newtons per step, Adam only
    double loss_floor = 1e-18;   // absolute early-out
};

struct IterStat {
    int iter;
    double loss_obs, loss_phys, loss_total;
    double step;  // accepted step length (GD) or lr (Adam)
};

struct StepResult {
    Vec3Grid force;          // recovered nodal force for this frame
    ParticleSet end_state;   // state advanced under the recovered force
    std::vector<IterStat> trace;
    double loss_obs = 0.0, loss_phys = 0.0;
    double marker_rmse = 0.0;
    int iters = 0;
};

// Recovers the force for one frame window starting from `state` (zero
// initialisation). Gradient descent uses a Barzilai-Borwein trial step with a
// halving backtracking line search; accepted losses are monotone
// non-increasing. Throws OptimizationError if no descent step exists at all.
StepResult reconstruct_step(const ParticleSet& state, const std::vector<Vec3>& target,
                            const std::vector<int>& marker_ids, const GuideField& guide,
                            const Scene& scene, const ReconOpts& opts);

struct FrameReport {
    int frame = 0;
    int iters = 0;
    double loss_obs = 0.0, loss_phys = 0.0, marker_rmse = 0.0;
};

struct ReconResult {
    ForceField force;
    std::vector<FrameReport> frames;
    ParticleSet end_state;
};

// Sequential recovery over all observed frames. The wind field starts at rest,
// is advanced by `substeps` lattice steps per frame with the object voxelised
// at the frame start, and supplies the direction prior for that frame.
ReconResult reconstruct_sequence(const ParticleSet& start, const ObservationSequence& obs,
                                 const Scene& scene, const ReconOpts& opts);

// Pure forward replay of a stored force field on (possibly different)
// particles. Returns the state after each frame.
std::vector<ParticleSet> retarget(const ForceField& ff, const ParticleSet& start,
                                  const Scene& scene);

// Direction-based field comparison on the support where both fields are
// non-negligible (|F| > 1e-12 N). Both fields are unit-normalised per node:
// cos_sim in [-1, 1], nmse in [0, 4]. Throws ValidationError on empty support.
struct EvalResult {
    double cos_sim = 0.0;
    double nmse = 0.0;
    std::size_t support = 0;
};
EvalResult eval_metrics(const ForceField& ground_truth, const ForceField& recovered);

}  // namespace windsim

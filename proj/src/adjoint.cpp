#include "windsim/adjoint.hpp"

#include <cmath>

#include "windsim/errors.hpp"

namespace windsim {

Tape forward_record(const ParticleSet& start, const Vec3Grid* force, const Scene& scene,
                    int substeps) {
    Tape tape;
    tape.scene = &scene;
    tape.dt = scene.dt_sub();
    tape.states.reserve(substeps + 1);
    tape.grids.reserve(substeps);
    tape.states.push_back(start);

    MpmGrid grid;
    ParticleSet ps = start;
    for (int s = 0; s < substeps; ++s) {
        p2g(ps, scene, tape.dt, grid);
        grid_velocities(grid, force, scene, tape.dt);
        tape.grids.push_back({grid.mass, grid.vel});  // pre-boundary velocities
        apply_wall_bc(grid, scene);
        g2p(ps, grid, scene, tape.dt);
        update_deformation(ps, tape.dt);
        tape.states.push_back(ps);
    }
    return tape;
}

Vec3Grid backward(const Tape& tape, const std::vector<Vec3>& dL_dx,
                  const std::vector<Vec3>& dL_dv) {
    const Scene& scene = *tape.scene;
    const double dt = tape.dt;
    const double kappa = 4.0 / (scene.dx * scene.dx);
    const std::size_t np = tape.states.front().size();
    const std::size_t nn = scene.grid.size();
    if (dL_dx.size() != np || dL_dv.size() != np)
        throw ValidationError("backward: adjoint seed size does not match particle count");

    std::vector<Vec3> xbar = dL_dx, vbar = dL_dv;
    std::vector<Mat3> Cbar(np), Fbar(np);
    Vec3Grid fbar(nn, Vec3{});

    std::vector<Vec3> vbar_grid(nn);
    Vec3Grid mombar(nn);
    std::vector<double> mbar(nn);

    for (int s = static_cast<int>(tape.grids.size()) - 1; s >= 0; --s) {
        const ParticleSet& before = tape.states[s];
        const ParticleSet& after = tape.states[s + 1];
        const TapeGrid& tg = tape.grids[s];

        // Rebuild post-boundary nodal velocities from the recorded pre-boundary
        // ones (the boundary projector is cheap and deterministic).
        MpmGrid grid;
        grid.dims = scene.grid;
        grid.mass = tg.mass;
        grid.vel = tg.v_pre;
        apply_wall_bc(grid, scene);

        // --- reverse F <- (I + dt C') F ---------------------------------
        for (std::size_t p = 0; p < np; ++p) {
            const Mat3& F0 = before[p].F;
            const Mat3& Cp = after[p].C;
            Mat3 Fb = Fbar[p];
            Cbar[p] += dt * (Fb * transpose(F0));
            Fbar[p] = transpose(Mat3::identity() + dt * Cp) * Fb;
        }

        // --- reverse x' = x + dt v' --------------------------------------
        for (std::size_t p = 0; p < np; ++p) vbar[p] += dt * xbar[p];

        // --- reverse g2p --------------------------------------------------
        std::fill(vbar_grid.begin(), vbar_grid.end(), Vec3{});
        for (std::size_t p = 0; p < np; ++p) {
            SplineStencil st = make_stencil(before[p].x, scene);
            const Vec3 vb = vbar[p];
            const Mat3 Cb = Cbar[p];
            Vec3 xb{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k) {
                        const double w = st.w[0][i] * st.w[1][j] * st.w[2][k];
                        const Vec3 gw{
                            st.dw[0][i] * st.w[1][j] * st.w[2][k] / scene.dx,
                            st.w[0][i] * st.dw[1][j] * st.w[2][k] / scene.dx,
                            st.w[0][i] * st.w[1][j] * st.dw[2][k] / scene.dx};
                        const Vec3 r{(i - st.fx[0]) * scene.dx, (j - st.fx[1]) * scene.dx,
                                     (k - st.fx[2]) * scene.dx};
                        const std::size_t n =
                            scene.grid.idx(st.base[0] + i, st.base[1] + j, st.base[2] + k);
                        const Vec3 vn = grid.vel[n];
                        const Vec3 Cbr = Cb * r;
                        vbar_grid[n] += w * vb + (kappa * w) * Cbr;
                        // d/dx_p through the weights and through r = x_i - x_p
                        xb += (dot(vb, vn) + kappa * dot(vn, Cbr)) * gw;
                        xb -= (kappa * w) * (transpose(Cb) * vn);
                    }
            xbar[p] += xb;
        }

        // --- reverse wall boundary + momentum/force/mass ------------------
        // The projector B is symmetric, so vbar_pre = B vbar_post.
        {
            MpmGrid gtmp;
            gtmp.dims = scene.grid;
            gtmp.mass = tg.mass;  // unused by the BC, sized for reuse
            gtmp.vel = vbar_grid;
            apply_wall_bc(gtmp, scene);
            vbar_grid.swap(gtmp.vel);
        }
        for (std::size_t n = 0; n < nn; ++n) {
            if (tg.mass[n] > kMassEpsilon) {
                const double im = 1.0 / tg.mass[n];
                mombar[n] = im * vbar_grid[n];
                fbar[n] += (dt * im) * vbar_grid[n];
                // v_pre = (mom + dt f)/m + dt g  =>  d v_pre/dm = -(v_pre - dt g)/m
                mbar[n] = -dot(vbar_grid[n], tg.v_pre[n] - dt * scene.gravity) * im;
            } else {
                mombar[n] = Vec3{};
                mbar[n] = 0.0;
            }
        }

        // --- reverse p2g ---------------------------------------------------
        for (std::size_t p = 0; p < np; ++p) {
            const Particle& pp = before[p];
            SplineStencil st = make_stencil(pp.x, scene);
            const Material& mat = scene.material(pp.material_id);
            const Mat3 P = neo_hookean_stress(pp.F, mat.mu, mat.lambda);
            const double gscale = -dt * kappa * pp.volume0;
            const Mat3 G = gscale * (P * transpose(pp.F));
            const Mat3 A = pp.mass * pp.C + G;

            Vec3 vb{}, xb{};
            Mat3 Cb{}, Gb{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k) {
                        const double w = st.w[0][i] * st.w[1][j] * st.w[2][k];
                        const Vec3 gw{
                            st.dw[0][i] * st.w[1][j] * st.w[2][k] / scene.dx,
                            st.w[0][i] * st.dw[1][j] * st.w[2][k] / scene.dx,
                            st.w[0][i] * st.w[1][j] * st.dw[2][k] / scene.dx};
                        const Vec3 r{(i - st.fx[0]) * scene.dx, (j - st.fx[1]) * scene.dx,
                                     (k - st.fx[2]) * scene.dx};
                        const std::size_t n =
                            scene.grid.idx(st.base[0] + i, st.base[1] + j, st.base[2] + k);
                        const Vec3 mb = mombar[n];
                        vb += (w * pp.mass) * mb;
                        Cb += (w * pp.mass) * outer(mb, r);
                        Gb += w * outer(mb, r);
                        xb += (pp.mass * mbar[n] + dot(mb, pp.mass * pp.v + A * r)) * gw;
                        xb -= w * (transpose(A) * mb);
                    }
            // v and C of the pre-substep state enter only through p2g, so
            // their adjoints are replaced here, not accumulated.
            vbar[p] = vb;
            Cbar[p] = Cb;
            xbar[p] += xb;
            // G = gscale * P(F) F^T: pull Gb back to F through both factors.
            const Mat3 Tb = gscale * Gb;
            Fbar[p] += transpose(Tb) * P;
            Fbar[p] += neo_hookean_stress_pullback(pp.F, mat.mu, mat.lambda, Tb * pp.F);
        }
    }
    return fbar;
}

static double run_loss(const ParticleSet& start, const Vec3Grid& force, const Scene& scene,
                       int substeps, const WindowLoss& loss) {
    ParticleSet ps = start;
    MpmGrid grid;
    for (int s = 0; s < substeps; ++s) mpm_step(ps, grid, &force, scene, scene.dt_sub());
    return loss(ps);
}

double finite_difference_component(const ParticleSet& start, const Vec3Grid& force,
                                   const Scene& scene, int substeps, const WindowLoss& loss,
                                   std::size_t node, int axis, double h) {
    Vec3Grid f = force;
    f[node][axis] = force[node][axis] + h;
    const double lp = run_loss(start, f, scene, substeps, loss);
    f[node][axis] = force[node][axis] - h;
    const double lm = run_loss(start, f, scene, substeps, loss);
    return (lp - lm) / (2.0 * h);
}

Vec3Grid finite_difference_grad(const ParticleSet& start, const Vec3Grid& force,
                                const Scene& scene, int substeps, const WindowLoss& loss,
                                double h) {
    if (scene.grid.size() > 16 * 16 * 16)
        throw ValidationError(
            "finite_difference_grad is quadratic in grid size; refusing grids over 16^3");
    Vec3Grid grad(scene.grid.size(), Vec3{});
    for (std::size_t n = 0; n < grad.size(); ++n)
        for (int a = 0; a < 3; ++a)
            grad[n][a] = finite_difference_component(start, force, scene, substeps, loss, n, a, h);
    return grad;
}

}  // namespace windsim

#include "windsim/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "windsim/adjoint.hpp"
#include "windsim/coupling.hpp"
#include "windsim/errors.hpp"
#include "windsim/rng.hpp"

namespace windsim {

namespace {

Scene random_scene(SplitMix64& rng, int substeps) {
    Scene s;
    s.domain_min = {0, 0, 0};
    s.domain_max = {1, 1, 1};
    s.grid = {8, 8, 8};
    s.substeps = substeps;
    s.frame_dt = 1e-3 * substeps;  // dt_sub = 1 ms
    s.gravity = {0, rng.range(-2.0, 0.0), 0};
    // Open walls: on an 8-node grid the sticky band would clamp most of the
    // domain and zero the force response at the very nodes being probed.
    s.walls = {WallTag::Open, WallTag::Open, WallTag::Open,
               WallTag::Open, WallTag::Open, WallTag::Open};
    Material m;
    m.id = 0;
    m.name = "probe";
    m.youngs_modulus = rng.range(2e4, 2e5);
    m.poisson_ratio = rng.range(0.30, 0.42);
    m.density = rng.range(100.0, 400.0);
    s.materials = {m};
    validate_scene(s);
    return s;
}

ParticleSet random_cloud(SplitMix64& rng, const Scene& scene, int n) {
    ParticleSet ps;
    const double half = scene.dx * 0.5;
    for (int i = 0; i < n; ++i) {
        Particle p;
        p.x = {rng.range(0.35, 0.65), rng.range(0.35, 0.65), rng.range(0.35, 0.65)};
        p.v = {rng.sym() * 0.2, rng.sym() * 0.2, rng.sym() * 0.2};
        p.volume0 = half * half * half;
        p.mass = scene.materials[0].density * p.volume0;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                p.F[r][c] += 0.03 * rng.sym();
                p.C[r][c] = 2.0 * rng.sym();
            }
        p.is_marker = true;
        ps.push_back(p);
    }
    return ps;
}

}  // namespace

GradCheckResult run_gradient_check(const GradCheckOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    GradCheckResult res;
    SplitMix64 rng(opts.seed);

    for (int sc = 0; sc < opts.scenes; ++sc) {
        Scene scene = random_scene(rng, 1 + static_cast<int>(rng.next() % 3));
        ParticleSet ps = random_cloud(rng, scene, rng.irange(24, 48));

        const std::size_t nn = scene.grid.size();
        Vec3Grid force(nn);
        for (auto& f : force) f = {0.02 * rng.sym(), 0.02 * rng.sym(), 0.02 * rng.sym()};

        // Quadratic end-of-window loss against random targets (positions and
        // velocities both contribute, so every adjoint seed path is exercised).
        std::vector<Vec3> xt(ps.size()), vt(ps.size());
        for (std::size_t p = 0; p < ps.size(); ++p) {
            xt[p] = ps[p].x + Vec3{0.02 * rng.sym(), 0.02 * rng.sym(), 0.02 * rng.sym()};
            vt[p] = ps[p].v + Vec3{0.2 * rng.sym(), 0.2 * rng.sym(), 0.2 * rng.sym()};
        }
        auto loss = [&](const ParticleSet& end) {
            double s = 0.0;
            for (std::size_t p = 0; p < end.size(); ++p)
                s += norm2(end[p].x - xt[p]) + 0.1 * norm2(end[p].v - vt[p]);
            return s / static_cast<double>(end.size());
        };

        // Adjoint gradient.
        Tape tape = forward_record(ps, &force, scene, scene.substeps);
        const ParticleSet& end = final_state(tape);
        std::vector<Vec3> dL_dx(ps.size()), dL_dv(ps.size());
        const double sc2 = 2.0 / static_cast<double>(ps.size());
        for (std::size_t p = 0; p < ps.size(); ++p) {
            dL_dx[p] = sc2 * (end[p].x - xt[p]);
            dL_dv[p] = (0.1 * sc2) * (end[p].v - vt[p]);
        }
        Vec3Grid adj = backward(tape, dL_dx, dL_dv);

        // Loaded candidates: nodes within two cells of any particle cell (the
        // window is short, particles cannot reach further than that).
        SolidMask occ = voxelize(ps, scene);
        SolidMask near = dilate(dilate(occ, scene.grid), scene.grid);
        std::vector<std::size_t> loaded, empty;
        for (std::size_t n = 0; n < nn; ++n) (near[n] ? loaded : empty).push_back(n);

        double g_max = 0.0;
        for (const auto& g : adj)
            g_max = std::max({g_max, std::abs(g.x), std::abs(g.y), std::abs(g.z)});

        double scene_max = 0.0;
        const int n_empty_probe = 2;
        for (int pr = 0; pr < opts.probes_per_scene; ++pr) {
            std::size_t node = loaded[rng.next() % loaded.size()];
            int axis = static_cast<int>(rng.next() % 3);
            double h = opts.h_scale * std::max(1.0, std::abs(force[node][axis]));
            double fd = finite_difference_component(ps, force, scene, scene.substeps, loss,
                                                    node, axis, h);
            double a = adj[node][axis];
            // Mixed metric: components far below the scene's gradient scale are
            // measured against 1e-6 * that scale so FD roundoff cannot dominate.
            double denom = std::max({std::abs(fd), std::abs(a), 1e-6 * g_max, 1e-300});
            scene_max = std::max(scene_max, std::abs(a - fd) / denom);
        }
        // Empty nodes: adjoint must be exactly zero; FD agrees exactly because
        // perturbing an unloaded node cannot change the trajectory.
        for (int pr = 0; pr < n_empty_probe && !empty.empty(); ++pr) {
            std::size_t node = empty[rng.next() % empty.size()];
            int axis = static_cast<int>(rng.next() % 3);
            double h = opts.h_scale * std::max(1.0, std::abs(force[node][axis]));
            double fd = finite_difference_component(ps, force, scene, scene.substeps, loss,
                                                    node, axis, h);
            res.max_empty_err = std::max(res.max_empty_err, std::abs(adj[node][axis]));
            res.max_empty_err = std::max(res.max_empty_err, std::abs(fd));
        }
        for (std::size_t n = 0; n < nn; ++n)
            if (!near[n])
                res.max_empty_err =
                    std::max({res.max_empty_err, std::abs(adj[n].x), std::abs(adj[n].y),
                              std::abs(adj[n].z)});

        res.per_scene.push_back(scene_max);
        res.max_rel_err = std::max(res.max_rel_err, scene_max);
        res.probes += opts.probes_per_scene + n_empty_probe;
    }
    res.scenes = opts.scenes;
    res.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.pass = res.max_rel_err < opts.tol && res.max_empty_err == 0.0;
    return res;
}

}  // namespace windsim

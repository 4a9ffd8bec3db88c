#include "windsim/mpm.hpp"

#include <cmath>
#include <string>

#include "windsim/errors.hpp"

namespace windsim {

SplineStencil make_stencil(const Vec3& x, const Scene& scene) {
    SplineStencil st;
    for (int d = 0; d < 3; ++d) {
        double p = (x[d] - scene.domain_min[d]) / scene.dx;  // node units
        double b = std::floor(p - 0.5);
        st.base[d] = static_cast<int>(b);
        double fx = p - b;  // in [0.5, 1.5)
        st.fx[d] = fx;
        st.w[d][0] = 0.5 * (1.5 - fx) * (1.5 - fx);
        st.w[d][1] = 0.75 - (fx - 1.0) * (fx - 1.0);
        st.w[d][2] = 0.5 * (fx - 0.5) * (fx - 0.5);
        st.dw[d][0] = fx - 1.5;
        st.dw[d][1] = -2.0 * (fx - 1.0);
        st.dw[d][2] = fx - 0.5;
    }
    const int n[3] = {scene.grid.nx, scene.grid.ny, scene.grid.nz};
    for (int d = 0; d < 3; ++d)
        if (st.base[d] < 0 || st.base[d] + 2 >= n[d])
            throw SimulationError("particle stencil leaves the grid at (" +
                                  std::to_string(x.x) + ", " + std::to_string(x.y) + ", " +
                                  std::to_string(x.z) + ")");
    return st;
}

Mat3 neo_hookean_stress(const Mat3& F, double mu, double lambda) {
    double J = det(F);
    if (!(J > kDetEpsilon))
        throw SimulationError("singular deformation gradient: det(F) = " + std::to_string(J));
    Mat3 Fit = inverse_transpose(F);
    return mu * (F - Fit) + (lambda * std::log(J)) * Fit;
}

double neo_hookean_energy(const Mat3& F, double mu, double lambda) {
    double J = det(F);
    if (!(J > kDetEpsilon))
        throw SimulationError("singular deformation gradient: det(F) = " + std::to_string(J));
    double I1 = ddot(F, F);  // tr(F^T F)
    double lj = std::log(J);
    return 0.5 * mu * (I1 - 3.0) - mu * lj + 0.5 * lambda * lj * lj;
}

Mat3 neo_hookean_stress_pullback(const Mat3& F, double mu, double lambda, const Mat3& Pbar) {
    // dP = mu dF + (mu - lambda ln J) Fit dF^T Fit + lambda <Fit, dF> Fit
    double J = det(F);
    if (!(J > kDetEpsilon))
        throw SimulationError("singular deformation gradient: det(F) = " + std::to_string(J));
    Mat3 Fit = inverse_transpose(F);
    double lj = std::log(J);
    Mat3 Fbar = mu * Pbar;
    Fbar += (mu - lambda * lj) * (Fit * transpose(Pbar) * Fit);
    Fbar += (lambda * ddot(Fit, Pbar)) * Fit;
    return Fbar;
}

void p2g(const ParticleSet& ps, const Scene& scene, double dt, MpmGrid& grid) {
    grid.reset(scene.grid);
    const double kappa = 4.0 / (scene.dx * scene.dx);
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
        const Particle& p = ps[pi];
        SplineStencil st = make_stencil(p.x, scene);
        const Material& mat = scene.material(p.material_id);
        Mat3 P = neo_hookean_stress(p.F, mat.mu, mat.lambda);
        // Fused stress impulse: momentum contribution G r_ip alongside m C r_ip.
        Mat3 G = (-dt * kappa * p.volume0) * (P * transpose(p.F));
        Mat3 affine = p.mass * p.C + G;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) {
                    double w = st.w[0][i] * st.w[1][j] * st.w[2][k];
                    Vec3 r{(i - st.fx[0]) * scene.dx, (j - st.fx[1]) * scene.dx,
                           (k - st.fx[2]) * scene.dx};  // x_node - x_p
                    std::size_t n =
                        grid.dims.idx(st.base[0] + i, st.base[1] + j, st.base[2] + k);
                    grid.mass[n] += w * p.mass;
                    grid.mom[n] += w * (p.mass * p.v + affine * r);
                }
    }
}

void grid_velocities(MpmGrid& grid, const Vec3Grid* f_ext, const Scene& scene, double dt) {
    const std::size_t n = grid.dims.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (grid.mass[i] > kMassEpsilon) {
            Vec3 v = grid.mom[i] / grid.mass[i];
            if (f_ext) v += (dt / grid.mass[i]) * (*f_ext)[i];
            v += dt * scene.gravity;
            grid.vel[i] = v;
        } else {
            grid.vel[i] = Vec3{};
        }
    }
}

void apply_wall_bc(MpmGrid& grid, const Scene& scene) {
    const GridDims& d = grid.dims;
    auto clamp_node = [&](int i, int j, int k, int face) {
        WallTag t = scene.walls[face];
        if (t == WallTag::Open) return;
        Vec3& v = grid.vel[d.idx(i, j, k)];
        if (t == WallTag::Sticky)
            v = Vec3{};
        else
            v[face / 2] = 0.0;  // slip: kill the normal component
    };
    for (int i = 0; i < d.nx; ++i)
        for (int j = 0; j < d.ny; ++j)
            for (int k = 0; k < d.nz; ++k) {
                if (i < kWallBand) clamp_node(i, j, k, 0);
                if (i >= d.nx - kWallBand) clamp_node(i, j, k, 1);
                if (j < kWallBand) clamp_node(i, j, k, 2);
                if (j >= d.ny - kWallBand) clamp_node(i, j, k, 3);
                if (k < kWallBand) clamp_node(i, j, k, 4);
                if (k >= d.nz - kWallBand) clamp_node(i, j, k, 5);
            }
}

void g2p(ParticleSet& ps, const MpmGrid& grid, const Scene& scene, double dt) {
    const double kappa = 4.0 / (scene.dx * scene.dx);
    for (auto& p : ps) {
        SplineStencil st = make_stencil(p.x, scene);
        Vec3 v{};
        Mat3 B;  // sum w v r^T
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) {
                    double w = st.w[0][i] * st.w[1][j] * st.w[2][k];
                    Vec3 r{(i - st.fx[0]) * scene.dx, (j - st.fx[1]) * scene.dx,
                           (k - st.fx[2]) * scene.dx};
                    const Vec3& vn =
                        grid.vel[grid.dims.idx(st.base[0] + i, st.base[1] + j, st.base[2] + k)];
                    v += w * vn;
                    B += w * outer(vn, r);
                }
        p.v = v;
        p.C = kappa * B;
        p.x += dt * v;
    }
}

void update_deformation(ParticleSet& ps, double dt) {
    for (auto& p : ps) {
        p.F = (Mat3::identity() + dt * p.C) * p.F;
        if (!(det(p.F) > 0.0))
            throw SimulationError("deformation gradient inverted: det(F) = " +
                                  std::to_string(det(p.F)));
    }
}

void mpm_step(ParticleSet& ps, MpmGrid& grid, const Vec3Grid* f_ext, const Scene& scene,
              double dt) {
    p2g(ps, scene, dt, grid);
    grid_velocities(grid, f_ext, scene, dt);
    apply_wall_bc(grid, scene);
    g2p(ps, grid, scene, dt);
    update_deformation(ps, dt);
}

}  // namespace windsim

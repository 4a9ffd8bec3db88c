#include "windsim/coupling.hpp"

#include <cmath>

#include "windsim/errors.hpp"

namespace windsim {

SolidMask voxelize(const ParticleSet& ps, const Scene& scene) {
    SolidMask mask(scene.grid.size(), 0);
    for (const auto& p : ps) {
        int c[3];
        for (int d = 0; d < 3; ++d)
            c[d] = static_cast<int>(std::floor((p.x[d] - scene.domain_min[d]) / scene.dx));
        if (!scene.grid.contains(c[0], c[1], c[2]))
            throw SimulationError("particle outside the lattice during voxelization");
        mask[scene.grid.idx(c[0], c[1], c[2])] = 1;
    }
    return mask;
}

SolidMask dilate(const SolidMask& mask, const GridDims& dims) {
    SolidMask out(mask.size(), 0);
    for (int i = 0; i < dims.nx; ++i)
        for (int j = 0; j < dims.ny; ++j)
            for (int k = 0; k < dims.nz; ++k) {
                if (!mask[dims.idx(i, j, k)]) continue;
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj)
                        for (int dk = -1; dk <= 1; ++dk) {
                            int a = i + di, b = j + dj, c = k + dk;
                            if (dims.contains(a, b, c)) out[dims.idx(a, b, c)] = 1;
                        }
            }
    return out;
}

Vec3Grid drag_force(const Vec3Grid& wind_si, const SolidMask& mask, const Scene& scene) {
    if (wind_si.size() != mask.size() || mask.size() != scene.grid.size())
        throw ValidationError("drag_force: field/mask sizes do not match the scene grid");
    Vec3Grid force(mask.size(), Vec3{});
    SolidMask shell = dilate(mask, scene.grid);
    const double a_ref = scene.dx * scene.dx;
    const double coef = 0.5 * scene.fluid.rho_w * scene.fluid.c_d * a_ref;
    for (std::size_t n = 0; n < mask.size(); ++n) {
        if (!shell[n]) continue;
        double speed = norm(wind_si[n]);
        if (speed < kSpeedEpsilon) continue;
        // 1/2 rho c_d A |u|^2 * (u/|u|) = coef * |u| * u
        force[n] = (coef * speed) * wind_si[n];
    }
    return force;
}

GuideField guide_from_field(const LbmField& field, const Scene& scene) {
    GuideField g;
    const std::size_t n = field.dims.size();
    g.dir.assign(n, Vec3{});
    g.speed.assign(n, 0.0);
    g.has_dir.assign(n, 0);
    const double scale = scene.dx / scene.dt_lbm();
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 u = scale * field.u[i];
        double speed = norm(u);
        g.speed[i] = speed;
        if (speed >= kSpeedEpsilon) {
            g.dir[i] = u / speed;
            g.has_dir[i] = 1;
        }
    }
    return g;
}

}  // namespace windsim

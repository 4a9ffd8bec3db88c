#include "windsim/lbm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "windsim/errors.hpp"

namespace windsim {

using namespace d3q27;

namespace {

struct Tables {
    double w[Q];
    int c[Q][3];
    int opp[Q];
};

constexpr Tables make_tables() {
    Tables t{};
    for (int i = 0; i < Q; ++i) {
        t.c[i][0] = cx(i);
        t.c[i][1] = cy(i);
        t.c[i][2] = cz(i);
        t.w[i] = weight(i);
        t.opp[i] = opposite(i);
    }
    return t;
}

constexpr Tables kT = make_tables();

// Post-streaming population q at node (i,j,k), gather form. Out-of-grid and
// solid sources are resolved by the boundary rules; f holds post-collision
// populations of the whole grid.
inline double gather_link(const std::vector<double>& f, const std::vector<std::uint8_t>& solid,
                          const GridDims& dims, const LbmBc& bc, int i, int j, int k, int q) {
    int s[3] = {i - kT.c[q][0], j - kT.c[q][1], k - kT.c[q][2]};
    const int n[3] = {dims.nx, dims.ny, dims.nz};
    bool bounce = false, inlet = false;
    for (int d = 0; d < 3; ++d) {
        if (s[d] >= 0 && s[d] < n[d]) continue;
        int face = 2 * d + (s[d] < 0 ? 0 : 1);
        switch (bc.face[face]) {
            case FaceBc::Periodic:
                s[d] = wrap(s[d], n[d]);
                break;
            case FaceBc::Wall:
                bounce = true;
                break;
            case FaceBc::Inlet:
                bounce = true;
                inlet = true;
                break;
            case FaceBc::Outlet:
                s[d] = std::clamp(s[d], 0, n[d] - 1);
                break;
        }
    }
    const std::size_t self = dims.idx(i, j, k);
    if (!bounce) {
        std::size_t src = dims.idx(s[0], s[1], s[2]);
        if (!solid[src]) return f[src * Q + q];
        bounce = true;  // halfway bounce-back off a solid node
    }
    double v = f[self * Q + kT.opp[q]];
    if (inlet) {
        double cu = kT.c[q][0] * bc.u_inlet.x + kT.c[q][1] * bc.u_inlet.y +
                    kT.c[q][2] * bc.u_inlet.z;
        v += 2.0 * kT.w[q] * bc.rho0 * cu / cs2;
    }
    return v;
}

}  // namespace

LbmBc make_lbm_bc(const Scene& scene) {
    LbmBc bc;
    for (int i = 0; i < 6; ++i) bc.face[i] = scene.fluid.face_bc[i];
    bc.u_inlet = scene.vel_to_lattice(scene.fluid.inlet_speed) * scene.fluid.inlet_dir;
    bc.rho0 = 1.0;
    return bc;
}

void init_field(LbmField& field, const GridDims& dims, double rho0) {
    field.dims = dims;
    field.rho0 = rho0;
    field.rho.assign(dims.size(), rho0);
    field.u.assign(dims.size(), Vec3{});
    field.S.assign(dims.size(), Sym3{});
    field.solid.assign(dims.size(), 0);
    field.f.clear();
    field.f_bgk.clear();
}

void init_equilibrium(LbmField& field, double rho0, const Vec3& u0) {
    if (norm(u0) >= 0.3)
        throw ValidationError("initial lattice velocity " + std::to_string(norm(u0)) +
                              " is outside the low-Mach validity range (< 0.3)");
    field.rho0 = rho0;
    std::fill(field.rho.begin(), field.rho.end(), rho0);
    std::fill(field.u.begin(), field.u.end(), u0);
    std::fill(field.S.begin(), field.S.end(), sym_outer(u0));
    field.f_bgk.clear();  // any reference-solver state is stale now
}

void reconstruct_node(double rho, const Vec3& u, const Sym3& S, double* f_out) {
    const double ux = u.x, uy = u.y, uz = u.z;
    // Third-order Hermite coefficients, built recursively from u and S.
    const double a_xxy = S.xx * uy + 2.0 * S.xy * ux - 2.0 * ux * ux * uy;
    const double a_xyy = S.yy * ux + 2.0 * S.xy * uy - 2.0 * ux * uy * uy;
    const double a_xxz = S.xx * uz + 2.0 * S.xz * ux - 2.0 * ux * ux * uz;
    const double a_xzz = S.zz * ux + 2.0 * S.xz * uz - 2.0 * ux * uz * uz;
    const double a_yyz = S.yy * uz + 2.0 * S.yz * uy - 2.0 * uy * uy * uz;
    const double a_yzz = S.zz * uy + 2.0 * S.yz * uz - 2.0 * uy * uz * uz;
    const double a_xyz = S.yz * ux + S.xz * uy + S.xy * uz - 2.0 * ux * uy * uz;
    for (int q = 0; q < Q; ++q) {
        const double cqx = kT.c[q][0], cqy = kT.c[q][1], cqz = kT.c[q][2];
        const double cu = cqx * ux + cqy * uy + cqz * uz;
        const double hxx = cqx * cqx - cs2, hyy = cqy * cqy - cs2, hzz = cqz * cqz - cs2;
        const double A2 = hxx * S.xx + hyy * S.yy + hzz * S.zz +
                          2.0 * (cqx * cqy * S.xy + cqx * cqz * S.xz + cqy * cqz * S.yz);
        // On this lattice the pure-diagonal third-order polynomials vanish
        // identically (c^3 = c), so seven mixed components remain.
        const double A3 = hxx * cqy * a_xxy + hyy * cqx * a_xyy + hxx * cqz * a_xxz +
                          hzz * cqx * a_xzz + hyy * cqz * a_yyz + hzz * cqy * a_yzz +
                          cqx * cqy * cqz * a_xyz;
        f_out[q] =
            rho * kT.w[q] * (1.0 + cu / cs2 + A2 / (2.0 * cs4) + A3 / (2.0 * cs6));
    }
}

void reconstruct_distributions(LbmField& field) {
    const std::size_t n = field.dims.size();
    field.f.resize(n * Q);
    for (std::size_t i = 0; i < n; ++i) {
        if (field.solid[i]) {
            // Never gathered; keep resting equilibrium for hygiene.
            for (int q = 0; q < Q; ++q) field.f[i * Q + q] = field.rho0 * kT.w[q];
        } else {
            reconstruct_node(field.rho[i], field.u[i], field.S[i], &field.f[i * Q]);
        }
    }
}

void stream(const std::vector<double>& f_in, const std::vector<std::uint8_t>& solid,
            const GridDims& dims, const LbmBc& bc, std::vector<double>& f_out) {
    f_out.resize(f_in.size());
    for (int i = 0; i < dims.nx; ++i)
        for (int j = 0; j < dims.ny; ++j)
            for (int k = 0; k < dims.nz; ++k) {
                std::size_t n = dims.idx(i, j, k);
                if (solid[n]) {
                    for (int q = 0; q < Q; ++q) f_out[n * Q + q] = f_in[n * Q + q];
                    continue;
                }
                for (int q = 0; q < Q; ++q)
                    f_out[n * Q + q] = gather_link(f_in, solid, dims, bc, i, j, k, q);
            }
}

void moment_update(LbmField& field, const std::vector<double>& rho_star, const Vec3Grid& u_star,
                   const std::vector<Sym3>& S_star, const Vec3Grid* force, double tau) {
    const std::size_t n = field.dims.size();
    const double om = 1.0 / tau;
    for (std::size_t i = 0; i < n; ++i) {
        if (field.solid[i]) {
            field.rho[i] = field.rho0;
            field.u[i] = Vec3{};
            field.S[i] = Sym3{};
            continue;
        }
        const double rs = rho_star[i];
        if (!(rs > 0.0) || !std::isfinite(rs)) {
            std::size_t rem = i;
            int kk = static_cast<int>(rem % field.dims.nz);
            rem /= field.dims.nz;
            int jj = static_cast<int>(rem % field.dims.ny);
            int ii = static_cast<int>(rem / field.dims.ny);
            throw SimulationError("wind solver density blew up at node (" + std::to_string(ii) +
                                  ", " + std::to_string(jj) + ", " + std::to_string(kk) +
                                  "): rho = " + std::to_string(rs));
        }
        const Vec3 us = u_star[i];
        const Sym3& Ss = S_star[i];
        const Vec3 F = force ? (*force)[i] : Vec3{};

        field.rho[i] = rs;
        field.u[i] = us + F / (2.0 * rs);

        Sym3 Sn;
        const double co = (2.0 * tau - 1.0) / (2.0 * tau * rs);
        Sn.xy = (1.0 - om) * Ss.xy + om * us.x * us.y + co * (F.x * us.y + F.y * us.x);
        Sn.xz = (1.0 - om) * Ss.xz + om * us.x * us.z + co * (F.x * us.z + F.z * us.x);
        Sn.yz = (1.0 - om) * Ss.yz + om * us.y * us.z + co * (F.y * us.z + F.z * us.y);
        const double u2 = norm2(us);
        const double cd = (tau - 1.0) / (3.0 * tau);
        const double cf = cd / rs;
        const double fu_x = F.x * us.x, fu_y = F.y * us.y, fu_z = F.z * us.z;
        Sn.xx = cd * (2.0 * Ss.xx - Ss.yy - Ss.zz) + u2 / 3.0 + fu_x / rs +
                cf * (2.0 * fu_x - fu_y - fu_z);
        Sn.yy = cd * (2.0 * Ss.yy - Ss.zz - Ss.xx) + u2 / 3.0 + fu_y / rs +
                cf * (2.0 * fu_y - fu_z - fu_x);
        Sn.zz = cd * (2.0 * Ss.zz - Ss.xx - Ss.yy) + u2 / 3.0 + fu_z / rs +
                cf * (2.0 * fu_z - fu_x - fu_y);
        field.S[i] = Sn;

        if (!std::isfinite(field.u[i].x + field.u[i].y + field.u[i].z))
            throw SimulationError("wind solver velocity blew up at linear node " +
                                  std::to_string(i));
    }
}

void lbm_step(LbmField& field, const Vec3Grid* force, const std::vector<std::uint8_t>* solid_mask,
              const Scene& scene) {
    if (!(field.dims == scene.grid))
        throw ValidationError("wind field dimensions do not match the scene grid");
    if (solid_mask) {
        if (solid_mask->size() != field.dims.size())
            throw ValidationError("solid mask size does not match the wind field");
        field.solid = *solid_mask;
    }
    const double tau = scene.tau();
    const LbmBc bc = make_lbm_bc(scene);

    reconstruct_distributions(field);

    const std::size_t n = field.dims.size();
    field.rho_s.resize(n);
    field.u_s.resize(n);
    field.S_s.resize(n);

    // Gather-stream directly into raw moments; no second distribution buffer.
    for (int i = 0; i < field.dims.nx; ++i)
        for (int j = 0; j < field.dims.ny; ++j)
            for (int k = 0; k < field.dims.nz; ++k) {
                const std::size_t node = field.dims.idx(i, j, k);
                if (field.solid[node]) continue;
                double r = 0.0;
                double mx = 0.0, my = 0.0, mz = 0.0;
                double mxx = 0.0, myy = 0.0, mzz = 0.0, mxy = 0.0, mxz = 0.0, myz = 0.0;
                for (int q = 0; q < Q; ++q) {
                    const double fq = gather_link(field.f, field.solid, field.dims, bc, i, j, k, q);
                    const double cqx = kT.c[q][0], cqy = kT.c[q][1], cqz = kT.c[q][2];
                    r += fq;
                    mx += cqx * fq;
                    my += cqy * fq;
                    mz += cqz * fq;
                    mxx += cqx * cqx * fq;
                    myy += cqy * cqy * fq;
                    mzz += cqz * cqz * fq;
                    mxy += cqx * cqy * fq;
                    mxz += cqx * cqz * fq;
                    myz += cqy * cqz * fq;
                }
                field.rho_s[node] = r;
                const double ir = 1.0 / r;
                // Velocity moment carries half the body force; the collision
                // adds the other half, so one step gains the full F/rho.
                const Vec3 F = force ? (*force)[node] : Vec3{};
                field.u_s[node] =
                    Vec3{(mx + 0.5 * F.x) * ir, (my + 0.5 * F.y) * ir, (mz + 0.5 * F.z) * ir};
                field.S_s[node] =
                    Sym3{mxx * ir - cs2, myy * ir - cs2, mzz * ir - cs2,
                         mxy * ir,       mxz * ir,       myz * ir};
            }

    moment_update(field, field.rho_s, field.u_s, field.S_s, force, tau);
}

void bgk_step(LbmField& field, const Vec3Grid* force, const std::vector<std::uint8_t>* solid_mask,
              const Scene& scene) {
    if (!(field.dims == scene.grid))
        throw ValidationError("wind field dimensions do not match the scene grid");
    if (solid_mask) {
        if (solid_mask->size() != field.dims.size())
            throw ValidationError("solid mask size does not match the wind field");
        field.solid = *solid_mask;
    }
    const double tau = scene.tau();
    const LbmBc bc = make_lbm_bc(scene);
    const std::size_t n = field.dims.size();

    if (field.f_bgk.size() != n * Q) {
        // Seed populations from the current macroscopic state (second-order
        // equilibrium; the non-equilibrium part builds up within a few steps).
        field.f_bgk.resize(n * Q);
        for (std::size_t i = 0; i < n; ++i) {
            const double rho = field.rho[i];
            const Vec3 u = field.u[i];
            const double u2 = norm2(u);
            for (int q = 0; q < Q; ++q) {
                double cu = kT.c[q][0] * u.x + kT.c[q][1] * u.y + kT.c[q][2] * u.z;
                field.f_bgk[i * Q + q] =
                    rho * kT.w[q] *
                    (1.0 + cu / cs2 + cu * cu / (2.0 * cs4) - u2 / (2.0 * cs2));
            }
        }
    }

    // Collide in place (Guo forcing, velocity shifted by half the force).
    for (std::size_t i = 0; i < n; ++i) {
        double* fi = &field.f_bgk[i * Q];
        if (field.solid[i]) {
            for (int q = 0; q < Q; ++q) fi[q] = field.rho0 * kT.w[q];
            continue;
        }
        double rho = 0.0, mx = 0.0, my = 0.0, mz = 0.0;
        for (int q = 0; q < Q; ++q) {
            rho += fi[q];
            mx += kT.c[q][0] * fi[q];
            my += kT.c[q][1] * fi[q];
            mz += kT.c[q][2] * fi[q];
        }
        if (!(rho > 0.0) || !std::isfinite(rho))
            throw SimulationError("reference solver density blew up at linear node " +
                                  std::to_string(i));
        const Vec3 F = force ? (*force)[i] : Vec3{};
        const Vec3 u = Vec3{(mx + 0.5 * F.x) / rho, (my + 0.5 * F.y) / rho,
                            (mz + 0.5 * F.z) / rho};
        const double u2 = norm2(u);
        const double gw = 1.0 - 1.0 / (2.0 * tau);
        for (int q = 0; q < Q; ++q) {
            const double cqx = kT.c[q][0], cqy = kT.c[q][1], cqz = kT.c[q][2];
            const double cu = cqx * u.x + cqy * u.y + cqz * u.z;
            const double feq =
                rho * kT.w[q] * (1.0 + cu / cs2 + cu * cu / (2.0 * cs4) - u2 / (2.0 * cs2));
            const double sx = (cqx - u.x) / cs2 + cu * cqx / cs4;
            const double sy = (cqy - u.y) / cs2 + cu * cqy / cs4;
            const double sz = (cqz - u.z) / cs2 + cu * cqz / cs4;
            const double src = gw * kT.w[q] * (sx * F.x + sy * F.y + sz * F.z);
            fi[q] += -(fi[q] - feq) / tau + src;
        }
    }

    stream(field.f_bgk, field.solid, field.dims, bc, field.f);
    std::swap(field.f_bgk, field.f);

    // Refresh macroscopic diagnostics from the streamed populations.
    for (std::size_t i = 0; i < n; ++i) {
        if (field.solid[i]) {
            field.rho[i] = field.rho0;
            field.u[i] = Vec3{};
            field.S[i] = Sym3{};
            continue;
        }
        const double* fi = &field.f_bgk[i * Q];
        double rho = 0.0, mx = 0.0, my = 0.0, mz = 0.0;
        double mxx = 0.0, myy = 0.0, mzz = 0.0, mxy = 0.0, mxz = 0.0, myz = 0.0;
        for (int q = 0; q < Q; ++q) {
            const double cqx = kT.c[q][0], cqy = kT.c[q][1], cqz = kT.c[q][2];
            rho += fi[q];
            mx += cqx * fi[q];
            my += cqy * fi[q];
            mz += cqz * fi[q];
            mxx += cqx * cqx * fi[q];
            myy += cqy * cqy * fi[q];
            mzz += cqz * cqz * fi[q];
            mxy += cqx * cqy * fi[q];
            mxz += cqx * cqz * fi[q];
            myz += cqy * cqz * fi[q];
        }
        const Vec3 F = force ? (*force)[i] : Vec3{};
        field.rho[i] = rho;
        field.u[i] = Vec3{(mx + 0.5 * F.x) / rho, (my + 0.5 * F.y) / rho,
                          (mz + 0.5 * F.z) / rho};
        const double ir = 1.0 / rho;
        field.S[i] = Sym3{mxx * ir - cs2, myy * ir - cs2, mzz * ir - cs2,
                          mxy * ir,       mxz * ir,       myz * ir};
    }
}

double total_mass(const LbmField& field) {
    KahanSum s;
    for (std::size_t i = 0; i < field.dims.size(); ++i)
        if (!field.solid[i]) s.add(field.rho[i]);
    return s.get();
}

double kinetic_energy(const LbmField& field) {
    KahanSum s;
    for (std::size_t i = 0; i < field.dims.size(); ++i)
        if (!field.solid[i]) s.add(0.5 * field.rho[i] * norm2(field.u[i]));
    return s.get();
}

Mat3 viscous_stress(const LbmField& field, std::size_t node, double tau) {
    // Non-equilibrium second moment Pi_ab ~ rho (S_ab - u_a u_b); the viscous
    // stress is its deviator scaled by -(1 - 1/(2 tau)).
    const double rho = field.rho[node];
    const Vec3 u = field.u[node];
    const Sym3& S = field.S[node];
    Mat3 pi;
    pi[0][0] = rho * (S.xx - u.x * u.x);
    pi[1][1] = rho * (S.yy - u.y * u.y);
    pi[2][2] = rho * (S.zz - u.z * u.z);
    pi[0][1] = pi[1][0] = rho * (S.xy - u.x * u.y);
    pi[0][2] = pi[2][0] = rho * (S.xz - u.x * u.z);
    pi[1][2] = pi[2][1] = rho * (S.yz - u.y * u.z);
    const double tr3 = trace(pi) / 3.0;
    for (int d = 0; d < 3; ++d) pi[d][d] -= tr3;
    return (-(1.0 - 1.0 / (2.0 * tau))) * pi;
}

Vec3Grid wind_velocity_si(const LbmField& field, const Scene& scene) {
    Vec3Grid out(field.dims.size());
    const double scale = scene.dx / scene.dt_lbm();
    for (std::size_t i = 0; i < field.dims.size(); ++i) out[i] = scale * field.u[i];
    return out;
}

}  // namespace windsim

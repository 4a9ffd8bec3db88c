#pragma once
// Scene description: domain, grid resolution, time stepping, fluid parameters,
// materials and wall boundary conditions. Loaded from / saved to a strict JSON
// schema (unknown keys are rejected so typos fail loudly).

#include <array>
#include <string>
#include <vector>

#include "windsim/grid.hpp"
#include "windsim/math.hpp"

namespace windsim {

// Grid-boundary treatment for the solid (particle) solver.
enum class WallTag { Sticky, Slip, Open };

// Per-face treatment for the wind solver. Face order: xmin,xmax,ymin,ymax,zmin,zmax.
enum class FaceBc { Periodic, Wall, Inlet, Outlet };

struct Material {
    int id = 0;
    std::string name;
    double youngs_modulus = 0.0;   // E, Pa
    double poisson_ratio = 0.0;    // nu_p, dimensionless
    double density = 0.0;          // kg/m^3
    // Lame parameters, derived by validate_scene().
    double mu = 0.0;
    double lambda = 0.0;
};

struct FluidParams {
    double rho_w = 1.2;            // wind density, kg/m^3
    double nu = 1.5e-5;            // kinematic viscosity, m^2/s
    double c_d = 1.0;              // drag coefficient
    Vec3 inlet_dir{1.0, 0.0, 0.0}; // unit direction of inlet wind
    double inlet_speed = 0.0;      // m/s
    std::array<FaceBc, 6> face_bc{FaceBc::Periodic, FaceBc::Periodic, FaceBc::Periodic,
                                  FaceBc::Periodic, FaceBc::Periodic, FaceBc::Periodic};
};

struct Scene {
    Vec3 domain_min{0.0, 0.0, 0.0};
    Vec3 domain_max{1.0, 1.0, 1.0};
    Vec3 gravity{0.0, 0.0, 0.0};
    GridDims grid;                 // shared by solid and wind solvers
    double frame_dt = 1.0 / 60.0;  // seconds per output frame
    int substeps = 20;             // solver substeps per frame
    FluidParams fluid;
    std::vector<Material> materials;
    std::array<WallTag, 6> walls{WallTag::Sticky, WallTag::Sticky, WallTag::Sticky,
                                 WallTag::Sticky, WallTag::Sticky, WallTag::Sticky};

    // Derived quantities (filled by validate_scene).
    double dx = 0.0;               // grid spacing, m (cubic cells enforced)
    double dt_sub() const { return frame_dt / substeps; }
    // One wind-solver step per solid substep, so the lattice time step is dt_sub.
    double dt_lbm() const { return dt_sub(); }

    Vec3 node_pos(int i, int j, int k) const {
        return {domain_min.x + dx * i, domain_min.y + dx * j, domain_min.z + dx * k};
    }

    // Lattice-unit conversions for the wind solver.
    double vel_to_lattice(double v_si) const { return v_si * dt_lbm() / dx; }
    double vel_to_si(double v_lat) const { return v_lat * dx / dt_lbm(); }
    double nu_lattice() const { return fluid.nu * dt_lbm() / (dx * dx); }
    double tau() const { return 3.0 * nu_lattice() + 0.5; }

    const Material& material(int id) const;
};

// mu = E / (2 (1 + nu)),  lambda = E nu / ((1 + nu)(1 - 2 nu)).
void lame_from_young(double E, double nu_p, double& mu, double& lambda);

// Checks all scene invariants, fills derived fields (dx, Lame parameters).
// Throws ValidationError listing every violation. Non-fatal concerns
// (marginal relaxation time, large CFL number) are appended to `warnings`.
void validate_scene(Scene& scene, std::vector<std::string>* warnings = nullptr);

// Strict JSON round-trip. load_scene validates before returning.
Scene load_scene(const std::string& path, std::vector<std::string>* warnings = nullptr);
Scene parse_scene_json(const std::string& text, std::vector<std::string>* warnings = nullptr);
std::string scene_to_json(const Scene& scene);
void save_scene(const Scene& scene, const std::string& path);

const char* wall_tag_name(WallTag t);
const char* face_bc_name(FaceBc f);

}  // namespace windsim

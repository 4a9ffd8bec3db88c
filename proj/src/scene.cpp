#include "windsim/scene.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "windsim/errors.hpp"

namespace windsim {

using nlohmann::json;

void lame_from_young(double E, double nu_p, double& mu, double& lambda) {
    mu = E / (2.0 * (1.0 + nu_p));
    lambda = E * nu_p / ((1.0 + nu_p) * (1.0 - 2.0 * nu_p));
}

const Material& Scene::material(int id) const {
    for (const auto& m : materials)
        if (m.id == id) return m;
    throw ValidationError("unknown material id " + std::to_string(id));
}

const char* wall_tag_name(WallTag t) {
    switch (t) {
        case WallTag::Sticky: return "sticky";
        case WallTag::Slip: return "slip";
        case WallTag::Open: return "open";
    }
    return "?";
}

const char* face_bc_name(FaceBc f) {
    switch (f) {
        case FaceBc::Periodic: return "periodic";
        case FaceBc::Wall: return "wall";
        case FaceBc::Inlet: return "inlet";
        case FaceBc::Outlet: return "outlet";
    }
    return "?";
}

static WallTag parse_wall_tag(const std::string& s) {
    if (s == "sticky") return WallTag::Sticky;
    if (s == "slip") return WallTag::Slip;
    if (s == "open") return WallTag::Open;
    throw ValidationError("unknown wall tag '" + s + "' (expected sticky|slip|open)");
}

static FaceBc parse_face_bc(const std::string& s) {
    if (s == "periodic") return FaceBc::Periodic;
    if (s == "wall") return FaceBc::Wall;
    if (s == "inlet") return FaceBc::Inlet;
    if (s == "outlet") return FaceBc::Outlet;
    throw ValidationError("unknown face bc '" + s + "' (expected periodic|wall|inlet|outlet)");
}

void validate_scene(Scene& scene, std::vector<std::string>* warnings) {
    std::vector<std::string> errs;

    const Vec3 ext = scene.domain_max - scene.domain_min;
    if (!(ext.x > 0 && ext.y > 0 && ext.z > 0))
        errs.push_back("domain: max must exceed min on every axis");

    const GridDims& g = scene.grid;
    if (g.nx < 2 || g.ny < 2 || g.nz < 2)
        errs.push_back("grid: resolution must be at least 2 per axis");

    // Cubic cells: dx must agree across axes.
    if (errs.empty()) {
        double dxx = ext.x / g.nx, dxy = ext.y / g.ny, dxz = ext.z / g.nz;
        if (std::abs(dxx - dxy) > 1e-12 * dxx || std::abs(dxx - dxz) > 1e-12 * dxx)
            errs.push_back("grid: cells must be cubic (extent/res equal on all axes)");
        scene.dx = dxx;
    }

    if (!(scene.frame_dt > 0)) errs.push_back("time: frame_dt must be > 0");
    if (scene.substeps < 1) errs.push_back("time: substeps must be >= 1");

    FluidParams& f = scene.fluid;
    if (!(f.rho_w > 0)) errs.push_back("fluid: rho_w must be > 0");
    if (!(f.nu > 0)) errs.push_back("fluid: nu must be > 0");
    if (!(f.c_d >= 0)) errs.push_back("fluid: c_d must be >= 0");
    if (f.inlet_speed < 0) errs.push_back("fluid: inlet_speed must be >= 0");
    double ndir = norm(f.inlet_dir);
    if (f.inlet_speed > 0) {
        if (ndir < 1e-12) {
            errs.push_back("fluid: inlet_dir must be nonzero when inlet_speed > 0");
        } else {
            f.inlet_dir = f.inlet_dir / ndir;
        }
    }
    // Periodic faces must pair up, else streaming wraps into a differently-typed face.
    for (int a = 0; a < 3; ++a) {
        bool lo = f.face_bc[2 * a] == FaceBc::Periodic;
        bool hi = f.face_bc[2 * a + 1] == FaceBc::Periodic;
        if (lo != hi)
            errs.push_back("fluid: periodic faces must come in opposite pairs (axis " +
                           std::to_string(a) + ")");
    }

    if (scene.materials.empty()) errs.push_back("materials: need at least one");
    std::set<int> ids;
    for (auto& m : scene.materials) {
        if (!ids.insert(m.id).second)
            errs.push_back("materials: duplicate id " + std::to_string(m.id));
        if (!(m.youngs_modulus > 0))
            errs.push_back("material '" + m.name + "': E must be > 0");
        if (!(m.poisson_ratio > 0 && m.poisson_ratio < 0.5))
            errs.push_back("material '" + m.name + "': nu_p must be in (0, 0.5)");
        if (!(m.density > 0))
            errs.push_back("material '" + m.name + "': density must be > 0");
        if (m.youngs_modulus > 0 && m.poisson_ratio > 0 && m.poisson_ratio < 0.5)
            lame_from_young(m.youngs_modulus, m.poisson_ratio, m.mu, m.lambda);
    }

    // Lattice relaxation time: tau <= 0.5 is unconditionally unstable.
    if (errs.empty() && scene.frame_dt > 0 && scene.substeps >= 1 && f.nu > 0) {
        double tau = scene.tau();
        if (!(tau > 0.5))
            errs.push_back("fluid: relaxation time tau = " + std::to_string(tau) +
                           " must be > 0.5 (raise nu, shrink dt, or coarsen the grid)");
        else if (tau < 0.51 && warnings)
            warnings->push_back("tau = " + std::to_string(tau) +
                                " is close to the 0.5 stability limit");
        double u_in_lat = scene.vel_to_lattice(f.inlet_speed);
        if (u_in_lat > 0.3)
            errs.push_back("fluid: inlet speed is " + std::to_string(u_in_lat) +
                           " in lattice units; must stay below 0.3");
        else if (u_in_lat > 0.1 && warnings)
            warnings->push_back("inlet speed " + std::to_string(u_in_lat) +
                                " lattice units exceeds the low-Mach comfort zone (0.1)");
        // Advection CFL guess for the solid solver based on the inlet speed.
        if (warnings && f.inlet_speed * scene.dt_sub() > 0.5 * scene.dx)
            warnings->push_back("inlet speed may advect particles more than dx/2 per substep");
    }

    if (!errs.empty()) {
        std::string msg = "scene validation failed:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw ValidationError(msg);
    }
}

// ---------------------------------------------------------------------------
// JSON (strict: unknown keys rejected at every level)

static void require_keys(const json& j, const char* where,
                         const std::set<std::string>& allowed,
                         const std::set<std::string>& required) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError(std::string(where) + ": unknown key '" + it.key() + "'");
    for (const auto& k : required)
        if (!j.contains(k))
            throw ValidationError(std::string(where) + ": missing key '" + k + "'");
}

static Vec3 parse_vec3(const json& j, const char* where) {
    if (!j.is_array() || j.size() != 3)
        throw ValidationError(std::string(where) + ": expected an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Scene parse_scene_json(const std::string& text, std::vector<std::string>* warnings) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("scene json parse error: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("scene json: top level must be an object");

    require_keys(j, "scene",
                 {"schema", "domain", "grid", "time", "fluid", "materials", "walls"},
                 {"schema", "domain", "grid", "time", "fluid", "materials", "walls"});
    if (j["schema"].get<int>() != 1)
        throw ValidationError("scene: unsupported schema version " + j["schema"].dump());

    Scene s;

    const json& dom = j["domain"];
    require_keys(dom, "domain", {"min", "max", "gravity"}, {"min", "max"});
    s.domain_min = parse_vec3(dom["min"], "domain.min");
    s.domain_max = parse_vec3(dom["max"], "domain.max");
    if (dom.contains("gravity")) s.gravity = parse_vec3(dom["gravity"], "domain.gravity");

    const json& grid = j["grid"];
    require_keys(grid, "grid", {"res"}, {"res"});
    if (!grid["res"].is_array() || grid["res"].size() != 3)
        throw ValidationError("grid.res: expected an array of 3 integers");
    s.grid = {grid["res"][0].get<int>(), grid["res"][1].get<int>(), grid["res"][2].get<int>()};

    const json& time = j["time"];
    require_keys(time, "time", {"frame_dt", "substeps"}, {"frame_dt", "substeps"});
    s.frame_dt = time["frame_dt"].get<double>();
    s.substeps = time["substeps"].get<int>();

    const json& fl = j["fluid"];
    require_keys(fl, "fluid",
                 {"rho_w", "nu", "c_d", "inlet_dir", "inlet_speed", "face_bc"},
                 {"rho_w", "nu"});
    s.fluid.rho_w = fl["rho_w"].get<double>();
    s.fluid.nu = fl["nu"].get<double>();
    if (fl.contains("c_d")) s.fluid.c_d = fl["c_d"].get<double>();
    if (fl.contains("inlet_dir")) s.fluid.inlet_dir = parse_vec3(fl["inlet_dir"], "fluid.inlet_dir");
    if (fl.contains("inlet_speed")) s.fluid.inlet_speed = fl["inlet_speed"].get<double>();
    if (fl.contains("face_bc")) {
        const json& fb = fl["face_bc"];
        if (!fb.is_array() || fb.size() != 6)
            throw ValidationError(
                "fluid.face_bc: expected 6 entries (xmin,xmax,ymin,ymax,zmin,zmax)");
        for (int i = 0; i < 6; ++i) s.fluid.face_bc[i] = parse_face_bc(fb[i].get<std::string>());
    }

    const json& mats = j["materials"];
    if (!mats.is_array()) throw ValidationError("materials: expected an array");
    for (const auto& jm : mats) {
        require_keys(jm, "material", {"id", "name", "E", "nu_p", "density"},
                     {"id", "E", "nu_p", "density"});
        Material m;
        m.id = jm["id"].get<int>();
        if (jm.contains("name")) m.name = jm["name"].get<std::string>();
        m.youngs_modulus = jm["E"].get<double>();
        m.poisson_ratio = jm["nu_p"].get<double>();
        m.density = jm["density"].get<double>();
        s.materials.push_back(m);
    }

    const json& walls = j["walls"];
    if (!walls.is_array() || walls.size() != 6)
        throw ValidationError("walls: expected 6 entries (xmin,xmax,ymin,ymax,zmin,zmax)");
    for (int i = 0; i < 6; ++i) s.walls[i] = parse_wall_tag(walls[i].get<std::string>());

    validate_scene(s, warnings);
    return s;
}

std::string scene_to_json(const Scene& s) {
    json j;
    j["schema"] = 1;
    j["domain"]["min"] = {s.domain_min.x, s.domain_min.y, s.domain_min.z};
    j["domain"]["max"] = {s.domain_max.x, s.domain_max.y, s.domain_max.z};
    j["domain"]["gravity"] = {s.gravity.x, s.gravity.y, s.gravity.z};
    j["grid"]["res"] = {s.grid.nx, s.grid.ny, s.grid.nz};
    j["time"]["frame_dt"] = s.frame_dt;
    j["time"]["substeps"] = s.substeps;
    j["fluid"]["rho_w"] = s.fluid.rho_w;
    j["fluid"]["nu"] = s.fluid.nu;
    j["fluid"]["c_d"] = s.fluid.c_d;
    j["fluid"]["inlet_dir"] = {s.fluid.inlet_dir.x, s.fluid.inlet_dir.y, s.fluid.inlet_dir.z};
    j["fluid"]["inlet_speed"] = s.fluid.inlet_speed;
    json fb = json::array();
    for (int i = 0; i < 6; ++i) fb.push_back(face_bc_name(s.fluid.face_bc[i]));
    j["fluid"]["face_bc"] = fb;
    j["materials"] = json::array();
    for (const auto& m : s.materials) {
        json jm;
        jm["id"] = m.id;
        jm["name"] = m.name;
        jm["E"] = m.youngs_modulus;
        jm["nu_p"] = m.poisson_ratio;
        jm["density"] = m.density;
        j["materials"].push_back(jm);
    }
    json w = json::array();
    for (int i = 0; i < 6; ++i) w.push_back(wall_tag_name(s.walls[i]));
    j["walls"] = w;
    return j.dump(2) + "\n";
}

Scene load_scene(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene_json(ss.str(), warnings);
}

void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write scene file: " + path);
    out << scene_to_json(scene);
}

}  // namespace windsim

// windsim: wind-driven deformation simulator and per-timestep wind force
// recovery. Subcommands: simulate, reconstruct, retarget, eval, gradcheck,
// densify. Every run writes a manifest JSON with stage timings next to its
// outputs.
//
// Exit codes: 0 ok, 2 bad input, 3 numerical instability, 4 optimizer made no
// progress, 5 gradient check failed.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "windsim/adjoint.hpp"
#include "windsim/coupling.hpp"
#include "windsim/errors.hpp"
#include "windsim/field_io.hpp"
#include "windsim/gradcheck.hpp"
#include "windsim/inverse.hpp"
#include "windsim/lbm.hpp"
#include "windsim/mpm.hpp"
#include "windsim/particles.hpp"
#include "windsim/scene.hpp"
#include "windsim/volume.hpp"

namespace fs = std::filesystem;
using namespace windsim;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Timings {
    std::map<std::string, double> stages;

    struct Scope {
        Timings& t;
        std::string name;
        std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
        ~Scope() {
            t.stages[name] +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    Scope scope(const std::string& name) { return {*this, name}; }
};

struct CommonFlags {
    std::uint64_t seed = 0;
    bool deterministic = false;
    int threads = 1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "seed for any randomized stage");
        cmd->add_flag("--deterministic", deterministic,
                      "bitwise-reproducible mode (kernels are already deterministic "
                      "single-threaded; this pins it for manifests)");
        cmd->add_option("--threads", threads,
                        "reserved; this build runs the kernels single-threaded")
            ->check(CLI::PositiveNumber);
    }
};

void write_manifest(const std::string& path, const std::string& command, const json& params,
                    const CommonFlags& flags, const Timings& timings,
                    const std::vector<std::string>& outputs) {
    json j;
    j["tool"] = "windsim";
    j["version"] = kVersion;
    j["command"] = command;
    j["params"] = params;
    j["seed"] = flags.seed;
    j["deterministic"] = flags.deterministic;
    j["threads"] = flags.threads;
    j["timings_s"] = timings.stages;
    j["outputs"] = outputs;
    std::ofstream os(path);
    if (!os) throw IoError("cannot write manifest: " + path);
    os << j.dump(2) << "\n";
}

Scene load_scene_checked(const std::string& path, double frame_dt_override, int substeps_override) {
    std::vector<std::string> warnings;
    Scene scene = load_scene(path, &warnings);
    if (frame_dt_override > 0) scene.frame_dt = frame_dt_override;
    if (substeps_override > 0) scene.substeps = substeps_override;
    if (frame_dt_override > 0 || substeps_override > 0) validate_scene(scene, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return scene;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& scene_path, const std::string& particles_path,
                 const std::string& out_dir, int frames, const std::string& forces_path,
                 bool no_wind, bool save_wind, bool save_frames, double frame_dt_override,
                 int substeps_override, const CommonFlags& flags) {
    Timings timings;
    Scene scene = load_scene_checked(scene_path, frame_dt_override, substeps_override);
    ParticleSet ps = read_particles(particles_path);
    if (ps.empty()) throw ValidationError("particle snapshot is empty");

    ForceField ff;
    bool have_ff = !forces_path.empty();
    if (have_ff) {
        ff = read_force_field(forces_path);
        if (!(ff.dims == scene.grid))
            throw ValidationError("force field dims do not match the scene grid");
        if (static_cast<int>(ff.steps.size()) < frames)
            throw ValidationError("force field has fewer timesteps than --frames");
    }

    fs::create_directories(out_dir);

    LbmField wind;
    init_field(wind, scene.grid, 1.0);

    ObservationSequence obs;
    obs.marker_ids = marker_indices(ps);
    if (obs.marker_ids.empty())
        throw ValidationError("no marker particles in the snapshot (nothing to observe)");

    std::ofstream diag(out_dir + "/diagnostics.csv");
    diag << "frame,time_s,centroid_x,centroid_y,centroid_z,max_speed,wind_ke_lattice\n";
    diag.precision(17);

    MpmGrid grid;
    Vec3Grid force_total(scene.grid.size());
    const double dt = scene.dt_sub();
    for (int frame = 0; frame < frames; ++frame) {
        for (int s = 0; s < scene.substeps; ++s) {
            Vec3Grid* force = nullptr;
            {
                auto t = timings.scope("lbm");
                if (!no_wind) {
                    SolidMask mask = voxelize(ps, scene);
                    lbm_step(wind, nullptr, &mask, scene);
                    Vec3Grid u_si = wind_velocity_si(wind, scene);
                    force_total = drag_force(u_si, mask, scene);
                    force = &force_total;
                }
            }
            if (have_ff) {
                if (!force) {
                    std::fill(force_total.begin(), force_total.end(), Vec3{});
                    force = &force_total;
                }
                const Vec3Grid& step_force = ff.steps[frame];
                for (std::size_t n = 0; n < force_total.size(); ++n)
                    force_total[n] += step_force[n];
            }
            auto t = timings.scope("mpm");
            mpm_step(ps, grid, force, scene, dt);
        }
        obs.frames.push_back(marker_positions(ps, obs.marker_ids));

        Vec3 c = centroid(ps);
        double vmax = 0.0;
        for (const auto& p : ps) vmax = std::max(vmax, norm(p.v));
        diag << frame << ',' << (frame + 1) * scene.frame_dt << ',' << c.x << ',' << c.y << ','
             << c.z << ',' << vmax << ',' << kinetic_energy(wind) << "\n";

        if (save_frames) {
            char name[64];
            std::snprintf(name, sizeof(name), "/frame_%04d.dwpt", frame);
            write_particles(ps, out_dir + name);
        }
    }

    std::vector<std::string> outputs;
    {
        auto t = timings.scope("io");
        write_particles(ps, out_dir + "/final.dwpt");
        outputs.push_back(out_dir + "/final.dwpt");
        write_observations(obs, out_dir + "/markers.csv");
        outputs.push_back(out_dir + "/markers.csv");
        if (save_wind) {
            write_grid_dump(dump_wind_field(wind), out_dir + "/wind_final.dwgf");
            outputs.push_back(out_dir + "/wind_final.dwgf");
        }
        outputs.push_back(out_dir + "/diagnostics.csv");
    }

    json params{{"scene", scene_path}, {"particles", particles_path},   {"frames", frames},
                {"forces", forces_path}, {"no_wind", no_wind},          {"out_dir", out_dir}};
    write_manifest(out_dir + "/manifest.json", "simulate", params, flags, timings, outputs);
    std::cout << "simulated " << frames << " frames, " << ps.size() << " particles -> "
              << out_dir << "\n";
    return 0;
}

int cmd_reconstruct(const std::string& scene_path, const std::string& particles_path,
                    const std::string& obs_path, const std::string& out_dir, double lambda_phys,
                    int max_iters, const std::string& optimizer, double adam_lr,
                    double frame_dt_override, int substeps_override, const CommonFlags& flags) {
    Timings timings;
    Scene scene = load_scene_checked(scene_path, frame_dt_override, substeps_override);
    ParticleSet ps = read_particles(particles_path);
    ObservationSequence obs = read_observations(obs_path);

    ReconOpts opts;
    opts.lambda_phys = lambda_phys;
    if (max_iters > 0) opts.max_iters = max_iters;
    if (optimizer == "adam")
        opts.optimizer = ReconOpts::Optimizer::Adam;
    else if (optimizer != "gd")
        throw ValidationError("unknown optimizer '" + optimizer + "' (expected gd|adam)");
    opts.adam_lr = adam_lr;

    fs::create_directories(out_dir);
    ReconResult rr;
    {
        auto t = timings.scope("optimize");
        rr = reconstruct_sequence(ps, obs, scene, opts);
    }

    std::vector<std::string> outputs;
    {
        auto t = timings.scope("io");
        write_force_field(rr.force, out_dir + "/recovered.dwff");
        outputs.push_back(out_dir + "/recovered.dwff");

        std::ofstream csv(out_dir + "/recon_frames.csv");
        csv << "frame,iters,loss_obs,loss_phys,marker_rmse\n";
        csv.precision(17);
        json jframes = json::array();
        for (const auto& f : rr.frames) {
            csv << f.frame << ',' << f.iters << ',' << f.loss_obs << ',' << f.loss_phys << ','
                << f.marker_rmse << "\n";
            jframes.push_back({{"frame", f.frame},
                               {"iters", f.iters},
                               {"loss_obs", f.loss_obs},
                               {"loss_phys", f.loss_phys},
                               {"marker_rmse", f.marker_rmse}});
        }
        outputs.push_back(out_dir + "/recon_frames.csv");

        json report;
        report["frames"] = jframes;
        report["lambda_phys"] = lambda_phys;
        report["optimizer"] = optimizer;
        report["force_file"] = out_dir + "/recovered.dwff";
        std::ofstream rj(out_dir + "/recon_report.json");
        rj << report.dump(2) << "\n";
        outputs.push_back(out_dir + "/recon_report.json");

        write_particles(rr.end_state, out_dir + "/final.dwpt");
        outputs.push_back(out_dir + "/final.dwpt");
    }

    json params{{"scene", scene_path},   {"particles", particles_path}, {"obs", obs_path},
                {"lambda_phys", lambda_phys}, {"optimizer", optimizer}, {"out_dir", out_dir}};
    write_manifest(out_dir + "/manifest.json", "reconstruct", params, flags, timings, outputs);

    double rmse = rr.frames.empty() ? 0.0 : rr.frames.back().marker_rmse;
    std::cout << "reconstructed " << rr.frames.size() << " frames, final marker rmse " << rmse
              << " m -> " << out_dir << "\n";
    return 0;
}

int cmd_retarget(const std::string& scene_path, const std::string& particles_path,
                 const std::string& forces_path, const std::string& out_dir,
                 double frame_dt_override, int substeps_override, const CommonFlags& flags) {
    Timings timings;
    Scene scene = load_scene_checked(scene_path, frame_dt_override, substeps_override);
    ParticleSet ps = read_particles(particles_path);
    ForceField ff = read_force_field(forces_path);

    fs::create_directories(out_dir);
    std::vector<ParticleSet> traj;
    {
        auto t = timings.scope("mpm");
        traj = retarget(ff, ps, scene);
    }

    std::vector<std::string> outputs;
    {
        auto t = timings.scope("io");
        ObservationSequence obs;
        obs.marker_ids = marker_indices(ps);
        for (std::size_t f = 0; f < traj.size(); ++f) {
            char name[64];
            std::snprintf(name, sizeof(name), "/frame_%04zu.dwpt", f);
            write_particles(traj[f], out_dir + name);
            outputs.push_back(out_dir + name);
            if (!obs.marker_ids.empty())
                obs.frames.push_back(marker_positions(traj[f], obs.marker_ids));
        }
        if (!obs.marker_ids.empty()) {
            write_observations(obs, out_dir + "/markers.csv");
            outputs.push_back(out_dir + "/markers.csv");
        }
    }

    json params{{"scene", scene_path},
                {"particles", particles_path},
                {"forces", forces_path},
                {"out_dir", out_dir}};
    write_manifest(out_dir + "/manifest.json", "retarget", params, flags, timings, outputs);
    std::cout << "retargeted " << traj.size() << " frames -> " << out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& gt_path, const std::string& rec_path,
             const std::string& out_path, const CommonFlags& flags) {
    Timings timings;
    ForceField gt = read_force_field(gt_path);
    ForceField rec = read_force_field(rec_path);
    EvalResult r;
    {
        auto t = timings.scope("eval");
        r = eval_metrics(gt, rec);
    }
    std::cout << "cos_sim " << r.cos_sim << "  nmse " << r.nmse << "  support " << r.support
              << " node-steps\n";
    if (!out_path.empty()) {
        json j{{"cos_sim", r.cos_sim}, {"nmse", r.nmse}, {"support", r.support}};
        std::ofstream os(out_path);
        if (!os) throw IoError("cannot write eval output: " + out_path);
        os << j.dump(2) << "\n";
        write_manifest(out_path + ".manifest.json", "eval",
                       json{{"ground_truth", gt_path}, {"recovered", rec_path}}, flags, timings,
                       {out_path});
    }
    return 0;
}

int cmd_gradcheck(int scenes, int probes, double tol, const std::string& csv_path,
                  const CommonFlags& flags) {
    GradCheckOptions opts;
    if (scenes > 0) opts.scenes = scenes;
    if (probes > 0) opts.probes_per_scene = probes;
    if (tol > 0) opts.tol = tol;
    if (flags.seed) opts.seed = flags.seed;
    GradCheckResult r = run_gradient_check(opts);
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        csv << "scene,max_rel_err\n";
        csv.precision(17);
        for (std::size_t i = 0; i < r.per_scene.size(); ++i)
            csv << i << ',' << r.per_scene[i] << "\n";
    }
    std::cout << "gradcheck: " << r.scenes << " scenes, " << r.probes
              << " probes, max rel err " << r.max_rel_err << ", empty-node max |grad| "
              << r.max_empty_err << ", " << r.elapsed_s << " s -> "
              << (r.pass ? "pass" : "FAIL") << "\n";
    return r.pass ? 0 : 5;
}

int cmd_densify(const std::string& points_path, const std::string& out_path,
                std::vector<double> bounds, int res, double jitter, const CommonFlags& flags) {
    std::vector<Vec3> pts = read_points_xyz(points_path);
    if (bounds.size() != 6)
        throw ValidationError("--bounds needs 6 numbers: min_x min_y min_z max_x max_y max_z");
    OccupancyGrid g = shell_voxelize(pts, {bounds[0], bounds[1], bounds[2]},
                                     {bounds[3], bounds[4], bounds[5]}, res, res, res);
    fill_interior(g);
    std::vector<Vec3> interior = sample_interior(g, flags.seed, jitter);
    write_points_xyz(interior, out_path);
    std::cout << "densify: " << pts.size() << " surface points -> " << count_cells(g, Voxel::Shell)
              << " shell voxels, " << interior.size() << " interior samples -> " << out_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wind-driven deformation: forward simulation and wind force recovery"};
    app.require_subcommand(1);

    CommonFlags flags;

    // simulate ---------------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "forward wind + deformation simulation");
    std::string sim_scene, sim_particles, sim_out = "out_sim", sim_forces;
    int sim_frames = 60;
    bool sim_no_wind = false, sim_save_wind = false, sim_save_frames = false;
    double frame_dt_override = 0.0;
    int substeps_override = 0;
    sim->add_option("--scene,--config", sim_scene, "scene json")->required();
    sim->add_option("--particles", sim_particles, "input particle snapshot (dwpt)")->required();
    sim->add_option("--out-dir", sim_out, "output directory");
    sim->add_option("--frames", sim_frames, "frames to simulate")->check(CLI::PositiveNumber);
    sim->add_option("--forces", sim_forces, "per-frame nodal force field (dwff) to apply");
    sim->add_flag("--no-wind", sim_no_wind, "skip the wind solver (stored forces only)");
    sim->add_flag("--save-wind", sim_save_wind, "dump the final wind field (dwgf)");
    sim->add_flag("--save-frames", sim_save_frames, "dump a particle snapshot per frame");
    sim->add_option("--frame-dt", frame_dt_override, "override scene frame_dt");
    sim->add_option("--substeps", substeps_override, "override scene substeps");
    flags.attach(sim);

    // reconstruct --------------------------------------------------------------
    auto* rec = app.add_subcommand("reconstruct", "recover per-frame wind forces from markers");
    std::string rec_scene, rec_particles, rec_obs, rec_out = "out_recon", rec_opt = "gd";
    double rec_lambda = 0.1, rec_adam_lr = 1e-3;
    int rec_iters = 0;
    rec->add_option("--scene,--config", rec_scene, "scene json")->required();
    rec->add_option("--particles", rec_particles, "initial particle snapshot (dwpt)")->required();
    rec->add_option("--obs", rec_obs, "marker observations csv")->required();
    rec->add_option("--out-dir", rec_out, "output directory");
    rec->add_option("--lambda-phys", rec_lambda, "weight of the direction prior (default 0.1)");
    rec->add_option("--max-iters", rec_iters, "optimizer iteration cap per frame");
    rec->add_option("--optimizer", rec_opt, "gd (line-search descent, default) or adam");
    rec->add_option("--adam-lr", rec_adam_lr, "adam step size in newtons");
    rec->add_option("--frame-dt", frame_dt_override, "override scene frame_dt");
    rec->add_option("--substeps", substeps_override, "override scene substeps");
    flags.attach(rec);

    // retarget -----------------------------------------------------------------
    auto* ret = app.add_subcommand("retarget", "replay stored forces on new particles");
    std::string ret_scene, ret_particles, ret_forces, ret_out = "out_retarget";
    ret->add_option("--scene,--config", ret_scene, "scene json")->required();
    ret->add_option("--particles", ret_particles, "particle snapshot (dwpt)")->required();
    ret->add_option("--forces", ret_forces, "force field (dwff)")->required();
    ret->add_option("--out-dir", ret_out, "output directory");
    ret->add_option("--frame-dt", frame_dt_override, "override scene frame_dt");
    ret->add_option("--substeps", substeps_override, "override scene substeps");
    flags.attach(ret);

    // eval -----------------------------------------------------------------
    auto* ev = app.add_subcommand("eval", "compare two force fields (cosine / nmse)");
    std::string ev_gt, ev_rec, ev_out;
    ev->add_option("--ground-truth", ev_gt, "reference force field (dwff)")->required();
    ev->add_option("--recovered", ev_rec, "recovered force field (dwff)")->required();
    ev->add_option("--out", ev_out, "write metrics json here");
    flags.attach(ev);

    // gradcheck -----------------------------------------------------------
    auto* gc = app.add_subcommand("gradcheck", "adjoint vs finite differences on random scenes");
    int gc_scenes = 0, gc_probes = 0;
    double gc_tol = 0.0;
    std::string gc_csv;
    gc->add_option("--scenes", gc_scenes, "number of random scenes (default 20)");
    gc->add_option("--probes", gc_probes, "force components probed per scene (default 60)");
    gc->add_option("--tol", gc_tol, "failure threshold on max rel error (default 1e-3)");
    gc->add_option("--csv", gc_csv, "write per-scene errors csv");
    flags.attach(gc);

    // densify ------------------------------------------------------------
    auto* dn = app.add_subcommand("densify", "fill a closed surface point cloud with samples");
    std::string dn_points, dn_out = "interior.xyz";
    std::vector<double> dn_bounds;
    int dn_res = 64;
    double dn_jitter = 0.25;
    dn->add_option("--points", dn_points, "surface points, one 'x y z' per line")->required();
    dn->add_option("--out", dn_out, "output interior points");
    dn->add_option("--bounds", dn_bounds, "min_x min_y min_z max_x max_y max_z")
        ->expected(6)
        ->required();
    dn->add_option("--res", dn_res, "voxel resolution per axis")->check(CLI::PositiveNumber);
    dn->add_option("--jitter", dn_jitter, "jitter fraction of a voxel, in [0, 0.5)");
    flags.attach(dn);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(sim_scene, sim_particles, sim_out, sim_frames, sim_forces,
                                sim_no_wind, sim_save_wind, sim_save_frames, frame_dt_override,
                                substeps_override, flags);
        if (rec->parsed())
            return cmd_reconstruct(rec_scene, rec_particles, rec_obs, rec_out, rec_lambda,
                                   rec_iters, rec_opt, rec_adam_lr, frame_dt_override,
                                   substeps_override, flags);
        if (ret->parsed())
            return cmd_retarget(ret_scene, ret_particles, ret_forces, ret_out, frame_dt_override,
                                substeps_override, flags);
        if (ev->parsed()) return cmd_eval(ev_gt, ev_rec, ev_out, flags);
        if (gc->parsed()) return cmd_gradcheck(gc_scenes, gc_probes, gc_tol, gc_csv, flags);
        if (dn->parsed())
            return cmd_densify(dn_points, dn_out, dn_bounds, dn_res, dn_jitter, flags);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SimulationError& e) {
        std::cerr << "instability: " << e.what() << "\n";
        return 3;
    } catch (const OptimizationError& e) {
        std::cerr << "optimization failed: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

// End-to-end checks of the command line binary: exit codes, artifacts, and a
// small simulate -> reconstruct -> eval loop. Runs WINDSIM_BIN via the shell.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "windsim/coupling.hpp"
#include "windsim/field_io.hpp"
#include "windsim/inverse.hpp"
#include "windsim/particles.hpp"
#include "windsim/scene.hpp"
#include "windsim/volume.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
using namespace windsim;

static int g_fails = 0;
static int g_checks = 0;

#define CHECK_MSG(cond, msg)                                             \
    do {                                                                 \
        ++g_checks;                                                      \
        if (!(cond)) {                                                   \
            ++g_fails;                                                   \
            std::cerr << "FAIL " << __LINE__ << ": " << (msg) << "\n";   \
        }                                                                \
    } while (0)

static int run(const std::string& args) {
    const std::string cmd = std::string(WINDSIM_BIN) + " " + args + " >> cli_work/log.txt 2>&1";
    int status = std::system(cmd.c_str());
#ifdef _WIN32
    return status;
#else
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
}

int main() {
    fs::remove_all("cli_work");
    fs::create_directories("cli_work");

    // --- fixtures -----------------------------------------------------------
    Scene scene = testing::cube_scene(12, 1.0, 1.0 / 60.0, 6, 2e4, 0.35, 300.0);
    save_scene(scene, "cli_work/scene.json");
    ParticleSet ps = testing::centered_block(scene, 3);
    write_particles(ps, "cli_work/block.dwpt");

    // Ground-truth force field: constant push around the block, two frames.
    ForceField gt;
    gt.dims = scene.grid;
    Vec3Grid push(scene.grid.size(), Vec3{});
    SolidMask region = dilate(voxelize(ps, scene), scene.grid);
    for (std::size_t n = 0; n < region.size(); ++n)
        if (region[n]) push[n] = {4e-3, 1e-3, -2e-3};
    gt.steps = {push, push};
    write_force_field(gt, "cli_work/gt.dwff");

    // --- simulate -----------------------------------------------------------
    CHECK_MSG(run("simulate --scene cli_work/scene.json --particles cli_work/block.dwpt"
                  " --out-dir cli_work/sim --frames 2 --save-wind") == 0,
              "calm simulate exits 0");
    CHECK_MSG(fs::exists("cli_work/sim/final.dwpt"), "final snapshot written");
    CHECK_MSG(fs::exists("cli_work/sim/diagnostics.csv"), "diagnostics written");
    CHECK_MSG(fs::exists("cli_work/sim/manifest.json"), "manifest written");
    {
        ObservationSequence obs = read_observations("cli_work/sim/markers.csv");
        CHECK_MSG(obs.frames.size() == 2, "two observation frames");
        CHECK_MSG(obs.marker_ids.size() == ps.size(), "all particles observed");
        GridDump wind = read_grid_dump("cli_work/sim/wind_final.dwgf");
        CHECK_MSG(wind.channels.size() == 11, "wind dump has 11 channels");
        nlohmann::json man;
        std::ifstream("cli_work/sim/manifest.json") >> man;
        CHECK_MSG(man["command"] == "simulate", "manifest names the command");
        CHECK_MSG(man.contains("timings_s"), "manifest carries timings");
    }

    // --- simulate with stored forces (marker motion for the inverse loop) ---
    CHECK_MSG(run("simulate --scene cli_work/scene.json --particles cli_work/block.dwpt"
                  " --out-dir cli_work/sim_forced --frames 2 --forces cli_work/gt.dwff"
                  " --no-wind") == 0,
              "forced simulate exits 0");
    {
        ObservationSequence a = read_observations("cli_work/sim/markers.csv");
        ObservationSequence b = read_observations("cli_work/sim_forced/markers.csv");
        double moved = 0.0;
        for (std::size_t m = 0; m < a.marker_ids.size(); ++m)
            moved = std::max(moved, norm(a.frames[1][m] - b.frames[1][m]));
        CHECK_MSG(moved > 1e-7, "stored forces actually move the markers");
    }

    // --- reconstruct + eval ---------------------------------------------------
    CHECK_MSG(run("reconstruct --scene cli_work/scene.json --particles cli_work/block.dwpt"
                  " --obs cli_work/sim_forced/markers.csv --out-dir cli_work/rec"
                  " --max-iters 150") == 0,
              "reconstruct exits 0");
    CHECK_MSG(fs::exists("cli_work/rec/recovered.dwff"), "recovered force field written");
    CHECK_MSG(fs::exists("cli_work/rec/recon_frames.csv"), "per-frame stats written");
    {
        nlohmann::json rep;
        std::ifstream("cli_work/rec/recon_report.json") >> rep;
        CHECK_MSG(rep["frames"].size() == 2, "report covers both frames");
        const double rmse = rep["frames"][1]["marker_rmse"];
        CHECK_MSG(rmse < 1e-5, "second frame marker rmse small, got " + std::to_string(rmse));
    }
    CHECK_MSG(run("eval --ground-truth cli_work/gt.dwff --recovered cli_work/rec/recovered.dwff"
                  " --out cli_work/metrics.json") == 0,
              "eval exits 0");
    {
        nlohmann::json met;
        std::ifstream("cli_work/metrics.json") >> met;
        const double cos_sim = met["cos_sim"];
        CHECK_MSG(cos_sim > 0.5, "recovered field points the right way, cos=" +
                                     std::to_string(cos_sim));
        CHECK_MSG(met["support"].get<int>() > 0, "support reported");
    }

    // --- retarget -------------------------------------------------------------
    CHECK_MSG(run("retarget --scene cli_work/scene.json --particles cli_work/block.dwpt"
                  " --forces cli_work/rec/recovered.dwff --out-dir cli_work/ret") == 0,
              "retarget exits 0");
    CHECK_MSG(fs::exists("cli_work/ret/markers.csv"), "retarget writes marker trajectories");

    // --- gradcheck --------------------------------------------------------------
    CHECK_MSG(run("gradcheck --scenes 2 --probes 10 --seed 5") == 0, "gradcheck passes");
    CHECK_MSG(run("gradcheck --scenes 1 --probes 5 --tol 1e-16") == 5,
              "unreachable tolerance exits 5");

    // --- densify ----------------------------------------------------------------
    {
        std::vector<Vec3> pts;
        const double lo = 1.5 / 14.0, hi = 12.5 / 14.0;
        const int samples = 60;
        const double step = (hi - lo) / (samples - 1);
        for (int a = 0; a < samples; ++a)
            for (int b = 0; b < samples; ++b) {
                const double u = lo + a * step, v = lo + b * step;
                pts.push_back({lo, u, v});
                pts.push_back({hi, u, v});
                pts.push_back({u, lo, v});
                pts.push_back({u, hi, v});
                pts.push_back({u, v, lo});
                pts.push_back({u, v, hi});
            }
        write_points_xyz(pts, "cli_work/shell.xyz");
    }
    CHECK_MSG(run("densify --points cli_work/shell.xyz --out cli_work/interior.xyz"
                  " --bounds 0 0 0 1 1 1 --res 14 --seed 3") == 0,
              "densify exits 0");
    CHECK_MSG(read_points_xyz("cli_work/interior.xyz").size() == 1000,
              "hollow cube densifies to exactly 1000 interior samples");

    // --- failure modes ------------------------------------------------------------
    CHECK_MSG(run("simulate --scene cli_work/missing.json --particles cli_work/block.dwpt"
                  " --out-dir cli_work/x") == 2,
              "missing scene exits 2");
    {
        std::ofstream bad("cli_work/bad.dwpt", std::ios::binary);
        bad << "NOPE";
    }
    CHECK_MSG(run("simulate --scene cli_work/scene.json --particles cli_work/bad.dwpt"
                  " --out-dir cli_work/x") == 2,
              "corrupt snapshot exits 2");
    {
        std::string text = scene_to_json(scene);
        text.insert(text.find('{') + 1, "\"mystery\": 1,");
        std::ofstream("cli_work/bad_scene.json") << text;
    }
    CHECK_MSG(run("simulate --scene cli_work/bad_scene.json --particles cli_work/block.dwpt"
                  " --out-dir cli_work/x") == 2,
              "unknown scene key exits 2");
    {
        ForceField wild = gt;
        for (auto& f : wild.steps[0])
            f = {1e9, 0.0, 0.0};
        write_force_field(wild, "cli_work/wild.dwff");
    }
    CHECK_MSG(run("simulate --scene cli_work/scene.json --particles cli_work/block.dwpt"
                  " --out-dir cli_work/x --frames 2 --forces cli_work/wild.dwff --no-wind") == 3,
              "blow-up exits 3");
    CHECK_MSG(run("eval --ground-truth cli_work/gt.dwff --recovered cli_work/missing.dwff") == 2,
              "missing eval input exits 2");
    {
        ForceField small;
        small.dims = {4, 4, 4};
        small.steps = {Vec3Grid(64, Vec3{1.0, 0.0, 0.0})};
        write_force_field(small, "cli_work/small.dwff");
    }
    CHECK_MSG(run("simulate --scene cli_work/scene.json --particles cli_work/block.dwpt"
                  " --out-dir cli_work/x --forces cli_work/small.dwff") == 2,
              "force field grid mismatch exits 2");

    std::cout << (g_fails == 0 ? "cli tests passed" : "cli tests FAILED") << " ("
              << g_checks - g_fails << "/" << g_checks << " checks)\n";
    return g_fails == 0 ? 0 : 1;
}

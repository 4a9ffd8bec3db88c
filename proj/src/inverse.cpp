#include "windsim/inverse.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "windsim/errors.hpp"

namespace windsim {

// ---------------------------------------------------------------------------
// observations

std::vector<int> marker_indices(const ParticleSet& ps) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < ps.size(); ++i)
        if (ps[i].is_marker) ids.push_back(static_cast<int>(i));
    return ids;
}

std::vector<Vec3> marker_positions(const ParticleSet& ps, const std::vector<int>& ids) {
    std::vector<Vec3> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(ps[id].x);
    return out;
}

void write_observations(const ObservationSequence& obs, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write observations: " + path);
    os << "frame,marker,x,y,z\n";
    os.precision(17);
    for (std::size_t t = 0; t < obs.frames.size(); ++t) {
        if (obs.frames[t].size() != obs.marker_ids.size())
            throw ValidationError("observation frame " + std::to_string(t) +
                                  " has the wrong marker count");
        for (std::size_t m = 0; m < obs.marker_ids.size(); ++m) {
            const Vec3& x = obs.frames[t][m];
            os << t << ',' << obs.marker_ids[m] << ',' << x.x << ',' << x.y << ',' << x.z << '\n';
        }
    }
}

ObservationSequence read_observations(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open observations: " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("frame,marker", 0) != 0)
        throw IoError("observations csv: missing 'frame,marker,x,y,z' header");
    ObservationSequence obs;
    int last_frame = -1;
    std::size_t row_in_frame = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        double vals[5];
        for (int i = 0; i < 5; ++i) {
            if (!std::getline(ss, tok, ','))
                throw IoError("observations csv: short row '" + line + "'");
            vals[i] = std::stod(tok);
        }
        int frame = static_cast<int>(vals[0]);
        int marker = static_cast<int>(vals[1]);
        if (frame != last_frame) {
            if (frame != last_frame + 1)
                throw IoError("observations csv: frames must be consecutive from 0");
            if (last_frame >= 0 && row_in_frame != obs.marker_ids.size())
                throw IoError("observations csv: inconsistent marker count per frame");
            obs.frames.emplace_back();
            last_frame = frame;
            row_in_frame = 0;
        }
        if (frame == 0) {
            obs.marker_ids.push_back(marker);
        } else {
            if (row_in_frame >= obs.marker_ids.size() ||
                obs.marker_ids[row_in_frame] != marker)
                throw IoError("observations csv: marker order differs between frames");
        }
        obs.frames.back().push_back({vals[2], vals[3], vals[4]});
        ++row_in_frame;
    }
    if (obs.frames.empty()) throw IoError("observations csv: no data rows");
    if (row_in_frame != obs.marker_ids.size())
        throw IoError("observations csv: truncated final frame");
    return obs;
}

// ---------------------------------------------------------------------------
// force field container

static_assert(std::endian::native == std::endian::little,
              "force field io assumes a little-endian host");

void write_force_field(const ForceField& ff, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write force field: " + path);
    os.write("DWFF", 4);
    std::uint32_t v = kForceFieldVersion, t = static_cast<std::uint32_t>(ff.steps.size());
    std::uint32_t d[3] = {static_cast<std::uint32_t>(ff.dims.nx),
                          static_cast<std::uint32_t>(ff.dims.ny),
                          static_cast<std::uint32_t>(ff.dims.nz)};
    os.write(reinterpret_cast<const char*>(&v), 4);
    os.write(reinterpret_cast<const char*>(&t), 4);
    os.write(reinterpret_cast<const char*>(d), 12);
    for (const auto& step : ff.steps) {
        if (step.size() != ff.dims.size())
            throw ValidationError("force field step size does not match dims");
        os.write(reinterpret_cast<const char*>(step.data()),
                 static_cast<std::streamsize>(step.size() * sizeof(Vec3)));
    }
    if (!os) throw IoError("short write on force field: " + path);
}

ForceField read_force_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open force field: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "DWFF", 4) != 0)
        throw IoError("not a force field file (bad magic): " + path);
    std::uint32_t v, t, d[3];
    is.read(reinterpret_cast<char*>(&v), 4);
    is.read(reinterpret_cast<char*>(&t), 4);
    is.read(reinterpret_cast<char*>(d), 12);
    if (v != kForceFieldVersion)
        throw IoError("unsupported force field version " + std::to_string(v));
    ForceField ff;
    ff.dims = {static_cast<int>(d[0]), static_cast<int>(d[1]), static_cast<int>(d[2])};
    ff.steps.resize(t);
    for (auto& step : ff.steps) {
        step.resize(ff.dims.size());
        is.read(reinterpret_cast<char*>(step.data()),
                static_cast<std::streamsize>(step.size() * sizeof(Vec3)));
        if (!is) throw IoError("truncated force field: " + path);
    }
    return ff;
}

// ---------------------------------------------------------------------------
// losses

double observation_loss(const ParticleSet& ps, const std::vector<int>& marker_ids,
                        const std::vector<Vec3>& target) {
    if (marker_ids.size() != target.size() || marker_ids.empty())
        throw ValidationError("observation loss: marker/target size mismatch or empty");
    double s = 0.0;
    for (std::size_t m = 0; m < marker_ids.size(); ++m)
        s += norm2(ps[marker_ids[m]].x - target[m]);
    return s / static_cast<double>(marker_ids.size());
}

std::vector<Vec3> observation_loss_grad(const ParticleSet& ps, const std::vector<int>& marker_ids,
                                        const std::vector<Vec3>& target) {
    std::vector<Vec3> g(ps.size(), Vec3{});
    const double scale = 2.0 / static_cast<double>(marker_ids.size());
    for (std::size_t m = 0; m < marker_ids.size(); ++m)
        g[marker_ids[m]] = scale * (ps[marker_ids[m]].x - target[m]);
    return g;
}

double physics_loss(const Vec3Grid& force, const GuideField& guide) {
    if (force.size() != guide.has_dir.size())
        throw ValidationError("physics loss: force/guide size mismatch");
    double s = 0.0;
    for (std::size_t n = 0; n < force.size(); ++n) {
        if (!guide.has_dir[n]) continue;
        const Vec3 perp = force[n] - dot(force[n], guide.dir[n]) * guide.dir[n];
        s += norm2(perp);
    }
    return s;
}

void physics_loss_grad(const Vec3Grid& force, const GuideField& guide, double scale,
                       Vec3Grid& grad) {
    for (std::size_t n = 0; n < force.size(); ++n) {
        if (!guide.has_dir[n]) continue;
        const Vec3 perp = force[n] - dot(force[n], guide.dir[n]) * guide.dir[n];
        grad[n] += (2.0 * scale) * perp;
    }
}

// ---------------------------------------------------------------------------
// per-frame recovery

namespace {

double dot_grid(const Vec3Grid& a, const Vec3Grid& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += dot(a[i], b[i]);
    return s;
}

struct WindowEval {
    double loss_obs, loss_phys, total;
};

WindowEval eval_window(const ParticleSet& state, const Vec3Grid& force,
                       const std::vector<Vec3>& target, const std::vector<int>& marker_ids,
                       const GuideField& guide, const Scene& scene, double lambda) {
    ParticleSet ps = state;
    MpmGrid grid;
    for (int s = 0; s < scene.substeps; ++s) mpm_step(ps, grid, &force, scene, scene.dt_sub());
    WindowEval e;
    e.loss_obs = observation_loss(ps, marker_ids, target);
    e.loss_phys = physics_loss(force, guide);
    e.total = e.loss_obs + lambda * e.loss_phys;
    return e;
}

}  // namespace

StepResult reconstruct_step(const ParticleSet& state, const std::vector<Vec3>& target,
                            const std::vector<int>& marker_ids, const GuideField& guide,
                            const Scene& scene, const ReconOpts& opts) {
    const std::size_t nn = scene.grid.size();
    const double lambda = opts.lambda_phys;

    auto gradient = [&](const Vec3Grid& force, WindowEval& ev) {
        Tape tape = forward_record(state, &force, scene, scene.substeps);
        const ParticleSet& end = final_state(tape);
        ev.loss_obs = observation_loss(end, marker_ids, target);
        ev.loss_phys = physics_loss(force, guide);
        ev.total = ev.loss_obs + lambda * ev.loss_phys;
        std::vector<Vec3> dL_dx = observation_loss_grad(end, marker_ids, target);
        std::vector<Vec3> dL_dv(end.size(), Vec3{});
        Vec3Grid g = backward(tape, dL_dx, dL_dv);
        physics_loss_grad(force, guide, lambda, g);
        return g;
    };

    StepResult res;
    res.force.assign(nn, Vec3{});

    Vec3Grid force(nn, Vec3{});
    WindowEval ev{};
    Vec3Grid g = gradient(force, ev);
    double best = ev.total;
    res.trace.push_back({0, ev.loss_obs, ev.loss_phys, ev.total, 0.0});

    if (opts.optimizer == ReconOpts::Optimizer::Adam) {
        Vec3Grid m(nn, Vec3{}), v(nn, Vec3{});
        Vec3Grid best_force = force;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-12;
        for (int it = 1; it <= opts.max_iters; ++it) {
            if (best < opts.loss_floor) break;
            for (std::size_t n = 0; n < nn; ++n)
                for (int a = 0; a < 3; ++a) {
                    m[n][a] = b1 * m[n][a] + (1 - b1) * g[n][a];
                    v[n][a] = b2 * v[n][a] + (1 - b2) * g[n][a] * g[n][a];
                    double mh = m[n][a] / (1 - std::pow(b1, it));
                    double vh = v[n][a] / (1 - std::pow(b2, it));
                    force[n][a] -= opts.adam_lr * mh / (std::sqrt(vh) + eps);
                }
            double prev = ev.total;
            g = gradient(force, ev);
            res.trace.push_back({it, ev.loss_obs, ev.loss_phys, ev.total, opts.adam_lr});
            if (ev.total < best) {
                best = ev.total;
                best_force = force;
            }
            res.iters = it;
            if (std::abs(prev - ev.total) < opts.rel_tol * std::max(prev, 1e-300)) break;
        }
        force = best_force;
    } else {
        // Gradient descent: Barzilai-Borwein trial step, halving line search,
        // monotone accepted losses. A zero gradient (already stationary, e.g.
        // perfect observations) skips the loop and keeps the zero force.
        Vec3Grid prev_force = force, prev_g = g;
        double g2 = dot_grid(g, g);
        double alpha = g2 > 0.0 ? best / g2 : 0.0;  // first trial: linear-model zero
        bool first = true;
        for (int it = 1; g2 > 0.0 && it <= opts.max_iters; ++it) {
            if (best < opts.loss_floor) break;
            if (!first) {
                // BB1 step from the last accepted move.
                Vec3Grid dx(nn), dg(nn);
                for (std::size_t n = 0; n < nn; ++n) {
                    dx[n] = force[n] - prev_force[n];
                    dg[n] = g[n] - prev_g[n];
                }
                double sy = dot_grid(dx, dg), yy = dot_grid(dg, dg);
                if (sy > 0 && yy > 0 && std::isfinite(sy / yy)) alpha = sy / yy;
            }
            // Backtrack until the total loss decreases.
            Vec3Grid cand(nn);
            WindowEval cev{};
            bool accepted = false;
            for (int bt = 0; bt < 60; ++bt) {
                for (std::size_t n = 0; n < nn; ++n) cand[n] = force[n] - alpha * g[n];
                cev = eval_window(state, cand, target, marker_ids, guide, scene, lambda);
                if (std::isfinite(cev.total) && cev.total < best) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                if (first)
                    throw OptimizationError(
                        "line search found no descent direction on the first iteration");
                break;  // converged to line-search resolution
            }
            prev_force.swap(force);
            force = cand;
            prev_g.swap(g);
            double prev_best = best;
            best = cev.total;
            ev = cev;
            g = gradient(force, ev);  // refresh gradient (and ev) at the new point
            res.trace.push_back({it, ev.loss_obs, ev.loss_phys, ev.total, alpha});
            res.iters = it;
            first = false;
            if (prev_best - best < opts.rel_tol * std::max(prev_best, 1e-300)) break;
        }
    }

    res.force = force;
    ParticleSet end = state;
    MpmGrid grid;
    for (int s = 0; s < scene.substeps; ++s) mpm_step(end, grid, &force, scene, scene.dt_sub());
    res.end_state = end;
    res.loss_obs = observation_loss(end, marker_ids, target);
    res.loss_phys = physics_loss(force, guide);
    res.marker_rmse = std::sqrt(res.loss_obs);
    return res;
}

ReconResult reconstruct_sequence(const ParticleSet& start, const ObservationSequence& obs,
                                 const Scene& scene, const ReconOpts& opts) {
    for (int id : obs.marker_ids)
        if (id < 0 || static_cast<std::size_t>(id) >= start.size())
            throw ValidationError("observation marker id " + std::to_string(id) +
                                  " is out of range");
    ReconResult out;
    out.force.dims = scene.grid;
    ParticleSet state = start;

    LbmField wind;
    init_field(wind, scene.grid, 1.0);

    for (std::size_t t = 0; t < obs.frames.size(); ++t) {
        // Advance the wind field across this frame with the object frozen at
        // the frame-start pose, then read the direction prior from it.
        SolidMask mask = voxelize(state, scene);
        for (int s = 0; s < scene.substeps; ++s) lbm_step(wind, nullptr, &mask, scene);
        GuideField guide = guide_from_field(wind, scene);

        StepResult sr =
            reconstruct_step(state, obs.frames[t], obs.marker_ids, guide, scene, opts);
        out.force.steps.push_back(sr.force);
        out.frames.push_back({static_cast<int>(t), sr.iters, sr.loss_obs, sr.loss_phys,
                              sr.marker_rmse});
        state = sr.end_state;
    }
    out.end_state = state;
    return out;
}

std::vector<ParticleSet> retarget(const ForceField& ff, const ParticleSet& start,
                                  const Scene& scene) {
    if (!(ff.dims == scene.grid))
        throw ValidationError("retarget: force field dims do not match the scene grid");
    std::vector<ParticleSet> frames;
    ParticleSet state = start;
    MpmGrid grid;
    for (const auto& force : ff.steps) {
        for (int s = 0; s < scene.substeps; ++s)
            mpm_step(state, grid, &force, scene, scene.dt_sub());
        frames.push_back(state);
    }
    return frames;
}

EvalResult eval_metrics(const ForceField& ground_truth, const ForceField& recovered) {
    if (!(ground_truth.dims == recovered.dims) ||
        ground_truth.steps.size() != recovered.steps.size())
        throw ValidationError("eval: force fields have different shapes");
    constexpr double kSupportEps = 1e-12;  // newtons
    KahanSum cos_sum, nmse_sum;
    std::size_t support = 0;
    for (std::size_t t = 0; t < ground_truth.steps.size(); ++t) {
        const Vec3Grid& a = ground_truth.steps[t];
        const Vec3Grid& b = recovered.steps[t];
        for (std::size_t n = 0; n < a.size(); ++n) {
            double na = norm(a[n]), nb = norm(b[n]);
            if (na <= kSupportEps || nb <= kSupportEps) continue;
            Vec3 ua = a[n] / na, ub = b[n] / nb;
            cos_sum.add(dot(ua, ub));
            nmse_sum.add(norm2(ua - ub));
            ++support;
        }
    }
    if (support == 0)
        throw ValidationError("eval: no node carries force in both fields (empty support)");
    EvalResult r;
    r.cos_sim = cos_sum.get() / static_cast<double>(support);
    r.nmse = nmse_sum.get() / static_cast<double>(support);
    r.support = support;
    return r;
}

}  // namespace windsim

#pragma once
// Randomized validation of the adjoint force gradient against central
// differences on small scenes. Shared by the gradcheck command and the
// acceptance suite.

#include <cstdint>
#include <vector>

namespace windsim {

struct GradCheckOptions {
    int scenes = 20;
    int probes_per_scene = 60;  // sampled force components per scene
    std::uint64_t seed = 42;
    double h_scale = 1e-5;      // FD step = h_scale * max(1 N, |component|)
    double tol = 1e-3;          // failure threshold for the CLI command
};

struct GradCheckResult {
    int scenes = 0;
    std::size_t probes = 0;
    double max_rel_err = 0.0;        // worst sampled relative component error
    double max_empty_err = 0.0;      // worst |gradient| seen at empty nodes (want 0)
    std::vector<double> per_scene;   // max rel err per scene
    double elapsed_s = 0.0;
    bool pass = false;               // max_rel_err < tol and empty grads exactly zero
};

GradCheckResult run_gradient_check(const GradCheckOptions& opts);

}  // namespace windsim

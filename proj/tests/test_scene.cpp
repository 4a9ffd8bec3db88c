#include <doctest.h>

#include <cmath>
#include <vector>

#include "windsim/errors.hpp"
#include "windsim/scene.hpp"
#include "test_helpers.hpp"

using namespace windsim;

TEST_CASE("lame parameters from E and poisson ratio") {
    double mu = 0.0, lambda = 0.0;
    // Hand-computed references: mu = E/(2(1+nu)), lambda = E nu/((1+nu)(1-2nu)).
    lame_from_young(4e5, 0.3, mu, lambda);
    CHECK(mu == doctest::Approx(153846.15384615384).epsilon(1e-12));
    CHECK(lambda == doctest::Approx(230769.23076923078).epsilon(1e-12));

    lame_from_young(4e4, 0.4, mu, lambda);
    CHECK(mu == doctest::Approx(14285.714285714286).epsilon(1e-12));
    CHECK(lambda == doctest::Approx(57142.857142857145).epsilon(1e-12));
}

TEST_CASE("validate fills derived quantities") {
    Scene s = testing::cube_scene(16);
    CHECK(s.dx == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
    CHECK(s.materials[0].mu == doctest::Approx(14285.714285714286).epsilon(1e-12));
    CHECK(s.materials[0].lambda == doctest::Approx(57142.857142857145).epsilon(1e-12));
    CHECK(s.dt_sub() == doctest::Approx(1.0 / 600.0).epsilon(1e-15));
    // Lattice viscosity nu dt/dx^2 and tau = 3 nu_lat + 1/2.
    const double nu_lat = 1.5e-5 * s.dt_sub() / (s.dx * s.dx);
    CHECK(s.tau() == doctest::Approx(3.0 * nu_lat + 0.5).epsilon(1e-15));
    CHECK(s.vel_to_si(s.vel_to_lattice(3.7)) == doctest::Approx(3.7).epsilon(1e-15));
}

TEST_CASE("validate rejects bad scenes with every violation listed") {
    Scene s;
    s.domain_min = {0, 0, 0};
    s.domain_max = {1, 1, 1};
    s.grid = {16, 16, 16};
    Material m;
    m.id = 0;
    m.youngs_modulus = -1.0;  // bad
    m.poisson_ratio = 0.5;    // bad (division by zero in lambda)
    m.density = 100.0;
    s.materials = {m};
    s.fluid.nu = 0.0;         // bad: tau degenerates to 1/2
    try {
        validate_scene(s);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        // Messages name the scene-file keys so users can fix the json.
        const std::string msg = e.what();
        CHECK(msg.find("E must be > 0") != std::string::npos);
        CHECK(msg.find("nu_p must be in (0, 0.5)") != std::string::npos);
    }
}

TEST_CASE("validate rejects non-cubic cells and missing materials") {
    Scene s;
    s.domain_max = {1.0, 2.0, 1.0};  // dx mismatch across axes
    s.grid = {8, 8, 8};
    CHECK_THROWS_AS(validate_scene(s), ValidationError);

    Scene t = testing::cube_scene(8);
    t.materials.clear();
    CHECK_THROWS_AS(validate_scene(t), ValidationError);
}

TEST_CASE("validate rejects unpaired periodic faces") {
    Scene s = testing::cube_scene(8);
    s.fluid.face_bc = {FaceBc::Periodic, FaceBc::Wall, FaceBc::Wall,
                       FaceBc::Wall,     FaceBc::Wall, FaceBc::Wall};
    CHECK_THROWS_AS(validate_scene(s), ValidationError);
}

TEST_CASE("validate rejects inlet speeds outside the low-mach regime") {
    Scene s = testing::cube_scene(8);
    s.fluid.face_bc = {FaceBc::Inlet, FaceBc::Outlet, FaceBc::Wall,
                       FaceBc::Wall,  FaceBc::Wall,   FaceBc::Wall};
    s.fluid.inlet_speed = 0.35 * s.dx / s.dt_lbm();  // 0.35 lattice units
    CHECK_THROWS_AS(validate_scene(s), ValidationError);

    // 0.15 lattice units: legal but warned about.
    s.fluid.inlet_speed = 0.15 * s.dx / s.dt_lbm();
    std::vector<std::string> warnings;
    validate_scene(s, &warnings);
    CHECK(!warnings.empty());
}

TEST_CASE("marginal relaxation time warns, degenerate errors") {
    Scene s = testing::cube_scene(8);
    // tau < 0.51 <=> nu_lat < 1/300.
    s.fluid.nu = 0.002 * s.dx * s.dx / s.dt_lbm();
    std::vector<std::string> warnings;
    validate_scene(s, &warnings);
    bool tau_warned = false;
    for (const auto& w : warnings) tau_warned = tau_warned || w.find("tau") != std::string::npos;
    CHECK(tau_warned);

    s.fluid.nu = -1.0;
    CHECK_THROWS_AS(validate_scene(s), ValidationError);
}

TEST_CASE("json parse is strict about unknown keys") {
    Scene base = testing::cube_scene(8);
    std::string text = scene_to_json(base);
    Scene back = parse_scene_json(text);
    CHECK(back.grid.nx == 8);

    // Top-level stranger.
    std::string bad = text;
    bad.insert(bad.find('{') + 1, "\"extra_knob\": 1,");
    try {
        parse_scene_json(bad);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("extra_knob") != std::string::npos);
    }
}

TEST_CASE("json round trip is exact") {
    Scene s = testing::cube_scene(12, 0.75, 1.0 / 48.0, 7, 3.3e5, 0.31, 417.0);
    s.gravity = {0.0, -9.80665, 0.0};
    s.walls = {WallTag::Slip, WallTag::Open, WallTag::Sticky,
               WallTag::Sticky, WallTag::Open, WallTag::Slip};
    s.fluid.face_bc = {FaceBc::Inlet, FaceBc::Outlet, FaceBc::Wall,
                       FaceBc::Wall,  FaceBc::Wall,   FaceBc::Wall};
    s.fluid.inlet_speed = 1.0 / 3.0;
    s.fluid.inlet_dir = {1.0, 0.0, 0.0};
    s.fluid.nu = 0.0823;  // keeps tau comfortable at this resolution
    validate_scene(s);

    const std::string once = scene_to_json(s);
    Scene back = parse_scene_json(once);
    // Serialisation must preserve doubles bit-for-bit (hex float round trip).
    CHECK(scene_to_json(back) == once);
    CHECK(back.fluid.inlet_speed == s.fluid.inlet_speed);
    CHECK(back.walls == s.walls);
    CHECK(back.fluid.face_bc == s.fluid.face_bc);
    CHECK(back.materials[0].density == 417.0);
}

TEST_CASE("schema version is enforced") {
    Scene s = testing::cube_scene(8);
    std::string text = scene_to_json(s);
    const auto pos = text.find("\"schema\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 11, "\"schema\": 2");
    CHECK_THROWS_AS(parse_scene_json(text), ValidationError);
}

TEST_CASE("material lookup by id") {
    Scene s = testing::cube_scene(8);
    CHECK(s.material(0).id == 0);
    CHECK_THROWS_AS(s.material(3), ValidationError);
}

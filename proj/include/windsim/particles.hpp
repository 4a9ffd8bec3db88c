#pragma once
// Particle state and its binary snapshot format.
//
// Snapshot layout (little-endian):
//   magic "DWPT" | version u32 | count u64
//   per particle: x[3] f64, v[3] f64, mass f64, volume0 f64,
//                 C[9] f64 row-major, F[9] f64 row-major,
//                 material_id u32, flags u32 (bit0 = marker, bit1 = internal)

#include <cstdint>
#include <string>
#include <vector>

#include "windsim/math.hpp"
#include "windsim/scene.hpp"

namespace windsim {

struct Particle {
    Vec3 x;                      // position, m
    Vec3 v;                      // velocity, m/s
    double mass = 0.0;           // kg
    double volume0 = 0.0;        // rest volume, m^3
    Mat3 C;                      // affine velocity field, 1/s
    Mat3 F = Mat3::identity();   // deformation gradient
    int material_id = 0;
    bool is_marker = false;      // participates in observation supervision
    bool is_internal = false;    // interior sample (from volume densification)
};

using ParticleSet = std::vector<Particle>;

constexpr std::uint32_t kSnapshotVersion = 1;

void write_particles(const ParticleSet& ps, const std::string& path);
ParticleSet read_particles(const std::string& path);

// Axis-aligned block of particles on a regular spacing, a common test/demo
// object. Positions run over center +- half_extent at `spacing`; every
// particle gets mass = density * spacing^3 and volume0 = spacing^3.
ParticleSet make_block(const Vec3& center, const Vec3& half_extent, double spacing,
                       const Material& mat, bool markers = true);

Vec3 centroid(const ParticleSet& ps);

}  // namespace windsim

#include "windsim/particles.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "windsim/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot io assumes a little-endian host");

namespace windsim {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
double get_f64(std::istream& is) {
    double v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

}  // namespace

void write_particles(const ParticleSet& ps, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write particle snapshot: " + path);
    os.write("DWPT", 4);
    put_u32(os, kSnapshotVersion);
    put_u64(os, ps.size());
    for (const auto& p : ps) {
        put_f64(os, p.x.x); put_f64(os, p.x.y); put_f64(os, p.x.z);
        put_f64(os, p.v.x); put_f64(os, p.v.y); put_f64(os, p.v.z);
        put_f64(os, p.mass);
        put_f64(os, p.volume0);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) put_f64(os, p.C[r][c]);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) put_f64(os, p.F[r][c]);
        put_u32(os, static_cast<std::uint32_t>(p.material_id));
        std::uint32_t flags = (p.is_marker ? 1u : 0u) | (p.is_internal ? 2u : 0u);
        put_u32(os, flags);
    }
    if (!os) throw IoError("short write on particle snapshot: " + path);
}

ParticleSet read_particles(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open particle snapshot: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "DWPT", 4) != 0)
        throw IoError("not a particle snapshot (bad magic): " + path);
    std::uint32_t version = get_u32(is);
    if (version != kSnapshotVersion)
        throw IoError("unsupported particle snapshot version " + std::to_string(version));
    std::uint64_t count = get_u64(is);
    ParticleSet ps;
    ps.reserve(count);
    for (std::uint64_t n = 0; n < count; ++n) {
        Particle p;
        p.x = {get_f64(is), get_f64(is), get_f64(is)};
        p.v = {get_f64(is), get_f64(is), get_f64(is)};
        p.mass = get_f64(is);
        p.volume0 = get_f64(is);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) p.C[r][c] = get_f64(is);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) p.F[r][c] = get_f64(is);
        p.material_id = static_cast<int>(get_u32(is));
        std::uint32_t flags = get_u32(is);
        p.is_marker = (flags & 1u) != 0;
        p.is_internal = (flags & 2u) != 0;
        if (!is) throw IoError("truncated particle snapshot: " + path);
        ps.push_back(p);
    }
    return ps;
}

ParticleSet make_block(const Vec3& center, const Vec3& half_extent, double spacing,
                       const Material& mat, bool markers) {
    ParticleSet ps;
    int nx = std::max(1, static_cast<int>(std::round(2.0 * half_extent.x / spacing)));
    int ny = std::max(1, static_cast<int>(std::round(2.0 * half_extent.y / spacing)));
    int nz = std::max(1, static_cast<int>(std::round(2.0 * half_extent.z / spacing)));
    Vec3 origin = center - 0.5 * spacing * Vec3{double(nx - 1), double(ny - 1), double(nz - 1)};
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                Particle p;
                p.x = origin + spacing * Vec3{double(i), double(j), double(k)};
                p.volume0 = spacing * spacing * spacing;
                p.mass = mat.density * p.volume0;
                p.material_id = mat.id;
                p.is_marker = markers;
                ps.push_back(p);
            }
    return ps;
}

Vec3 centroid(const ParticleSet& ps) {
    Vec3 c;
    for (const auto& p : ps) c += p.x;
    return ps.empty() ? c : c / double(ps.size());
}

}  // namespace windsim

#include "windsim/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "windsim/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "grid dump io assumes a little-endian host");

namespace windsim {

void write_grid_dump(const GridDump& dump, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write grid dump: " + path);
    os.write("DWGF", 4);
    std::uint32_t v = kGridDumpVersion;
    std::uint32_t d[3] = {static_cast<std::uint32_t>(dump.dims.nx),
                          static_cast<std::uint32_t>(dump.dims.ny),
                          static_cast<std::uint32_t>(dump.dims.nz)};
    std::uint32_t nc = static_cast<std::uint32_t>(dump.channels.size());
    os.write(reinterpret_cast<const char*>(&v), 4);
    os.write(reinterpret_cast<const char*>(d), 12);
    os.write(reinterpret_cast<const char*>(&nc), 4);
    for (const auto& [name, _] : dump.channels) {
        std::uint32_t len = static_cast<std::uint32_t>(name.size());
        os.write(reinterpret_cast<const char*>(&len), 4);
        os.write(name.data(), len);
    }
    for (const auto& [name, values] : dump.channels) {
        if (values.size() != dump.dims.size())
            throw ValidationError("grid dump channel '" + name + "' has the wrong size");
        os.write(reinterpret_cast<const char*>(values.data()),
                 static_cast<std::streamsize>(values.size() * sizeof(double)));
    }
    if (!os) throw IoError("short write on grid dump: " + path);
}

GridDump read_grid_dump(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open grid dump: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "DWGF", 4) != 0)
        throw IoError("not a grid dump (bad magic): " + path);
    std::uint32_t v, d[3], nc;
    is.read(reinterpret_cast<char*>(&v), 4);
    is.read(reinterpret_cast<char*>(d), 12);
    is.read(reinterpret_cast<char*>(&nc), 4);
    if (v != kGridDumpVersion)
        throw IoError("unsupported grid dump version " + std::to_string(v));
    GridDump dump;
    dump.dims = {static_cast<int>(d[0]), static_cast<int>(d[1]), static_cast<int>(d[2])};
    dump.channels.resize(nc);
    for (auto& [name, _] : dump.channels) {
        std::uint32_t len;
        is.read(reinterpret_cast<char*>(&len), 4);
        if (!is || len > 4096) throw IoError("corrupt grid dump channel table: " + path);
        name.resize(len);
        is.read(name.data(), len);
    }
    for (auto& [name, values] : dump.channels) {
        values.resize(dump.dims.size());
        is.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (!is) throw IoError("truncated grid dump: " + path);
    }
    return dump;
}

GridDump dump_wind_field(const LbmField& field) {
    GridDump dump;
    dump.dims = field.dims;
    const std::size_t n = field.dims.size();
    auto channel = [&](const char* name) -> std::vector<double>& {
        dump.channels.emplace_back(name, std::vector<double>(n));
        return dump.channels.back().second;
    };
    auto& rho = channel("rho");
    auto& ux = channel("ux");
    auto& uy = channel("uy");
    auto& uz = channel("uz");
    auto& sxx = channel("Sxx");
    auto& syy = channel("Syy");
    auto& szz = channel("Szz");
    auto& sxy = channel("Sxy");
    auto& sxz = channel("Sxz");
    auto& syz = channel("Syz");
    auto& solid = channel("solid");
    for (std::size_t i = 0; i < n; ++i) {
        rho[i] = field.rho[i];
        ux[i] = field.u[i].x;
        uy[i] = field.u[i].y;
        uz[i] = field.u[i].z;
        sxx[i] = field.S[i].xx;
        syy[i] = field.S[i].yy;
        szz[i] = field.S[i].zz;
        sxy[i] = field.S[i].xy;
        sxz[i] = field.S[i].xz;
        syz[i] = field.S[i].yz;
        solid[i] = field.solid[i] ? 1.0 : 0.0;
    }
    return dump;
}

}  // namespace windsim

#include "oshe/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oshe/errors.hpp"

namespace fs = std::filesystem;

namespace oshe {

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec)
        throw IoError("cannot create directory '" + path + "': " + ec.message());
}

void atomic_write_text(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path())
        ensure_dir(target.parent_path().string());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw IoError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec)
        throw IoError("cannot rename '" + tmp.string() + "' to '" + target.string() +
                      "': " + ec.message());
}

void write_field_binary(const std::string& path, const GridField& field,
                        const nlohmann::json& sidecar_extra) {
    std::string raw(reinterpret_cast<const char*>(field.values.data()),
                    field.values.size() * sizeof(double));
    atomic_write_text(path, raw);

    nlohmann::json sidecar = {
        {"schema_version", 1},
        {"d", field.lattice.d},
        {"N", field.lattice.N},
        {"L", field.lattice.L},
        {"dtype", "float64-le"},
        {"layout", "row-major"},
    };
    for (auto it = sidecar_extra.begin(); it != sidecar_extra.end(); ++it)
        sidecar[it.key()] = it.value();
    atomic_write_text(path + ".json", sidecar.dump(2) + "\n");
}

GridField read_field_binary(const std::string& path) {
    std::ifstream meta(path + ".json");
    if (!meta)
        throw IoError("missing sidecar for '" + path + "'");
    nlohmann::json sidecar = nlohmann::json::parse(meta);
    Lattice lat = make_lattice(sidecar.at("d").get<int>(),
                               sidecar.at("L").get<double>(),
                               sidecar.at("N").get<int>());
    GridField f = make_field(lat);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != f.values.size() * sizeof(double))
        throw IoError("short read from '" + path + "'");
    return f;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace oshe

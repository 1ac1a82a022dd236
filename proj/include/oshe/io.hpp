#pragma once

#include <string>

#include <json.hpp>

#include "oshe/grid_field.hpp"

namespace oshe {

// Writes via a temp file plus rename, so no partially-written file survives
// a killed run. Throws IoError.
void atomic_write_text(const std::string& path, const std::string& content);

// Flat binary field dump: little-endian float64, row-major, with a JSON
// sidecar (<path>.json) holding {d, N, L, dt, seed, schema_version}.
void write_field_binary(const std::string& path, const GridField& field,
                        const nlohmann::json& sidecar_extra = {});

// Reads the flat binary format back (used by tests and tooling).
GridField read_field_binary(const std::string& path);

// Fixed-format float for byte-stable CSV output.
std::string fmt_double(double v);

void ensure_dir(const std::string& path);

} // namespace oshe

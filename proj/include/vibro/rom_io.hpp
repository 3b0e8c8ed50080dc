#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "vibro/mor.hpp"

namespace vibro
{

// Binary container: "VIBROROM" magic, format version, then little-endian fields.
// The reduced model is evaluable from the file alone; the basis V is optional.
inline constexpr std::uint32_t rom_format_version = 1;

void write_rom(std::ostream &out, const ReducedModel &rom, bool include_basis = true);
ReducedModel read_rom(std::istream &in);

void save_rom(const std::filesystem::path &path, const ReducedModel &rom,
              bool include_basis = true);
ReducedModel load_rom(const std::filesystem::path &path);

}  // namespace vibro

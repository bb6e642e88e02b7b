#pragma once

#include <filesystem>

#include "cyf/grid.hpp"

namespace cyf::cli {

// CYF1 snapshot: "CYF1", u32 dim count, u32 sizes, f64 values; all little-endian.
void write_field(const std::filesystem::path& path, const ScalarField& u);
ScalarField read_field(const std::filesystem::path& path);

}  // namespace cyf::cli

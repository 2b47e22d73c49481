#ifndef QHEX_VOLUME_IO_HPP
#define QHEX_VOLUME_IO_HPP

#include <filesystem>

#include "qhex/volume.hpp"

namespace qhex {

// dvol container: "<base>.dvol.json" header + "<base>.dvol.raw" little-endian
// f32 samples in x-fastest (x, y, z, c) order. The header records dims,
// voxel_size, dtype, the scheme path and the channel-0-is-b0 flag.
//
// `base` may be given with or without the .dvol[.json|.raw] suffix.
void write_dvol(const Volume4D& v, const std::filesystem::path& base);
Volume4D read_dvol(const std::filesystem::path& base);

// normalized header path helpers
std::filesystem::path dvol_json_path(const std::filesystem::path& base);
std::filesystem::path dvol_raw_path(const std::filesystem::path& base);

} // namespace qhex

#endif

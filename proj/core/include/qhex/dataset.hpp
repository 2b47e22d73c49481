#ifndef QHEX_DATASET_HPP
#define QHEX_DATASET_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qhex/hemihex.hpp"
#include "qhex/volume.hpp"

namespace qhex {

// One training example: 27 spatial neighbors x 3 known-direction signals,
// b0-normalized and clamped to [0,2], against one normalized target signal.
//
// Input ordering contract: outer loop over the 27 offsets in lexicographic
// (dz, dy, dx) order over {-1,0,1}^3; inner loop over the 3 knowns sorted by
// ascending angular distance to the unknown direction (ties by lower HAR
// index). input[o*3 + k].
struct Sample {
    std::array<float, 81> input;
    float target = 0.0f;
    std::uint16_t vx = 0, vy = 0, vz = 0;
    std::uint16_t unknown = 0; // HAR direction index
};

struct DataSplit {
    std::vector<Sample> train;
    std::vector<Sample> val;
    std::vector<std::string> train_provenance;
    std::vector<std::string> val_provenance;
};

// True where the full 3x3x3 neighborhood is inside the volume and b0 > 0 at
// all 27 voxels; the default extraction mask.
std::vector<std::uint8_t> make_interior_mask(const Volume4D& lar);

// Normalized 81-vector for one (voxel, neighborhood) pair, per the ordering
// contract above. Shared by training extraction and volume prediction.
std::array<double, 81> assemble_input(const Volume4D& lar, const NestedScheme& scheme,
                                      const HemiHexNeighborhood& nbhd, int x, int y, int z);

// One Sample per (masked voxel, neighborhood), voxels in ascending linear
// order, neighborhoods in unknown order. Throws on shape mismatch or a
// non-positive b0 inside the mask.
std::vector<Sample> extract_samples(const Volume4D& lar, const Volume4D& har,
                                    const NestedScheme& scheme,
                                    const std::vector<HemiHexNeighborhood>& nbhds,
                                    const std::vector<std::uint8_t>& mask);

// Region-level split: whole provenance labels go to train or val, never
// individual voxels. The last round(val_fraction * nregions) labels in sorted
// order (clamped to [1, n-1]) become validation.
DataSplit split_by_region(const std::vector<Sample>& samples,
                          const std::vector<std::string>& provenance, double val_fraction);

// Seeded permutation, then contiguous index batches; short final batch kept.
std::vector<std::vector<std::size_t>> shuffle_batches(std::size_t count, std::size_t batch_size,
                                                      std::uint64_t seed);

// Binary dataset dump: magic QHXD, version byte, u32 count, then per sample
// 81 f32 inputs, f32 target, 3 u16 voxel coords, u16 unknown index.
void save_samples(const std::vector<Sample>& samples, const std::filesystem::path& path);
std::vector<Sample> load_samples(const std::filesystem::path& path);

} // namespace qhex

#endif

#ifndef QHEX_UPSAMPLE_HPP
#define QHEX_UPSAMPLE_HPP

#include <cstdint>
#include <vector>

#include "qhex/hemihex.hpp"
#include "qhex/mlp.hpp"
#include "qhex/volume.hpp"

namespace qhex {

struct PredictReport {
    std::size_t total_voxels = 0;
    std::size_t masked_voxels = 0;
    double coverage() const {
        return total_voxels ? static_cast<double>(masked_voxels) / total_voxels : 0.0;
    }
};

// Synthesizes the full HAR volume from a LAR volume: b0 and known channels
// are copied bitwise, each unknown channel at each masked voxel is the model
// prediction denormalized by that voxel's b0 and clamped to >= 0. Unmasked
// voxels stay 0 in unknown channels and are counted in the report.
Volume4D predict_volume(const Volume4D& lar, const MLPParams& model, const NestedScheme& scheme,
                        const std::vector<HemiHexNeighborhood>& nbhds,
                        const std::vector<std::uint8_t>& mask, PredictReport* report = nullptr);

// Geometric baseline: each unknown is the barycentric combination of its
// three known signals at the same voxel; no spatial neighborhood, no model.
Volume4D predict_volume_baseline(const Volume4D& lar, const NestedScheme& scheme,
                                 const std::vector<HemiHexNeighborhood>& nbhds,
                                 const std::vector<std::uint8_t>& mask,
                                 PredictReport* report = nullptr);

} // namespace qhex

#endif

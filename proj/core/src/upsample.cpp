#include "qhex/upsample.hpp"

#include <algorithm>
#include <cstring>

#include "qhex/error.hpp"

namespace qhex {

namespace {

struct MaskedVoxel {
    int x, y, z;
    std::size_t flat; // x + nx*(y + ny*z)
};

// Shared header construction: copy b0 + known channels bitwise, zero the
// unknown channels, collect the masked voxel list.
Volume4D start_output(const Volume4D& lar, const NestedScheme& scheme,
                      const std::vector<HemiHexNeighborhood>& nbhds,
                      const std::vector<std::uint8_t>& mask, std::vector<MaskedVoxel>& voxels,
                      PredictReport* report) {
    scheme.validate();
    if (lar.nc() != 1 + static_cast<int>(scheme.lar_indices.size()))
        throw ValidationError("LAR channel count does not match scheme");
    if (mask.size() != lar.voxel_count()) throw ValidationError("mask size mismatch");
    if (nbhds.size() != scheme.unknown_indices.size())
        throw ValidationError("neighborhood count does not match scheme unknowns");
    for (const auto& nb : nbhds)
        if (std::find(scheme.unknown_indices.begin(), scheme.unknown_indices.end(), nb.center) ==
            scheme.unknown_indices.end())
            throw ValidationError("neighborhood center is not a scheme unknown");

    Volume4D out(lar.nx(), lar.ny(), lar.nz(), 1 + static_cast<int>(scheme.har.size()));
    out.voxel_size = lar.voxel_size;
    out.b0_first = true;
    out.scheme_path = lar.scheme_path;
    const std::size_t block = lar.voxel_count();
    std::memcpy(out.channel_data(0), lar.channel_data(0), block * sizeof(float));
    for (std::size_t k = 0; k < scheme.lar_indices.size(); ++k)
        std::memcpy(out.channel_data(1 + scheme.lar_indices[k]),
                    lar.channel_data(1 + static_cast<int>(k)), block * sizeof(float));
    out.attach_har_channels(scheme);

    voxels.clear();
    std::size_t li = 0;
    for (int z = 0; z < lar.nz(); ++z)
        for (int y = 0; y < lar.ny(); ++y)
            for (int x = 0; x < lar.nx(); ++x, ++li)
                if (mask[li]) voxels.push_back({x, y, z, li});
    if (report) {
        report->total_voxels = lar.voxel_count();
        report->masked_voxels = voxels.size();
    }
    return out;
}

} // namespace

Volume4D predict_volume(const Volume4D& lar, const MLPParams& model, const NestedScheme& scheme,
                        const std::vector<HemiHexNeighborhood>& nbhds,
                        const std::vector<std::uint8_t>& mask, PredictReport* report) {
    model.validate();
    if (model.dims.front() != 81 || model.dims.back() != 1)
        throw ValidationError("model input dim must be 81 and output dim 1");
    std::vector<MaskedVoxel> voxels;
    Volume4D out = start_output(lar, scheme, nbhds, mask, voxels, report);
    if (voxels.empty()) return out;

    Eigen::MatrixXd X(81, static_cast<Eigen::Index>(voxels.size()));
    for (const auto& nb : nbhds) {
        for (std::size_t i = 0; i < voxels.size(); ++i) {
            const auto in = assemble_input(lar, scheme, nb, voxels[i].x, voxels[i].y, voxels[i].z);
            for (int r = 0; r < 81; ++r)
                X(r, static_cast<Eigen::Index>(i)) = in[static_cast<std::size_t>(r)];
        }
        const Eigen::RowVectorXd preds = mlp_forward(model, X, nullptr);
        float* ch = out.channel_data(1 + nb.center);
        for (std::size_t i = 0; i < voxels.size(); ++i) {
            const double b0 = lar.at(voxels[i].x, voxels[i].y, voxels[i].z, 0);
            const double s = preds(static_cast<Eigen::Index>(i)) * b0;
            ch[voxels[i].flat] = static_cast<float>(std::max(0.0, s));
        }
    }
    return out;
}

Volume4D predict_volume_baseline(const Volume4D& lar, const NestedScheme& scheme,
                                 const std::vector<HemiHexNeighborhood>& nbhds,
                                 const std::vector<std::uint8_t>& mask, PredictReport* report) {
    std::vector<MaskedVoxel> voxels;
    Volume4D out = start_output(lar, scheme, nbhds, mask, voxels, report);
    if (voxels.empty()) return out;

    for (const auto& nb : nbhds) {
        int kch[3];
        for (int k = 0; k < 3; ++k) {
            auto it = std::find(scheme.lar_indices.begin(), scheme.lar_indices.end(), nb.knowns[k]);
            if (it == scheme.lar_indices.end())
                throw ValidationError("known direction not in LAR scheme");
            kch[k] = 1 + static_cast<int>(it - scheme.lar_indices.begin());
        }
        float* ch = out.channel_data(1 + nb.center);
        for (const auto& v : voxels) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += nb.weights[k] * lar.at(v.x, v.y, v.z, kch[k]);
            ch[v.flat] = static_cast<float>(std::max(0.0, s));
        }
    }
    return out;
}

} // namespace qhex

#ifndef QHEX_VOLUME_HPP
#define QHEX_VOLUME_HPP

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qhex/error.hpp"
#include "qhex/scheme.hpp"

namespace qhex {

// Dense 4-D diffusion volume, f32 samples in x-fastest (x, y, z, c) order,
// channel 0 being the unweighted b=0 image when b0_first is set. The channel
// table (per-channel b-value and gradient direction) is attached from a
// nested scheme after construction or load.
class Volume4D {
public:
    Volume4D() = default;
    Volume4D(int nx, int ny, int nz, int nc);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    int nc() const { return nc_; }
    std::size_t voxel_count() const { return static_cast<std::size_t>(nx_) * ny_ * nz_; }

    std::size_t index(int x, int y, int z, int c) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(nx_) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(ny_) *
                        (static_cast<std::size_t>(z) + static_cast<std::size_t>(nz_) * c));
    }
    float at(int x, int y, int z, int c) const { return data_[index(x, y, z, c)]; }
    float& at(int x, int y, int z, int c) { return data_[index(x, y, z, c)]; }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    // contiguous channel block (nx*ny*nz floats)
    const float* channel_data(int c) const { return data_.data() + index(0, 0, 0, c); }
    float* channel_data(int c) { return data_.data() + index(0, 0, 0, c); }

    std::array<double, 3> voxel_size{1.875, 1.875, 2.0};
    bool b0_first = true;
    std::string scheme_path; // recorded in the dvol header; may be empty

    // channel table; empty until attached
    struct Channel {
        double bval = 0.0;
        Eigen::Vector3d dir = Eigen::Vector3d::Zero(); // zero for the b0 channel
    };
    const std::vector<Channel>& channels() const { return channels_; }
    bool has_channel_table() const { return !channels_.empty(); }

    // b0 + all HAR directions in scheme order (requires nc == 1 + |har|)
    void attach_har_channels(const NestedScheme& s);
    // b0 + the LAR subset in lar_indices order (requires nc == 1 + |lar|)
    void attach_lar_channels(const NestedScheme& s);
    // infer HAR vs LAR from nc; throws ValidationError on no match
    void attach_channels(const NestedScheme& s);

private:
    int nx_ = 0, ny_ = 0, nz_ = 0, nc_ = 0;
    std::vector<float> data_;
    std::vector<Channel> channels_;
};

} // namespace qhex

#endif

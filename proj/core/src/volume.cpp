#include "qhex/volume.hpp"

namespace qhex {

Volume4D::Volume4D(int nx, int ny, int nz, int nc) : nx_(nx), ny_(ny), nz_(nz), nc_(nc) {
    if (nx < 1 || ny < 1 || nz < 1 || nc < 1)
        throw ValidationError("volume dims must be positive");
    data_.assign(static_cast<std::size_t>(nx) * ny * nz * nc, 0.0f);
}

void Volume4D::attach_har_channels(const NestedScheme& s) {
    if (nc_ != 1 + static_cast<int>(s.har.size()))
        throw ValidationError("channel count does not match b0 + HAR scheme");
    channels_.clear();
    channels_.push_back({0.0, Eigen::Vector3d::Zero()});
    for (std::size_t i = 0; i < s.har.size(); ++i)
        channels_.push_back({s.har.bval(i), s.har.dir(i).vec()});
    b0_first = true;
}

void Volume4D::attach_lar_channels(const NestedScheme& s) {
    if (nc_ != 1 + static_cast<int>(s.lar_count()))
        throw ValidationError("channel count does not match b0 + LAR subset");
    channels_.clear();
    channels_.push_back({0.0, Eigen::Vector3d::Zero()});
    for (int i : s.lar_indices)
        channels_.push_back({s.har.bval(i), s.har.dir(i).vec()});
    b0_first = true;
}

void Volume4D::attach_channels(const NestedScheme& s) {
    if (nc_ == 1 + static_cast<int>(s.har.size()))
        attach_har_channels(s);
    else if (nc_ == 1 + static_cast<int>(s.lar_count()))
        attach_lar_channels(s);
    else
        throw ValidationError("channel count matches neither HAR nor LAR layout");
}

} // namespace qhex

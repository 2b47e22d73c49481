#ifndef QHEX_PHANTOM_HPP
#define QHEX_PHANTOM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qhex/volume.hpp"

namespace qhex {

// Symmetric positive-semidefinite 3x3 diffusion tensor, mm^2/s.
class Tensor3 {
public:
    // Throws ValidationError unless all eigenvalues are >= -1e-15.
    Tensor3(double dxx, double dyy, double dzz, double dxy, double dxz, double dyz);

    static Tensor3 isotropic(double d) { return Tensor3(d, d, d, 0, 0, 0); }
    static Tensor3 diagonal(double dx, double dy, double dz) { return Tensor3(dx, dy, dz, 0, 0, 0); }
    // axially symmetric tensor with the given principal axis
    static Tensor3 prolate(double axial, double radial, const UnitVector& axis);
    static Tensor3 from_matrix(const Eigen::Matrix3d& m);

    double dxx() const { return c_[0]; }
    double dyy() const { return c_[1]; }
    double dzz() const { return c_[2]; }
    double dxy() const { return c_[3]; }
    double dxz() const { return c_[4]; }
    double dyz() const { return c_[5]; }
    const std::array<double, 6>& components() const { return c_; }

    Eigen::Matrix3d matrix() const;
    // g^T D g
    double quadratic_form(const Eigen::Vector3d& g) const;
    // ascending
    std::array<double, 3> eigenvalues() const;

private:
    std::array<double, 6> c_; // dxx dyy dzz dxy dxz dyz
};

// Single-tensor forward model S = S0 * exp(-b g^T D g).
double tensor_signal(double s0, double b, const UnitVector& g, const Tensor3& d);

// Two-compartment mixture S = S0 * (f e^{-b q1} + (1-f) e^{-b q2}).
double mixture_signal(double s0, double b, const UnitVector& g, const Tensor3& d1,
                      const Tensor3& d2, double f);

// Per-region tissue model; fraction applies when a second tensor is present.
struct RegionModel {
    std::string name;
    Tensor3 d1;
    std::optional<Tensor3> d2;
    double fraction = 1.0;
};

struct PhantomSpec {
    int nx = 0, ny = 0, nz = 0;
    std::array<double, 3> voxel_size{1.875, 1.875, 2.0};
    std::vector<std::uint8_t> region_map; // nx*ny*nz labels indexing models
    std::vector<RegionModel> models;
    double s0 = 1000.0;
    double noise_sigma = 0.0; // Rician, same units as s0
    std::uint64_t seed = 0;

    // 16x16x8 slab phantom: isotropic "GM", prolate "WM", two-tensor crossing.
    static PhantomSpec desk_mixed(std::uint64_t seed, int nx = 16, int ny = 16, int nz = 8);
    // same grid, all regions isotropic
    static PhantomSpec desk_isotropic(std::uint64_t seed, int nx = 16, int ny = 16, int nz = 8);
};

// Synthesize the HAR volume (b0 + all HAR channels) and its exact LAR channel
// subset. Rician noise (if noise_sigma > 0) is applied to the HAR volume with
// counter-based seeding, so the LAR subset stays bitwise consistent.
std::pair<Volume4D, Volume4D> make_phantom(const PhantomSpec& spec, const NestedScheme& scheme);

// Region labels as a 1-channel volume (for region-aware train/val splits).
Volume4D region_volume(const PhantomSpec& spec);

// Magnitude-MR noise: s -> sqrt((s + n1)^2 + n2^2), n ~ N(0, sigma), with a
// deterministic stream per (seed, voxel, channel).
Volume4D add_rician_noise(const Volume4D& v, double sigma, std::uint64_t seed);

} // namespace qhex

#endif

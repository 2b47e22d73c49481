#include "qhex/phantom.hpp"

#include <cmath>

#include "qhex/rng.hpp"

namespace qhex {

Tensor3::Tensor3(double dxx, double dyy, double dzz, double dxy, double dxz, double dyz)
    : c_{dxx, dyy, dzz, dxy, dxz, dyz} {
    const auto ev = eigenvalues();
    if (!(ev[0] >= -1e-15))
        throw ValidationError("tensor is not positive semidefinite");
}

Tensor3 Tensor3::prolate(double axial, double radial, const UnitVector& axis) {
    const Eigen::Vector3d a = axis.vec();
    const Eigen::Matrix3d m =
        radial * Eigen::Matrix3d::Identity() + (axial - radial) * (a * a.transpose());
    return from_matrix(m);
}

Tensor3 Tensor3::from_matrix(const Eigen::Matrix3d& m) {
    return Tensor3(m(0, 0), m(1, 1), m(2, 2), m(0, 1), m(0, 2), m(1, 2));
}

Eigen::Matrix3d Tensor3::matrix() const {
    Eigen::Matrix3d m;
    m << c_[0], c_[3], c_[4],
         c_[3], c_[1], c_[5],
         c_[4], c_[5], c_[2];
    return m;
}

double Tensor3::quadratic_form(const Eigen::Vector3d& g) const {
    return c_[0] * g.x() * g.x() + c_[1] * g.y() * g.y() + c_[2] * g.z() * g.z() +
           2.0 * (c_[3] * g.x() * g.y() + c_[4] * g.x() * g.z() + c_[5] * g.y() * g.z());
}

std::array<double, 3> Tensor3::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(matrix(), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev[0], ev[1], ev[2]};
}

double tensor_signal(double s0, double b, const UnitVector& g, const Tensor3& d) {
    return s0 * std::exp(-b * d.quadratic_form(g.vec()));
}

double mixture_signal(double s0, double b, const UnitVector& g, const Tensor3& d1,
                      const Tensor3& d2, double f) {
    if (f < 0.0 || f > 1.0) throw ValidationError("mixture fraction outside [0,1]");
    return s0 * (f * std::exp(-b * d1.quadratic_form(g.vec())) +
                 (1.0 - f) * std::exp(-b * d2.quadratic_form(g.vec())));
}

namespace {

UnitVector random_axis(Rng& rng) {
    // uniform on the sphere via normalized gaussians
    for (;;) {
        const double x = rng.next_normal();
        const double y = rng.next_normal();
        const double z = rng.next_normal();
        const double n = std::sqrt(x * x + y * y + z * z);
        if (n > 1e-6) return UnitVector(x / n, y / n, z / n);
    }
}

UnitVector orthogonal_axis(Rng& rng, const UnitVector& a) {
    const Eigen::Vector3d v = random_axis(rng).vec();
    const Eigen::Vector3d w = v - v.dot(a.vec()) * a.vec();
    if (w.norm() < 1e-6) return orthogonal_axis(rng, a);
    return UnitVector(w);
}

PhantomSpec desk_base(std::uint64_t seed, int nx, int ny, int nz) {
    PhantomSpec spec;
    spec.nx = nx;
    spec.ny = ny;
    spec.nz = nz;
    spec.seed = seed;
    spec.region_map.resize(static_cast<std::size_t>(nx) * ny * nz);
    // three slabs along x
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const std::size_t i = static_cast<std::size_t>(x) +
                                      static_cast<std::size_t>(nx) *
                                          (y + static_cast<std::size_t>(ny) * z);
                spec.region_map[i] = static_cast<std::uint8_t>((3 * x) / nx);
            }
    return spec;
}

} // namespace

PhantomSpec PhantomSpec::desk_mixed(std::uint64_t seed, int nx, int ny, int nz) {
    PhantomSpec spec = desk_base(seed, nx, ny, nz);
    Rng rng(mix64(seed) ^ 0x70686d74ULL);
    const UnitVector wm_axis = random_axis(rng);
    const UnitVector cross_a = random_axis(rng);
    const UnitVector cross_b = orthogonal_axis(rng, cross_a);
    spec.models.push_back({"gm", Tensor3::isotropic(0.8e-3), std::nullopt, 1.0});
    spec.models.push_back({"wm", Tensor3::prolate(1.7e-3, 0.3e-3, wm_axis), std::nullopt, 1.0});
    spec.models.push_back({"crossing", Tensor3::prolate(1.7e-3, 0.3e-3, cross_a),
                           Tensor3::prolate(1.7e-3, 0.3e-3, cross_b), 0.5});
    return spec;
}

PhantomSpec PhantomSpec::desk_isotropic(std::uint64_t seed, int nx, int ny, int nz) {
    PhantomSpec spec = desk_base(seed, nx, ny, nz);
    spec.models.push_back({"iso-a", Tensor3::isotropic(0.7e-3), std::nullopt, 1.0});
    spec.models.push_back({"iso-b", Tensor3::isotropic(0.8e-3), std::nullopt, 1.0});
    spec.models.push_back({"iso-c", Tensor3::isotropic(0.9e-3), std::nullopt, 1.0});
    return spec;
}

std::pair<Volume4D, Volume4D> make_phantom(const PhantomSpec& spec, const NestedScheme& scheme) {
    scheme.validate();
    if (spec.region_map.empty()) throw ValidationError("empty region map");
    const std::size_t nvox = static_cast<std::size_t>(spec.nx) * spec.ny * spec.nz;
    if (spec.region_map.size() != nvox)
        throw ValidationError("region map size does not match dims");
    if (spec.models.empty()) throw ValidationError("no region models");
    for (std::uint8_t r : spec.region_map)
        if (r >= spec.models.size()) throw ValidationError("region label out of range");
    if (!(spec.s0 > 0.0)) throw ValidationError("S0 must be positive");
    if (spec.noise_sigma < 0.0) throw ValidationError("negative noise sigma");

    const int n_har = static_cast<int>(scheme.har.size());
    Volume4D har(spec.nx, spec.ny, spec.nz, 1 + n_har);
    har.voxel_size = spec.voxel_size;
    har.attach_har_channels(scheme);

    for (int z = 0; z < spec.nz; ++z)
        for (int y = 0; y < spec.ny; ++y)
            for (int x = 0; x < spec.nx; ++x) {
                const std::size_t vi = static_cast<std::size_t>(x) +
                                       static_cast<std::size_t>(spec.nx) *
                                           (y + static_cast<std::size_t>(spec.ny) * z);
                const RegionModel& m = spec.models[spec.region_map[vi]];
                har.at(x, y, z, 0) = static_cast<float>(spec.s0);
                for (int c = 0; c < n_har; ++c) {
                    const UnitVector& g = scheme.har.dir(c);
                    const double b = scheme.har.bval(c);
                    const double s = m.d2 ? mixture_signal(spec.s0, b, g, m.d1, *m.d2, m.fraction)
                                          : tensor_signal(spec.s0, b, g, m.d1);
                    har.at(x, y, z, 1 + c) = static_cast<float>(s);
                }
            }

    if (spec.noise_sigma > 0.0)
        har = add_rician_noise(har, spec.noise_sigma, spec.seed);

    // LAR volume: exact channel subset {b0} + lar_indices
    Volume4D lar(spec.nx, spec.ny, spec.nz, 1 + static_cast<int>(scheme.lar_count()));
    lar.voxel_size = spec.voxel_size;
    lar.attach_lar_channels(scheme);
    const std::size_t block = nvox;
    std::copy_n(har.channel_data(0), block, lar.channel_data(0));
    for (std::size_t j = 0; j < scheme.lar_count(); ++j)
        std::copy_n(har.channel_data(1 + scheme.lar_indices[j]), block,
                    lar.channel_data(1 + static_cast<int>(j)));

    return {std::move(har), std::move(lar)};
}

Volume4D region_volume(const PhantomSpec& spec) {
    if (spec.region_map.empty()) throw ValidationError("empty region map");
    Volume4D v(spec.nx, spec.ny, spec.nz, 1);
    v.voxel_size = spec.voxel_size;
    v.b0_first = false;
    for (std::size_t i = 0; i < spec.region_map.size(); ++i)
        v.data()[i] = static_cast<float>(spec.region_map[i]);
    return v;
}

Volume4D add_rician_noise(const Volume4D& v, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw ValidationError("negative noise sigma");
    Volume4D out = v;
    if (sigma == 0.0) return out;
    for (std::size_t i = 0; i < out.data().size(); ++i) {
        double n1 = 0.0, n2 = 0.0;
        counter_normals(seed, static_cast<std::uint64_t>(i), n1, n2);
        const double s = static_cast<double>(v.data()[i]);
        out.data()[i] = static_cast<float>(
            std::sqrt((s + sigma * n1) * (s + sigma * n1) + sigma * n2 * sigma * n2));
    }
    return out;
}

} // namespace qhex

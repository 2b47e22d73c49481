#include "qhex/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qhex/error.hpp"
#include "qhex/io_util.hpp"
#include "qhex/rng.hpp"

namespace qhex {

namespace {

float clamp_norm(double v) {
    if (!std::isfinite(v)) throw ValidationError("non-finite normalized signal");
    return static_cast<float>(std::clamp(v, 0.0, 2.0));
}

} // namespace

std::vector<std::uint8_t> make_interior_mask(const Volume4D& lar) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(lar.nx()) * lar.ny() * lar.nz(), 0);
    for (int z = 1; z + 1 < lar.nz(); ++z)
        for (int y = 1; y + 1 < lar.ny(); ++y)
            for (int x = 1; x + 1 < lar.nx(); ++x) {
                bool ok = true;
                for (int dz = -1; dz <= 1 && ok; ++dz)
                    for (int dy = -1; dy <= 1 && ok; ++dy)
                        for (int dx = -1; dx <= 1 && ok; ++dx)
                            if (lar.at(x + dx, y + dy, z + dz, 0) <= 0.0f) ok = false;
                if (ok)
                    mask[static_cast<std::size_t>(x) +
                         static_cast<std::size_t>(lar.nx()) *
                             (static_cast<std::size_t>(y) + static_cast<std::size_t>(lar.ny()) * z)] = 1;
            }
    return mask;
}

std::array<double, 81> assemble_input(const Volume4D& lar, const NestedScheme& scheme,
                                      const HemiHexNeighborhood& nbhd, int x, int y, int z) {
    // Map each known's HAR index to its LAR channel (b0 is channel 0).
    int kch[3];
    for (int k = 0; k < 3; ++k) {
        auto it = std::find(scheme.lar_indices.begin(), scheme.lar_indices.end(), nbhd.knowns[k]);
        if (it == scheme.lar_indices.end()) throw ValidationError("known direction not in LAR scheme");
        kch[k] = 1 + static_cast<int>(it - scheme.lar_indices.begin());
    }
    std::array<double, 81> in{};
    int o = 0;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx, ++o) {
                const int vx = x + dx, vy = y + dy, vz = z + dz;
                const double b0 = lar.at(vx, vy, vz, 0);
                if (!(b0 > 0.0)) throw ValidationError("invalid b0");
                for (int k = 0; k < 3; ++k)
                    in[static_cast<std::size_t>(o) * 3 + k] =
                        std::clamp(lar.at(vx, vy, vz, kch[k]) / b0, 0.0, 2.0);
            }
    return in;
}

std::vector<Sample> extract_samples(const Volume4D& lar, const Volume4D& har,
                                    const NestedScheme& scheme,
                                    const std::vector<HemiHexNeighborhood>& nbhds,
                                    const std::vector<std::uint8_t>& mask) {
    if (lar.nx() != har.nx() || lar.ny() != har.ny() || lar.nz() != har.nz())
        throw ValidationError("LAR/HAR shape mismatch");
    if (lar.nc() != 1 + static_cast<int>(scheme.lar_indices.size()))
        throw ValidationError("LAR channel count does not match scheme");
    if (har.nc() != 1 + static_cast<int>(scheme.har.size()))
        throw ValidationError("HAR channel count does not match scheme");
    if (mask.size() != static_cast<std::size_t>(lar.nx()) * lar.ny() * lar.nz())
        throw ValidationError("mask size mismatch");

    std::vector<Sample> out;
    std::size_t masked = 0;
    for (const auto m : mask)
        if (m) ++masked;
    out.reserve(masked * nbhds.size());

    std::size_t li = 0;
    for (int z = 0; z < lar.nz(); ++z)
        for (int y = 0; y < lar.ny(); ++y)
            for (int x = 0; x < lar.nx(); ++x, ++li) {
                if (!mask[li]) continue;
                const double b0c = har.at(x, y, z, 0);
                if (!(b0c > 0.0)) throw ValidationError("invalid b0");
                for (const auto& nb : nbhds) {
                    const auto in = assemble_input(lar, scheme, nb, x, y, z);
                    Sample s;
                    for (std::size_t i = 0; i < 81; ++i) s.input[i] = clamp_norm(in[i]);
                    s.target = clamp_norm(har.at(x, y, z, 1 + nb.center) / b0c);
                    s.vx = static_cast<std::uint16_t>(x);
                    s.vy = static_cast<std::uint16_t>(y);
                    s.vz = static_cast<std::uint16_t>(z);
                    s.unknown = static_cast<std::uint16_t>(nb.center);
                    out.push_back(s);
                }
            }
    return out;
}

DataSplit split_by_region(const std::vector<Sample>& samples,
                          const std::vector<std::string>& provenance, double val_fraction) {
    if (samples.size() != provenance.size())
        throw ValidationError("provenance size mismatch");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ValidationError("val fraction must lie in (0,1)");
    std::set<std::string> labels(provenance.begin(), provenance.end());
    if (labels.size() < 2) throw ValidationError("need at least 2 regions to split");

    const std::size_t n = labels.size();
    std::size_t nval = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
    nval = std::clamp<std::size_t>(nval, 1, n - 1);

    // Last nval labels in sorted order go to validation.
    std::set<std::string> val_labels;
    auto it = labels.rbegin();
    for (std::size_t i = 0; i < nval; ++i, ++it) val_labels.insert(*it);

    DataSplit split;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (val_labels.count(provenance[i])) {
            split.val.push_back(samples[i]);
            split.val_provenance.push_back(provenance[i]);
        } else {
            split.train.push_back(samples[i]);
            split.train_provenance.push_back(provenance[i]);
        }
    }
    return split;
}

std::vector<std::vector<std::size_t>> shuffle_batches(std::size_t count, std::size_t batch_size,
                                                      std::uint64_t seed) {
    if (batch_size < 1) throw ValidationError("batch size must be >= 1");
    std::vector<std::size_t> perm(count);
    for (std::size_t i = 0; i < count; ++i) perm[i] = i;
    Rng rng(seed);
    for (std::size_t i = count; i > 1; --i) {
        const std::size_t j = rng.next_below(i);
        std::swap(perm[i - 1], perm[j]);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < count; start += batch_size) {
        const std::size_t end = std::min(count, start + batch_size);
        batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                             perm.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

void save_samples(const std::vector<Sample>& samples, const std::filesystem::path& path) {
    std::string buf;
    buf.reserve(9 + samples.size() * (81 * 4 + 4 + 8));
    buf += "QHXD";
    buf.push_back('\x01');
    append_le(buf, static_cast<std::uint32_t>(samples.size()));
    for (const auto& s : samples) {
        for (const float v : s.input) append_le(buf, v);
        append_le(buf, s.target);
        append_le(buf, s.vx);
        append_le(buf, s.vy);
        append_le(buf, s.vz);
        append_le(buf, s.unknown);
    }
    write_file_atomic(path, buf);
}

std::vector<Sample> load_samples(const std::filesystem::path& path) {
    const std::string buf = read_binary_file(path);
    if (buf.size() < 9 || buf.compare(0, 4, "QHXD") != 0)
        throw IoError("not a QHXD file: " + path.string());
    if (buf[4] != '\x01') throw IoError("unsupported QHXD version");
    std::size_t off = 5;
    const auto count = read_le<std::uint32_t>(buf, off);
    const std::size_t need = 9 + static_cast<std::size_t>(count) * (81 * 4 + 4 + 8);
    if (buf.size() != need) throw IoError("QHXD size mismatch: " + path.string());
    std::vector<Sample> out(count);
    for (auto& s : out) {
        for (auto& v : s.input) v = read_le<float>(buf, off);
        s.target = read_le<float>(buf, off);
        s.vx = read_le<std::uint16_t>(buf, off);
        s.vy = read_le<std::uint16_t>(buf, off);
        s.vz = read_le<std::uint16_t>(buf, off);
        s.unknown = read_le<std::uint16_t>(buf, off);
    }
    return out;
}

} // namespace qhex

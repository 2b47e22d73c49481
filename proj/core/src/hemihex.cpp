#include "qhex/hemihex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qhex/io_util.hpp"

namespace qhex {

std::vector<HemiHexNeighborhood> decompose(const NestedScheme& s) {
    s.validate();
    if (s.lar_count() < 3)
        throw ValidationError("need at least 3 LAR directions to triangulate");

    const DirectionSet lar = s.lar();
    const SphericalTriangulation tri = SphericalTriangulation::build(lar);

    std::vector<HemiHexNeighborhood> out;
    out.reserve(s.unknown_count());
    for (int u : s.unknown_indices) {
        const UnitVector& center = s.har.dir(u);
        const auto loc = tri.locate(center);

        HemiHexNeighborhood nb;
        nb.center = u;
        // map LAR-set vertex indices back to HAR indices, then order the
        // knowns by ascending angle to the center (ties by lower HAR index)
        std::array<std::pair<int, double>, 3> ks;
        for (int k = 0; k < 3; ++k) {
            const int har_idx = s.lar_indices[loc.vertices[k]];
            ks[k] = {har_idx, loc.weights[k]};
        }
        std::sort(ks.begin(), ks.end(), [&](const auto& a, const auto& b) {
            const double da = angular_distance(s.har.dir(a.first), center);
            const double db = angular_distance(s.har.dir(b.first), center);
            if (da != db) return da < db;
            return a.first < b.first;
        });
        for (int k = 0; k < 3; ++k) {
            nb.knowns[k] = ks[k].first;
            nb.weights[k] = ks[k].second;
        }

        // 3 angularly nearest other unknowns
        std::vector<std::pair<double, int>> ring;
        for (int v : s.unknown_indices) {
            if (v == u) continue;
            ring.emplace_back(angular_distance(s.har.dir(v), center), v);
        }
        std::sort(ring.begin(), ring.end());
        nb.ring_count = static_cast<int>(std::min<std::size_t>(3, ring.size()));
        for (int k = 0; k < nb.ring_count; ++k) nb.ring_unknowns[k] = ring[k].second;

        out.push_back(nb);
    }
    return out;
}

AlternationReport alternation_report(const NestedScheme& s,
                                     const std::vector<HemiHexNeighborhood>& nbhds) {
    AlternationReport rep;
    double sum = 0.0;
    for (const auto& nb : nbhds) {
        AlternationReport::Entry e;
        e.center = nb.center;
        e.complete = nb.ring_count == 3;
        if (e.complete) {
            const Eigen::Vector3d c = s.har.dir(nb.center).vec();
            // fixed tangent basis: Gram-Schmidt the least-aligned axis
            int axis = 0;
            double best = std::abs(c.x());
            if (std::abs(c.y()) < best) { best = std::abs(c.y()); axis = 1; }
            if (std::abs(c.z()) < best) { axis = 2; }
            Eigen::Vector3d a = Eigen::Vector3d::Zero();
            a[axis] = 1.0;
            const Eigen::Vector3d t1 = (a - a.dot(c) * c).normalized();
            const Eigen::Vector3d t2 = c.cross(t1);

            struct Member { double az; int idx; bool known; };
            std::vector<Member> ring;
            auto add_member = [&](int idx, bool known) {
                Eigen::Vector3d v = s.har.dir(idx).vec();
                if (v.dot(c) < 0.0) v = -v; // antipodal alignment to the center
                ring.push_back({std::atan2(v.dot(t2), v.dot(t1)), idx, known});
            };
            for (int k = 0; k < 3; ++k) add_member(nb.knowns[k], true);
            for (int k = 0; k < 3; ++k) add_member(nb.ring_unknowns[k], false);
            std::sort(ring.begin(), ring.end(), [](const Member& x, const Member& y) {
                if (x.az != y.az) return x.az < y.az;
                return x.idx < y.idx;
            });

            int changes = 0;
            for (int k = 0; k < 6; ++k)
                if (ring[k].known != ring[(k + 1) % 6].known) ++changes;
            e.fraction = changes / 6.0;
            sum += e.fraction;
            ++rep.complete_count;
        }
        rep.entries.push_back(e);
    }
    rep.aggregate = rep.complete_count > 0 ? sum / rep.complete_count : 0.0;
    return rep;
}

std::array<double, 3> baseline_weights(const HemiHexNeighborhood& nbhd) {
    return nbhd.weights;
}

void save_neighborhoods(const std::vector<HemiHexNeighborhood>& nbhds,
                        const std::filesystem::path& path) {
    std::ostringstream os;
    char buf[256];
    for (const auto& nb : nbhds) {
        std::snprintf(buf, sizeof(buf), "%d %d %d %d %.17g %.17g %.17g %d %d %d\n",
                      nb.center, nb.knowns[0], nb.knowns[1], nb.knowns[2],
                      nb.weights[0], nb.weights[1], nb.weights[2],
                      nb.ring_unknowns[0], nb.ring_unknowns[1], nb.ring_unknowns[2]);
        os << buf;
    }
    write_file_atomic(path, os.str());
}

} // namespace qhex

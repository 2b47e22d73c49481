#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "qhex/hemihex.hpp"
#include "test_util.hpp"

using namespace qhex;
using qhex_test::TempDir;

namespace {

constexpr double kPi = std::numbers::pi;

// scheme with LAR {e_x, e_y, e_z} and the given extra unknowns
NestedScheme octa_scheme(const std::vector<UnitVector>& unknowns) {
    NestedScheme s;
    s.har.add(UnitVector(1, 0, 0), 1000);
    s.har.add(UnitVector(0, 1, 0), 1000);
    s.har.add(UnitVector(0, 0, 1), 1000);
    s.lar_indices = {0, 1, 2};
    for (const auto& u : unknowns) {
        s.har.add(u, 1000);
        s.unknown_indices.push_back(static_cast<int>(s.har.size()) - 1);
    }
    return s;
}

UnitVector ring_dir(double azimuth_rad, double colat_rad = kPi / 4) {
    return UnitVector(std::sin(colat_rad) * std::cos(azimuth_rad),
                      std::sin(colat_rad) * std::sin(azimuth_rad), std::cos(colat_rad));
}

// independent containment search: try every face of the LAR triangulation,
// solving the 3x3 corner system directly instead of the cofactor path
struct OracleHit {
    std::set<int> knowns_har;
    std::map<int, double> weight_by_har;
};

OracleHit exhaustive_containment(const NestedScheme& s, const SphericalTriangulation& tri,
                                 const UnitVector& q) {
    for (const Eigen::Vector3d p : {q.vec(), Eigen::Vector3d(-q.vec())}) {
        for (std::size_t f = 0; f < tri.face_count(); ++f) {
            Eigen::Matrix3d M;
            M.col(0) = tri.corner(f, 0);
            M.col(1) = tri.corner(f, 1);
            M.col(2) = tri.corner(f, 2);
            const Eigen::Vector3d w = M.fullPivLu().solve(p);
            const double sum = w.sum();
            if (!(sum > 1e-12)) continue;
            const Eigen::Vector3d nw = w / sum;
            if (nw.minCoeff() < -1e-9) continue;
            OracleHit hit;
            const auto verts = tri.face(f);
            for (int k = 0; k < 3; ++k) {
                const int har_idx = s.lar_indices[verts[k]];
                hit.knowns_har.insert(har_idx);
                hit.weight_by_har[har_idx] = std::clamp(nw[k], 0.0, 1.0);
            }
            return hit;
        }
    }
    FAIL("oracle found no containing face");
    return {};
}

} // namespace

TEST_SUITE("hemihex") {

TEST_CASE("an unknown sitting on a known collapses to that known") {
    // 1e-7 rad off e_x: far enough that cos(eps) is still distinct from 1 in
    // double precision, close enough that the triangle pins the weight on e_x
    const double eps = 1e-7;
    const UnitVector near_x(std::cos(eps), std::sin(eps), 0.0);
    const auto s = octa_scheme({near_x});
    const auto nbhds = decompose(s);
    REQUIRE(nbhds.size() == 1);
    const auto& nb = nbhds[0];
    CHECK(nb.center == 3);
    CHECK(nb.knowns[0] == 0); // nearest known is e_x
    CHECK(nb.weights[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(nb.weights[1] + nb.weights[2] <= 1e-6);
    CHECK(baseline_weights(nb) == nb.weights);
}

TEST_CASE("the symmetric diagonal splits weight three ways") {
    const auto s = octa_scheme({UnitVector(1, 1, 1)});
    const auto nbhds = decompose(s);
    REQUIRE(nbhds.size() == 1);
    const auto& nb = nbhds[0];
    CHECK(std::set<int>(nb.knowns.begin(), nb.knowns.end()) == std::set<int>{0, 1, 2});
    for (int k = 0; k < 3; ++k)
        CHECK(nb.weights[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    // equidistant knowns tie-break by lower HAR index
    CHECK(nb.knowns == std::array<int, 3>{0, 1, 2});
}

TEST_CASE("neighborhood structure invariants on the full scheme") {
    const NestedScheme s = build_nested(21, 61, 4000, 7);
    const auto nbhds = decompose(s);
    REQUIRE(nbhds.size() == s.unknown_count());

    const std::set<int> lar_set(s.lar_indices.begin(), s.lar_indices.end());
    const std::set<int> unk_set(s.unknown_indices.begin(), s.unknown_indices.end());
    std::set<int> lar_used;

    for (std::size_t i = 0; i < nbhds.size(); ++i) {
        const auto& nb = nbhds[i];
        CHECK(nb.center == s.unknown_indices[i]);

        const std::set<int> ks(nb.knowns.begin(), nb.knowns.end());
        CHECK(ks.size() == 3);
        for (int k : ks) {
            CHECK(lar_set.count(k) == 1);
            CHECK(k != nb.center);
            lar_used.insert(k);
        }

        double sum = 0.0;
        for (double w : nb.weights) {
            CHECK(w >= 0.0);
            sum += w;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);

        // knowns come back sorted by angle to the center
        const auto ang = [&](int idx) { return angular_distance(s.har.dir(idx), s.har.dir(nb.center)); };
        CHECK(ang(nb.knowns[0]) <= ang(nb.knowns[1]));
        CHECK(ang(nb.knowns[1]) <= ang(nb.knowns[2]));

        REQUIRE(nb.ring_count == 3);
        const std::set<int> ring(nb.ring_unknowns.begin(), nb.ring_unknowns.end());
        CHECK(ring.size() == 3);
        for (int r : ring) {
            CHECK(unk_set.count(r) == 1);
            CHECK(r != nb.center);
        }
    }
    // every LAR direction participates in at least one neighborhood
    CHECK(lar_used.size() == s.lar_count());
}

TEST_CASE("decompose agrees with exhaustive containing-triangle search") {
    const NestedScheme s = build_nested(21, 61, 4000, 7);
    const auto tri = build_triangulation(s.lar());
    const auto nbhds = decompose(s);

    int agree = 0;
    for (const auto& nb : nbhds) {
        const auto hit = exhaustive_containment(s, tri, s.har.dir(nb.center));
        const std::set<int> got(nb.knowns.begin(), nb.knowns.end());
        if (got == hit.knowns_har) ++agree;
        for (int k = 0; k < 3; ++k) {
            REQUIRE(hit.weight_by_har.count(nb.knowns[k]) == 1);
            CHECK(nb.weights[k] ==
                  doctest::Approx(hit.weight_by_har.at(nb.knowns[k])).epsilon(1e-9));
        }
    }
    CHECK(agree == static_cast<int>(nbhds.size()));
}

TEST_CASE("negated inputs decompose identically") {
    const NestedScheme s = build_nested(12, 30, 1000, 3);
    NestedScheme flipped;
    for (std::size_t i = 0; i < s.har.size(); ++i)
        flipped.har.add(i % 2 ? s.har.dir(i).negated() : s.har.dir(i), s.har.bval(i));
    flipped.lar_indices = s.lar_indices;
    flipped.unknown_indices = s.unknown_indices;

    // canonicalization already normalizes the storage...
    for (std::size_t i = 0; i < s.har.size(); ++i)
        CHECK(flipped.har.dir(i).vec() == s.har.dir(i).vec());

    // ...so the decomposition matches index for index, bit for bit
    const auto a = decompose(s);
    const auto b = decompose(flipped);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].knowns == b[i].knowns);
        CHECK(a[i].weights == b[i].weights);
        CHECK(a[i].ring_unknowns == b[i].ring_unknowns);
    }
}

TEST_CASE("sub-microradian jitter never changes a neighbor index") {
    const NestedScheme s = build_nested(21, 61, 4000, 7);
    const auto base = decompose(s);

    NestedScheme jittered;
    jittered.lar_indices = s.lar_indices;
    jittered.unknown_indices = s.unknown_indices;
    for (std::size_t i = 0; i < s.har.size(); ++i) {
        const Eigen::Vector3d d = s.har.dir(i).vec();
        Eigen::Vector3d t = d.cross(Eigen::Vector3d(0.3, -0.7, 0.64));
        t.normalize();
        const double a = 5e-7;
        jittered.har.add(UnitVector(std::cos(a) * d + std::sin(a) * t), s.har.bval(i));
    }

    const auto moved = decompose(jittered);
    REQUIRE(moved.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(moved[i].knowns == base[i].knowns);
        CHECK(moved[i].ring_unknowns == base[i].ring_unknowns);
    }
}

TEST_CASE("ideal polar hexagon alternates perfectly") {
    // pole unknown ringed by six directions at 45 deg colatitude,
    // roles alternating known/unknown around the azimuth
    NestedScheme s;
    for (int k = 0; k < 3; ++k) s.har.add(ring_dir(2.0 * kPi * k / 3.0), 1000); // L at 0,120,240
    s.har.add(UnitVector(0, 0, 1), 1000);                                       // pole, unknown
    for (int k = 0; k < 3; ++k)
        s.har.add(ring_dir(2.0 * kPi * k / 3.0 + kPi / 3.0), 1000); // U at 60,180,300
    s.lar_indices = {0, 1, 2};
    s.unknown_indices = {3, 4, 5, 6};

    const auto nbhds = decompose(s);
    const auto rep = alternation_report(s, nbhds);
    REQUIRE(rep.entries.size() == 4);

    bool found_pole = false;
    for (const auto& e : rep.entries) {
        if (e.center != 3) continue;
        found_pole = true;
        CHECK(e.complete);
        CHECK(e.fraction == 1.0);
    }
    CHECK(found_pole);
    CHECK(rep.complete_count == 4);
    CHECK(rep.aggregate >= 0.0);
    CHECK(rep.aggregate <= 1.0);
}

TEST_CASE("neighborhoods with fewer than 3 ring unknowns are incomplete") {
    const auto s = octa_scheme({UnitVector(1, 1, 1), UnitVector(1, -1, 1)});
    const auto nbhds = decompose(s);
    REQUIRE(nbhds.size() == 2);
    CHECK(nbhds[0].ring_count == 1);
    CHECK(nbhds[1].ring_count == 1);

    const auto rep = alternation_report(s, nbhds);
    CHECK(rep.complete_count == 0);
    CHECK(rep.aggregate == 0.0);
    for (const auto& e : rep.entries) CHECK_FALSE(e.complete);
}

TEST_CASE("alternation on the full scheme is a stable regression value") {
    const NestedScheme s = build_nested(21, 61, 4000, 7);
    const auto nbhds = decompose(s);
    const auto rep = alternation_report(s, nbhds);
    CHECK(rep.complete_count == 40);
    CHECK(rep.entries.size() == 40);
    for (const auto& e : rep.entries) {
        CHECK(e.fraction >= 0.0);
        CHECK(e.fraction <= 1.0);
        // role changes around a 6-cycle come in pairs
        const int changes = static_cast<int>(std::lround(e.fraction * 6.0));
        CHECK(changes % 2 == 0);
    }
    CHECK(rep.aggregate == doctest::Approx(0.89166666666666661).epsilon(1e-12));
}

TEST_CASE("neighborhood dump format") {
    TempDir tmp;
    const auto s = octa_scheme({UnitVector(1, 1, 1)});
    const auto nbhds = decompose(s);
    const auto path = tmp / "nbhd.txt";
    save_neighborhoods(nbhds, path);

    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    std::istringstream ls(line);
    int center, k1, k2, k3, u1, u2, u3;
    double w1, w2, w3;
    REQUIRE((ls >> center >> k1 >> k2 >> k3 >> w1 >> w2 >> w3 >> u1 >> u2 >> u3));
    CHECK(center == nbhds[0].center);
    CHECK(k1 == nbhds[0].knowns[0]);
    CHECK(w1 == nbhds[0].weights[0]);
    CHECK(u1 == nbhds[0].ring_unknowns[0]);
    CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("decompose rejects malformed schemes") {
    NestedScheme s;
    s.har.add(UnitVector(1, 0, 0), 1000);
    s.har.add(UnitVector(0, 1, 0), 1000);
    s.har.add(UnitVector(1, 1, 1), 1000);
    s.lar_indices = {0, 1};
    s.unknown_indices = {2};
    CHECK_THROWS_WITH_AS(decompose(s), "need at least 3 LAR directions to triangulate",
                         ValidationError);

    s.lar_indices = {0, 1, 1}; // broken partition
    CHECK_THROWS_AS(decompose(s), ValidationError);
}

} // TEST_SUITE

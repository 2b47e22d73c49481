#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "qhex/scheme.hpp"
#include "test_util.hpp"

using namespace qhex;
using qhex_test::TempDir;
using qhex_test::expect_throw_contains;
using qhex_test::write_text;

namespace {

bool same_dirs(const DirectionSet& a, const DirectionSet& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.dir(i).vec() != b.dir(i).vec() || a.bval(i) != b.bval(i)) return false;
    return true;
}

// independent re-implementation of the greedy rule, no incremental caching
DirectionSet greedy_oracle(std::size_t n, const DirectionSet& pool, const DirectionSet& fixed) {
    DirectionSet out("oracle");
    for (std::size_t i = 0; i < fixed.size(); ++i) out.add(fixed.dir(i), fixed.bval(i));
    std::vector<char> taken(pool.size(), 0);
    while (out.size() < n) {
        int best = -1;
        double best_dist = -1.0;
        for (std::size_t c = 0; c < pool.size(); ++c) {
            if (taken[c]) continue;
            double d = std::numbers::pi;
            for (std::size_t i = 0; i < out.size(); ++i)
                d = std::min(d, angular_distance(pool.dir(c), out.dir(i)));
            if (d > best_dist) {
                best_dist = d;
                best = static_cast<int>(c);
            }
        }
        REQUIRE(best >= 0);
        taken[best] = 1;
        out.add(pool.dir(best), pool.bval(best));
    }
    return out;
}

DirectionSet perturb_slot1_onto_slot0(const DirectionSet& s, double angle) {
    DirectionSet out("degenerate");
    const Eigen::Vector3d d0 = s.dir(0).vec();
    Eigen::Vector3d t = d0.cross(Eigen::Vector3d::UnitZ());
    if (t.norm() < 1e-6) t = d0.cross(Eigen::Vector3d::UnitX());
    t.normalize();
    const Eigen::Vector3d pert = (std::cos(angle) * d0 + std::sin(angle) * t).normalized();
    for (std::size_t i = 0; i < s.size(); ++i)
        out.add(i == 1 ? UnitVector(pert) : s.dir(i), s.bval(i));
    return out;
}

const std::string kHeader = "#qhex-scheme v1\n";

} // namespace

TEST_SUITE("scheme") {

TEST_CASE("greedy picks the max-min-angle candidate each step") {
    DirectionSet pool;
    pool.add(UnitVector(1, 0, 0), 1000);
    pool.add(UnitVector(0, 1, 0), 1000);
    pool.add(UnitVector(0, 0, 1), 1000);
    pool.add(UnitVector(1, 1, 0), 1000);
    DirectionSet fixed;
    fixed.add(UnitVector(1, 0, 0), 1000);

    const DirectionSet out = greedy_construct(3, pool, fixed);
    REQUIRE(out.size() == 3);
    CHECK(out.dir(0).vec() == pool.dir(0).vec());
    CHECK(out.dir(1).vec() == pool.dir(1).vec()); // e_y: pi/2, beats the diagonal's pi/4
    CHECK(out.dir(2).vec() == pool.dir(2).vec()); // e_z
}

TEST_CASE("greedy with n equal to the fixed size returns fixed unchanged") {
    DirectionSet fixed;
    fixed.add(UnitVector(1, 0, 0), 1000);
    fixed.add(UnitVector(0, 1, 1), 700);
    const DirectionSet pool = generate_candidates(50, 2);
    const DirectionSet out = greedy_construct(2, pool, fixed);
    CHECK(same_dirs(out, fixed));
}

TEST_CASE("greedy matches a brute-force oracle without incremental caching") {
    const DirectionSet pool = generate_candidates(200, 3);
    DirectionSet fixed;
    fixed.add(pool.dir(10), pool.bval(10));
    const DirectionSet fast = greedy_construct(21, pool, fixed);
    const DirectionSet slow = greedy_oracle(21, pool, fixed);
    CHECK(same_dirs(fast, slow));
}

TEST_CASE("greedy 21 from a 2000-point pool clears the coverage floor") {
    const DirectionSet pool = generate_candidates(2000, 11);
    const DirectionSet s = greedy_construct(21, pool, DirectionSet());
    const double m = min_pairwise_angle(s);
    CHECK(m >= 0.25);
    CHECK(m == doctest::Approx(0.47167107752985726).epsilon(1e-12));
}

TEST_CASE("greedy error paths") {
    DirectionSet pool;
    pool.add(UnitVector(1, 0, 0), 1000);
    pool.add(UnitVector(0, 1, 0), 1000);
    CHECK_THROWS_WITH_AS(greedy_construct(3, pool, DirectionSet()), "insufficient candidates",
                         ValidationError);

    DirectionSet fixed;
    fixed.add(UnitVector(1, 0, 0), 1000);
    fixed.add(UnitVector(0, 1, 0), 1000);
    CHECK_THROWS_AS(greedy_construct(1, pool, fixed), ValidationError);
}

TEST_CASE("greedy is deterministic") {
    const DirectionSet pool = generate_candidates(500, 17);
    const DirectionSet a = greedy_construct(21, pool, DirectionSet());
    const DirectionSet b = greedy_construct(21, pool, DirectionSet());
    CHECK(same_dirs(a, b));
}

TEST_CASE("one-opt leaves an already-optimal octahedral set unchanged") {
    DirectionSet s;
    s.add(UnitVector(1, 0, 0), 1000);
    s.add(UnitVector(0, 1, 0), 1000);
    s.add(UnitVector(0, 0, 1), 1000);
    DirectionSet pool = generate_candidates(200, 4);
    const DirectionSet out = one_opt_refine(s, pool, {});
    CHECK(same_dirs(out, s));
}

TEST_CASE("one-opt repairs a near-duplicate direction") {
    const DirectionSet pool = generate_candidates(2000, 11);
    DirectionSet r21 = greedy_construct(21, pool, DirectionSet());
    r21 = one_opt_refine(r21, pool, {});
    CHECK(min_pairwise_angle(r21) == doctest::Approx(0.47268140967797678).epsilon(1e-12));

    const DirectionSet degenerate = perturb_slot1_onto_slot0(r21, 1e-3);
    const double before = min_pairwise_angle(degenerate);
    CHECK(before == doctest::Approx(1e-3).epsilon(1e-3));

    const DirectionSet repaired = one_opt_refine(degenerate, pool, {});
    const double after = min_pairwise_angle(repaired);
    CHECK(after > before);
    CHECK(after == doctest::Approx(0.47268140967797678).epsilon(1e-12));
}

TEST_CASE("one-opt with every slot locked returns the input") {
    const DirectionSet pool = generate_candidates(300, 6);
    const DirectionSet s = greedy_construct(10, pool, DirectionSet());
    const DirectionSet degenerate = perturb_slot1_onto_slot0(s, 1e-3);
    std::vector<int> all(degenerate.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    const DirectionSet out = one_opt_refine(degenerate, pool, all);
    CHECK(same_dirs(out, degenerate));

    CHECK_THROWS_WITH_AS(one_opt_refine(s, pool, {99}), "locked index out of range",
                         ValidationError);
}

TEST_CASE("one-opt never decreases the minimum angle") {
    for (const std::uint64_t seed : {21ull, 22ull, 23ull}) {
        const DirectionSet s = greedy_construct(15, generate_candidates(300, seed), DirectionSet());
        const DirectionSet pool = generate_candidates(500, seed + 100);
        const double before = min_pairwise_angle(s);
        const DirectionSet out = one_opt_refine(s, pool, {});
        CHECK(min_pairwise_angle(out) >= before);
    }
}

TEST_CASE("small nested scheme keeps the LAR subset bitwise") {
    const NestedScheme ns = build_nested(3, 6, 500, 5);
    ns.validate();
    CHECK(ns.lar_count() == 3);
    CHECK(ns.unknown_count() == 3);
    const DirectionSet lar = ns.lar();
    for (std::size_t i = 0; i < lar.size(); ++i) {
        const int hi = ns.lar_indices[i];
        CHECK(ns.har.dir(hi).vec() == lar.dir(i).vec());
        CHECK(ns.har.bval(hi) == lar.bval(i));
    }
}

TEST_CASE("full 21/61 nested scheme") {
    const NestedScheme ns = build_nested(21, 61, 4000, 7);
    ns.validate();
    CHECK(ns.har.size() == 61);
    CHECK(ns.lar_count() == 21);
    CHECK(ns.unknown_count() == 40);

    std::set<int> covered;
    for (int i : ns.lar_indices) covered.insert(i);
    for (int i : ns.unknown_indices) covered.insert(i);
    CHECK(covered.size() == 61);
    CHECK(*covered.begin() == 0);
    CHECK(*covered.rbegin() == 60);

    const DirectionSet lar = ns.lar();
    for (std::size_t i = 0; i < lar.size(); ++i)
        CHECK(ns.har.dir(ns.lar_indices[i]).vec() == lar.dir(i).vec());

    const double lar_min = min_pairwise_angle(lar);
    const double har_min = min_pairwise_angle(ns.har);
    CHECK(har_min <= lar_min);
    CHECK(lar_min == doctest::Approx(0.47420770000206586).epsilon(1e-12));
    CHECK(har_min == doctest::Approx(0.25845877643628146).epsilon(1e-12));

    for (std::size_t i = 0; i < ns.har.size(); ++i) {
        CHECK(ns.har.bval(i) == 1000.0);
        CHECK(ns.har.dir(i).is_canonical());
    }
}

TEST_CASE("every unknown has 3 LAR neighbors strictly inside the hemisphere metric") {
    const NestedScheme ns = build_nested(21, 61, 4000, 7);
    for (int u : ns.unknown_indices) {
        std::vector<double> to_lar;
        for (int l : ns.lar_indices)
            to_lar.push_back(angular_distance(ns.har.dir(u), ns.har.dir(l)));
        std::sort(to_lar.begin(), to_lar.end());
        REQUIRE(to_lar.size() >= 3);
        CHECK(to_lar[2] < std::numbers::pi / 2);
    }
}

TEST_CASE("nested construction is deterministic") {
    const NestedScheme a = build_nested(21, 61, 4000, 7);
    const NestedScheme b = build_nested(21, 61, 4000, 7);
    CHECK(same_dirs(a.har, b.har));
    CHECK(a.lar_indices == b.lar_indices);
    CHECK(a.unknown_indices == b.unknown_indices);
}

TEST_CASE("scheme file round trip") {
    TempDir tmp;
    const auto path = tmp / "nested.scheme";
    const NestedScheme ns = build_nested(5, 12, 300, 9);
    save_scheme(ns, path);
    const NestedScheme back = load_scheme(path);

    REQUIRE(back.har.size() == ns.har.size());
    CHECK(back.lar_indices == ns.lar_indices);
    CHECK(back.unknown_indices == ns.unknown_indices);
    for (std::size_t i = 0; i < ns.har.size(); ++i) {
        CHECK(std::abs(back.har.dir(i).x() - ns.har.dir(i).x()) <= 1e-15);
        CHECK(std::abs(back.har.dir(i).y() - ns.har.dir(i).y()) <= 1e-15);
        CHECK(std::abs(back.har.dir(i).z() - ns.har.dir(i).z()) <= 1e-15);
        CHECK(back.har.bval(i) == ns.har.bval(i));
    }

    // saving the loaded scheme reproduces the file byte for byte
    const auto path2 = tmp / "nested2.scheme";
    save_scheme(back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
}

TEST_CASE("scheme file validation errors carry line numbers") {
    TempDir tmp;
    const auto p = tmp / "bad.scheme";

    write_text(p, "#wrong header\nL 1 0 0 1000\n");
    expect_throw_contains<ValidationError>([&] { load_scheme(p); }, "line 1");

    write_text(p, kHeader + "L 1 0 0 1000\nL 0 1\n");
    expect_throw_contains<ValidationError>([&] { load_scheme(p); },
                                           "line 3: malformed direction line");

    write_text(p, kHeader + "X 1 0 0 1000\n");
    expect_throw_contains<ValidationError>([&] { load_scheme(p); }, "malformed direction line");

    write_text(p, kHeader + "L 0 0 0.5 1000\n");
    expect_throw_contains<ValidationError>([&] { load_scheme(p); }, "non-unit direction");

    write_text(p, kHeader + "L 1 0 0 1000\nU -1 0 0 1000\n");
    expect_throw_contains<ValidationError>([&] { load_scheme(p); }, "antipodal duplicate");

    write_text(p, kHeader + "L 1 0 0 -5\n");
    expect_throw_contains<ValidationError>([&] { load_scheme(p); }, "negative b-value");

    write_text(p, "");
    expect_throw_contains<ValidationError>([&] { load_scheme(p); }, "empty scheme file");

    write_text(p, kHeader);
    expect_throw_contains<ValidationError>([&] { load_scheme(p); }, "no directions");

    CHECK_THROWS_AS(load_scheme(tmp / "missing.scheme"), IoError);
}

} // TEST_SUITE

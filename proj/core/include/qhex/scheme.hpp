#ifndef QHEX_SCHEME_HPP
#define QHEX_SCHEME_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "qhex/geometry.hpp"

namespace qhex {

// Nested gradient scheme: a dense HAR set whose first part is the LAR subset.
// lar_indices and unknown_indices partition 0..|har|-1.
struct NestedScheme {
    DirectionSet har;
    std::vector<int> lar_indices;
    std::vector<int> unknown_indices;

    std::size_t lar_count() const { return lar_indices.size(); }
    std::size_t unknown_count() const { return unknown_indices.size(); }

    // The LAR directions as their own set (bvals carried over).
    DirectionSet lar() const;

    // Throws ValidationError if the partition is inconsistent.
    void validate() const;
};

// Greedy incremental max-min-angle construction. Starts from `fixed` (kept
// verbatim, in order) and repeatedly adds the pool candidate maximizing the
// minimum angular distance to the selected set; ties break to the lowest pool
// index. Throws ValidationError("insufficient candidates") when the pool
// runs out of distinct points.
DirectionSet greedy_construct(std::size_t n, const DirectionSet& pool, const DirectionSet& fixed);

// Steepest-ascent 1-opt: per round, applies the single swap (unlocked slot,
// pool candidate) that most increases the minimum pairwise angle; stops at a
// fixed point or after max_rounds. Never decreases the minimum angle.
DirectionSet one_opt_refine(const DirectionSet& s, const DirectionSet& pool,
                            const std::vector<int>& locked, int max_rounds = 50);

// LAR by greedy + 1-opt, then HAR by greedy with LAR fixed + 1-opt with LAR
// locked. Pool is a jittered Fibonacci lattice from (pool_size, seed).
NestedScheme build_nested(std::size_t n_lar, std::size_t n_har, std::size_t pool_size,
                          std::uint64_t seed, double bval = 1000.0);

// Text scheme file: "#qhex-scheme v1" header, then "role gx gy gz bval" per
// direction with role L (LAR) or U (unknown), %.17g components.
void save_scheme(const NestedScheme& s, const std::filesystem::path& path);
NestedScheme load_scheme(const std::filesystem::path& path);

} // namespace qhex

#endif

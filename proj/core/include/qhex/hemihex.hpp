#ifndef QHEX_HEMIHEX_HPP
#define QHEX_HEMIHEX_HPP

#include <array>
#include <filesystem>
#include <vector>

#include "qhex/scheme.hpp"

namespace qhex {

// One unknown direction with its training geometry: the 3 LAR vertices of the
// Delaunay triangle containing it (with barycentric weights), plus the 3
// nearest other unknowns forming the rest of the hexagonal ring (diagnostics
// only, not used for training).
struct HemiHexNeighborhood {
    int center = -1;                          // HAR index of the unknown
    std::array<int, 3> knowns{-1, -1, -1};    // HAR indices of LAR members,
                                              // sorted by angle to center
    std::array<double, 3> weights{0, 0, 0};   // barycentric, >= 0, sum 1
    std::array<int, 3> ring_unknowns{-1, -1, -1};
    int ring_count = 0;                       // < 3 only for tiny schemes
};

// One neighborhood per unknown, in unknown-index order. Knowns come from the
// containing triangle of the LAR triangulation; requires |lar| >= 3.
std::vector<HemiHexNeighborhood> decompose(const NestedScheme& s);

// How hexagonal the ring really is: ring members sorted by azimuth in the
// tangent plane at the center, fraction of adjacent (cyclic) pairs whose
// known/unknown roles differ. 1.0 means strict K/U alternation.
struct AlternationReport {
    struct Entry {
        int center = -1;
        double fraction = 0.0;
        bool complete = false;
    };
    std::vector<Entry> entries;
    double aggregate = 0.0; // mean over complete neighborhoods
    int complete_count = 0;
};

AlternationReport alternation_report(const NestedScheme& s,
                                     const std::vector<HemiHexNeighborhood>& nbhds);

// The linear spherical-interpolation baseline: predict the center signal as
// sum_i w_i * s(known_i).
std::array<double, 3> baseline_weights(const HemiHexNeighborhood& nbhd);

// Text dump, one line per unknown: "center k1 k2 k3 w1 w2 w3 u1 u2 u3".
void save_neighborhoods(const std::vector<HemiHexNeighborhood>& nbhds,
                        const std::filesystem::path& path);

} // namespace qhex

#endif

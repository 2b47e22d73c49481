#include "qhex/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qhex/io_util.hpp"

namespace qhex {

namespace {
constexpr double kDuplicateAngle = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

DirectionSet NestedScheme::lar() const {
    DirectionSet out(har.label() + "-lar");
    for (int i : lar_indices) out.add(har.dir(i), har.bval(i));
    return out;
}

void NestedScheme::validate() const {
    if (lar_indices.size() + unknown_indices.size() != har.size())
        throw ValidationError("scheme partition does not cover the HAR set");
    std::vector<char> seen(har.size(), 0);
    for (int i : lar_indices) {
        if (i < 0 || static_cast<std::size_t>(i) >= har.size() || seen[i])
            throw ValidationError("invalid LAR index partition");
        seen[i] = 1;
    }
    for (int i : unknown_indices) {
        if (i < 0 || static_cast<std::size_t>(i) >= har.size() || seen[i])
            throw ValidationError("invalid unknown index partition");
        seen[i] = 1;
    }
}

DirectionSet greedy_construct(std::size_t n, const DirectionSet& pool, const DirectionSet& fixed) {
    if (n < fixed.size()) throw ValidationError("target size smaller than fixed set");

    DirectionSet out("greedy");
    for (std::size_t i = 0; i < fixed.size(); ++i) out.add(fixed.dir(i), fixed.bval(i));
    if (out.size() == n) return out;

    // mindist[c] = min angular distance from pool[c] to the selected set
    std::vector<double> mindist(pool.size(), kInf);
    std::vector<char> taken(pool.size(), 0);
    for (std::size_t c = 0; c < pool.size(); ++c)
        for (std::size_t i = 0; i < out.size(); ++i)
            mindist[c] = std::min(mindist[c], angular_distance(pool.dir(c), out.dir(i)));

    while (out.size() < n) {
        int best = -1;
        double bestDist = -1.0;
        for (std::size_t c = 0; c < pool.size(); ++c) {
            if (taken[c]) continue;
            if (mindist[c] > bestDist) {
                bestDist = mindist[c];
                best = static_cast<int>(c);
            }
        }
        if (best < 0 || bestDist <= kDuplicateAngle)
            throw ValidationError("insufficient candidates");
        taken[best] = 1;
        out.add(pool.dir(best), pool.bval(best));
        const UnitVector& added = out.dir(out.size() - 1);
        for (std::size_t c = 0; c < pool.size(); ++c) {
            if (taken[c]) continue;
            mindist[c] = std::min(mindist[c], angular_distance(pool.dir(c), added));
        }
    }
    return out;
}

DirectionSet one_opt_refine(const DirectionSet& s, const DirectionSet& pool,
                            const std::vector<int>& locked, int max_rounds) {
    const std::size_t n = s.size();
    for (int i : locked)
        if (i < 0 || static_cast<std::size_t>(i) >= n)
            throw ValidationError("locked index out of range");
    if (n < 2) return s;

    std::vector<char> is_locked(n, 0);
    for (int i : locked) is_locked[i] = 1;

    std::vector<UnitVector> dirs = s.dirs();
    std::vector<double> bvals = s.bvals();

    for (int round = 0; round < max_rounds; ++round) {
        // all pairwise angles, sorted ascending, to get per-slot minima fast
        struct Pair { double ang; int i, j; };
        std::vector<Pair> pairs;
        pairs.reserve(n * (n - 1) / 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                pairs.push_back({angular_distance(dirs[i], dirs[j]),
                                 static_cast<int>(i), static_cast<int>(j)});
        std::sort(pairs.begin(), pairs.end(),
                  [](const Pair& a, const Pair& b) { return a.ang < b.ang; });
        const double current_min = pairs.front().ang;

        // min pairwise angle among pairs not touching slot i
        std::vector<double> min_excluding(n, kInf);
        for (std::size_t i = 0; i < n; ++i) {
            for (const Pair& p : pairs) {
                if (p.i != static_cast<int>(i) && p.j != static_cast<int>(i)) {
                    min_excluding[i] = p.ang;
                    break;
                }
            }
        }

        // for each candidate: two smallest angles to current slots
        struct Best2 { double a1 = kInf, a2 = kInf; int j1 = -1; };
        std::vector<Best2> cand(pool.size());
        for (std::size_t c = 0; c < pool.size(); ++c) {
            Best2 b;
            for (std::size_t j = 0; j < n; ++j) {
                const double a = angular_distance(pool.dir(c), dirs[j]);
                if (a < b.a1) {
                    b.a2 = b.a1;
                    b.a1 = a;
                    b.j1 = static_cast<int>(j);
                } else if (a < b.a2) {
                    b.a2 = a;
                }
            }
            cand[c] = b;
        }

        double best_gain = current_min;
        int best_slot = -1, best_cand = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_locked[i]) continue;
            for (std::size_t c = 0; c < pool.size(); ++c) {
                const double to_rest = cand[c].j1 == static_cast<int>(i) ? cand[c].a2 : cand[c].a1;
                const double new_min = std::min(min_excluding[i], to_rest);
                if (new_min > best_gain) {
                    best_gain = new_min;
                    best_slot = static_cast<int>(i);
                    best_cand = static_cast<int>(c);
                }
            }
        }
        if (best_slot < 0) break; // fixed point
        dirs[best_slot] = pool.dir(best_cand).canonicalized();
        bvals[best_slot] = pool.bval(best_cand);
    }

    DirectionSet out(s.label());
    for (std::size_t i = 0; i < n; ++i) out.add(dirs[i], bvals[i]);
    return out;
}

NestedScheme build_nested(std::size_t n_lar, std::size_t n_har, std::size_t pool_size,
                          std::uint64_t seed, double bval) {
    if (n_lar >= n_har) throw ValidationError("LAR size must be smaller than HAR size");
    const DirectionSet pool = generate_candidates(pool_size, seed, bval);

    DirectionSet lar = greedy_construct(n_lar, pool, DirectionSet());
    lar = one_opt_refine(lar, pool, {});

    DirectionSet har = greedy_construct(n_har, pool, lar);
    std::vector<int> lar_idx(n_lar);
    for (std::size_t i = 0; i < n_lar; ++i) lar_idx[i] = static_cast<int>(i);
    har = one_opt_refine(har, pool, lar_idx);
    har.set_label("qhex-nested");

    NestedScheme out;
    out.har = har;
    out.lar_indices = lar_idx;
    out.unknown_indices.resize(n_har - n_lar);
    for (std::size_t i = n_lar; i < n_har; ++i)
        out.unknown_indices[i - n_lar] = static_cast<int>(i);
    out.validate();
    return out;
}

void save_scheme(const NestedScheme& s, const std::filesystem::path& path) {
    s.validate();
    std::vector<char> role(s.har.size(), 'U');
    for (int i : s.lar_indices) role[i] = 'L';

    std::ostringstream os;
    os << "#qhex-scheme v1\n";
    char buf[128];
    for (std::size_t i = 0; i < s.har.size(); ++i) {
        const UnitVector& d = s.har.dir(i);
        std::snprintf(buf, sizeof(buf), "%c %.17g %.17g %.17g %.17g\n",
                      role[i], d.x(), d.y(), d.z(), s.har.bval(i));
        os << buf;
    }
    write_file_atomic(path, os.str());
}

NestedScheme load_scheme(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scheme file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty scheme file");
    if (line != "#qhex-scheme v1")
        throw ValidationError(path.string() + ": line 1: unsupported scheme header '" + line + "'");

    NestedScheme out;
    out.har.set_label(path.stem().string());
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        char role = 0;
        double x = 0, y = 0, z = 0, b = 0;
        if (!(ls >> role >> x >> y >> z >> b) || (role != 'L' && role != 'U'))
            throw ValidationError(path.string() + ": line " + std::to_string(lineno) +
                                  ": malformed direction line");
        const double norm = std::sqrt(x * x + y * y + z * z);
        if (std::abs(norm - 1.0) > 1e-6)
            throw ValidationError(path.string() + ": line " + std::to_string(lineno) +
                                  ": non-unit direction (norm " + std::to_string(norm) + ")");
        if (b < 0.0)
            throw ValidationError(path.string() + ": line " + std::to_string(lineno) +
                                  ": negative b-value");
        try {
            out.har.add(UnitVector(x, y, z), b);
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ": line " + std::to_string(lineno) + ": " +
                                  e.what());
        }
        const int idx = static_cast<int>(out.har.size()) - 1;
        if (role == 'L')
            out.lar_indices.push_back(idx);
        else
            out.unknown_indices.push_back(idx);
    }
    if (out.har.empty()) throw ValidationError(path.string() + ": no directions in scheme file");
    out.validate();
    return out;
}

} // namespace qhex

#include "qhex/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qhex/rng.hpp"

namespace qhex {

namespace {

constexpr double kDuplicateAngle = 1e-9;

bool canonical_sign(const Eigen::Vector3d& v) {
    if (v.z() != 0.0) return v.z() > 0.0;
    if (v.y() != 0.0) return v.y() > 0.0;
    return v.x() > 0.0;
}

} // namespace

UnitVector::UnitVector(double x, double y, double z) : UnitVector(Eigen::Vector3d(x, y, z)) {}

UnitVector::UnitVector(const Eigen::Vector3d& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw ValidationError("cannot normalize zero or non-finite vector");
    // keep already-unit input verbatim so parse/serialize cycles are stable
    v_ = std::abs(n - 1.0) <= 1e-12 ? v : v / n;
}

bool UnitVector::is_canonical() const {
    return canonical_sign(v_);
}

UnitVector UnitVector::canonicalized() const {
    if (is_canonical()) return *this;
    UnitVector out = *this;
    out.v_ = -out.v_; // exact flip; already unit norm
    return out;
}

double angular_distance(const UnitVector& u, const UnitVector& v) {
    const double d = std::min(1.0, std::abs(u.vec().dot(v.vec())));
    return std::acos(d);
}

void DirectionSet::add(const UnitVector& d, double bval) {
    if (bval < 0.0) throw ValidationError("negative b-value");
    const UnitVector c = d.canonicalized();
    for (const UnitVector& e : dirs_) {
        if (angular_distance(c, e) <= kDuplicateAngle)
            throw ValidationError("antipodal duplicate");
    }
    dirs_.push_back(c);
    bvals_.push_back(bval);
}

double min_pairwise_angle(const std::vector<UnitVector>& dirs) {
    if (dirs.size() < 2) throw ValidationError("degenerate set");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = i + 1; j < dirs.size(); ++j)
            best = std::min(best, angular_distance(dirs[i], dirs[j]));
    return best;
}

double min_pairwise_angle(const DirectionSet& s) {
    return min_pairwise_angle(s.dirs());
}

// ---------------------------------------------------------------------------
// Convex hull of the symmetrized point set.
//
// All input points lie on the unit sphere, so every non-duplicate point is a
// hull vertex. Incremental insertion: find the faces visible from the new
// point, remove them, and re-triangulate the horizon loop against the point.
// ---------------------------------------------------------------------------

namespace {

struct HullFace {
    std::array<int, 3> v;
    Eigen::Vector3d normal; // outward, unnormalized (cross product)
    double offset;          // plane offset: normal . x = offset
    bool alive = true;
};

double det3(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    return a.dot(b.cross(c));
}

class IncrementalHull {
public:
    explicit IncrementalHull(const std::vector<Eigen::Vector3d>& pts) : pts_(pts) {}

    std::vector<std::array<int, 3>> run() {
        const int n = static_cast<int>(pts_.size());
        if (n < 4) throw ValidationError("degenerate configuration");
        init_simplex();
        for (int i = 0; i < n; ++i) {
            if (used_[i]) continue;
            insert(i);
        }
        std::vector<std::array<int, 3>> out;
        for (const HullFace& f : faces_)
            if (f.alive) out.push_back(f.v);
        return out;
    }

private:
    static constexpr double kVisEps = 1e-10;

    void add_face(int a, int b, int c) {
        HullFace f;
        f.v = {a, b, c};
        f.normal = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
        f.offset = f.normal.dot(pts_[a]);
        faces_.push_back(f);
    }

    void init_simplex() {
        const int n = static_cast<int>(pts_.size());
        int p0 = 0, p1 = -1, p2 = -1, p3 = -1;
        double best = 0.0;
        for (int i = 1; i < n; ++i) {
            const double d = (pts_[i] - pts_[p0]).squaredNorm();
            if (d > best) { best = d; p1 = i; }
        }
        if (p1 < 0 || best < 1e-20) throw ValidationError("degenerate configuration");
        best = 0.0;
        for (int i = 0; i < n; ++i) {
            if (i == p0 || i == p1) continue;
            const double a = (pts_[p1] - pts_[p0]).cross(pts_[i] - pts_[p0]).squaredNorm();
            if (a > best) { best = a; p2 = i; }
        }
        if (p2 < 0 || best < 1e-20) throw ValidationError("degenerate configuration");
        const Eigen::Vector3d nrm = (pts_[p1] - pts_[p0]).cross(pts_[p2] - pts_[p0]);
        best = 0.0;
        for (int i = 0; i < n; ++i) {
            if (i == p0 || i == p1 || i == p2) continue;
            const double v = std::abs(nrm.dot(pts_[i] - pts_[p0]));
            if (v > best) { best = v; p3 = i; }
        }
        if (p3 < 0 || best < 1e-12) throw ValidationError("degenerate configuration");

        // orient so all four faces point away from the simplex centroid
        const Eigen::Vector3d centroid = (pts_[p0] + pts_[p1] + pts_[p2] + pts_[p3]) / 4.0;
        const std::array<std::array<int, 3>, 4> tets = {{{p0, p1, p2}, {p0, p1, p3}, {p0, p2, p3}, {p1, p2, p3}}};
        for (const auto& t : tets) {
            Eigen::Vector3d nn = (pts_[t[1]] - pts_[t[0]]).cross(pts_[t[2]] - pts_[t[0]]);
            if (nn.dot(centroid - pts_[t[0]]) > 0.0)
                add_face(t[0], t[2], t[1]);
            else
                add_face(t[0], t[1], t[2]);
        }
        used_.assign(pts_.size(), false);
        used_[p0] = used_[p1] = used_[p2] = used_[p3] = true;
    }

    void insert(int p) {
        std::vector<int> visible;
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            if (!faces_[f].alive) continue;
            if (faces_[f].normal.dot(pts_[p]) - faces_[f].offset > kVisEps)
                visible.push_back(static_cast<int>(f));
        }
        if (visible.empty()) {
            // On the sphere this means a duplicate or a point on a supporting
            // plane patch; callers validate full vertex coverage afterwards.
            return;
        }
        // horizon = directed edges of visible faces whose reversal is not visible
        std::vector<std::pair<int, int>> horizon;
        auto edge_in_visible = [&](int a, int b) {
            for (int fi : visible) {
                const auto& v = faces_[fi].v;
                for (int k = 0; k < 3; ++k)
                    if (v[k] == a && v[(k + 1) % 3] == b) return true;
            }
            return false;
        };
        for (int fi : visible) {
            const auto& v = faces_[fi].v;
            for (int k = 0; k < 3; ++k) {
                const int a = v[k], b = v[(k + 1) % 3];
                if (!edge_in_visible(b, a)) horizon.emplace_back(a, b);
            }
        }
        for (int fi : visible) faces_[fi].alive = false;
        for (const auto& [a, b] : horizon) add_face(a, b, p);
        used_[p] = true;
    }

    const std::vector<Eigen::Vector3d>& pts_;
    std::vector<HullFace> faces_;
    std::vector<bool> used_;
};

} // namespace

SphericalTriangulation SphericalTriangulation::build(const DirectionSet& s) {
    SphericalTriangulation t;
    t.verts_ = s;
    const std::size_t n = s.size();
    if (n < 2) throw ValidationError("degenerate configuration");
    t.points_.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) t.points_.push_back(s.dir(i).vec());
    for (std::size_t i = 0; i < n; ++i) t.points_.push_back(-s.dir(i).vec());

    IncrementalHull hull(t.points_);
    t.faces_ = hull.run();
    std::sort(t.faces_.begin(), t.faces_.end());

    // validate: closed manifold, every symmetrized point a vertex
    std::vector<int> degree(t.points_.size(), 0);
    std::size_t edges = t.symmetrized_edge_count();
    for (const auto& f : t.faces_)
        for (int k = 0; k < 3; ++k) degree[f[k]]++;
    for (std::size_t i = 0; i < t.points_.size(); ++i)
        if (degree[i] == 0) throw ValidationError("degenerate configuration");
    if (t.points_.size() + t.faces_.size() != edges + 2)
        throw ValidationError("degenerate configuration");
    return t;
}

std::array<int, 3> SphericalTriangulation::face(std::size_t f) const {
    const int n = static_cast<int>(verts_.size());
    const auto& fv = faces_[f];
    return {fv[0] % n, fv[1] % n, fv[2] % n};
}

Eigen::Vector3d SphericalTriangulation::corner(std::size_t f, int j) const {
    return points_[faces_[f][j]];
}

std::size_t SphericalTriangulation::symmetrized_edge_count() const {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(faces_.size() * 3);
    for (const auto& f : faces_) {
        for (int k = 0; k < 3; ++k) {
            int a = f[k], b = f[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edges.emplace_back(a, b);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges.size();
}

SphericalTriangulation::Containment SphericalTriangulation::locate(const UnitVector& q) const {
    constexpr double kContainTol = -1e-9;
    const int n = static_cast<int>(verts_.size());

    auto try_point = [&](const Eigen::Vector3d& p, Containment& out) {
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            const Eigen::Vector3d a = points_[faces_[f][0]];
            const Eigen::Vector3d b = points_[faces_[f][1]];
            const Eigen::Vector3d c = points_[faces_[f][2]];
            // gnomonic barycentric coordinates: solve [a b c] w = p
            const double w0 = det3(p, b, c);
            const double w1 = det3(a, p, c);
            const double w2 = det3(a, b, p);
            const double sum = w0 + w1 + w2;
            if (!(sum > 1e-12)) continue;
            const double n0 = w0 / sum, n1 = w1 / sum, n2 = w2 / sum;
            if (n0 < kContainTol || n1 < kContainTol || n2 < kContainTol) continue;
            double c0 = std::clamp(n0, 0.0, 1.0);
            double c1 = std::clamp(n1, 0.0, 1.0);
            double c2 = std::clamp(n2, 0.0, 1.0);
            const double cs = c0 + c1 + c2;
            out.face = f;
            out.vertices = {faces_[f][0] % n, faces_[f][1] % n, faces_[f][2] % n};
            out.weights = {c0 / cs, c1 / cs, c2 / cs};
            return true;
        }
        return false;
    };

    // exact sign flip keeps locate(q) and locate(-q) bitwise identical
    Eigen::Vector3d p = q.vec();
    if (!canonical_sign(p)) p = -p;

    Containment out;
    if (try_point(p, out)) return out;
    if (try_point(-p, out)) return out;
    throw ValidationError("triangulation gap");
}

double SphericalTriangulation::total_area() const {
    // van Oosterom-Strackee solid angle per face
    double total = 0.0;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        const Eigen::Vector3d a = points_[faces_[f][0]];
        const Eigen::Vector3d b = points_[faces_[f][1]];
        const Eigen::Vector3d c = points_[faces_[f][2]];
        const double num = std::abs(det3(a, b, c));
        const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
        total += 2.0 * std::atan2(num, den);
    }
    return total;
}

SphericalTriangulation build_triangulation(const DirectionSet& s) {
    return SphericalTriangulation::build(s);
}

SphericalTriangulation::Containment containing_triangle(const SphericalTriangulation& t,
                                                        const UnitVector& q) {
    return t.locate(q);
}

DirectionSet generate_candidates(std::size_t n, std::uint64_t seed, double bval) {
    if (n < 1) throw ValidationError("candidate count must be >= 1");
    DirectionSet out("fibonacci-pool");
    Rng rng(seed);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    // tangential jitter small relative to the lattice spacing ~ sqrt(2*pi/n)
    const double sigma = 0.1 * std::sqrt(2.0 * std::numbers::pi / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double z = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double theta = golden * static_cast<double>(i);
        Eigen::Vector3d p(r * std::cos(theta), r * std::sin(theta), z);
        const double g1 = rng.next_normal();
        const double g2 = rng.next_normal();
        // tangent frame at p
        const Eigen::Vector3d axis = std::abs(p.z()) < 0.9 ? Eigen::Vector3d::UnitZ()
                                                           : Eigen::Vector3d::UnitX();
        const Eigen::Vector3d t1 = (axis - axis.dot(p) * p).normalized();
        const Eigen::Vector3d t2 = p.cross(t1);
        p = (p + sigma * (g1 * t1 + g2 * t2)).normalized();
        out.add(UnitVector(p), bval);
    }
    return out;
}

} // namespace qhex

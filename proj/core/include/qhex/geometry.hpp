#ifndef QHEX_GEOMETRY_HPP
#define QHEX_GEOMETRY_HPP

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qhex/error.hpp"

namespace qhex {

// Unit vector on the sphere. Diffusion gradients are antipodally symmetric,
// so g and -g encode the same measurement; the canonical representative lives
// on the upper hemisphere (z > 0, with ties broken by y then x).
class UnitVector {
public:
    UnitVector(double x, double y, double z);
    explicit UnitVector(const Eigen::Vector3d& v);

    double x() const { return v_.x(); }
    double y() const { return v_.y(); }
    double z() const { return v_.z(); }
    const Eigen::Vector3d& vec() const { return v_; }

    bool is_canonical() const;
    UnitVector canonicalized() const;
    UnitVector negated() const { return UnitVector(-v_); }

private:
    Eigen::Vector3d v_;
};

// Angular distance under the antipodal metric: arccos(min(1,|u.v|)), in [0, pi/2].
double angular_distance(const UnitVector& u, const UnitVector& v);

// Ordered q-space sampling scheme: canonical hemisphere directions plus b-values.
// Directions are pairwise distinct under the antipodal metric.
class DirectionSet {
public:
    DirectionSet() = default;
    explicit DirectionSet(std::string label) : label_(std::move(label)) {}

    // Canonicalizes before storing; throws ValidationError on an antipodal
    // duplicate (angular distance <= 1e-9) or a negative b-value.
    void add(const UnitVector& d, double bval);

    std::size_t size() const { return dirs_.size(); }
    bool empty() const { return dirs_.empty(); }
    const UnitVector& dir(std::size_t i) const { return dirs_[i]; }
    double bval(std::size_t i) const { return bvals_[i]; }
    const std::vector<UnitVector>& dirs() const { return dirs_; }
    const std::vector<double>& bvals() const { return bvals_; }

    const std::string& label() const { return label_; }
    void set_label(std::string l) { label_ = std::move(l); }

private:
    std::vector<UnitVector> dirs_;
    std::vector<double> bvals_;
    std::string label_;
};

// Minimum pairwise angular distance; the coverage quality of a scheme.
// Throws ValidationError("degenerate set") for fewer than 2 directions.
double min_pairwise_angle(const DirectionSet& s);
double min_pairwise_angle(const std::vector<UnitVector>& dirs);

// Delaunay triangulation of the sphere, realized as the convex hull of the
// antipodally symmetrized point set {+d, -d}. Faces tile the whole sphere;
// face vertex indices map back to canonical directions.
class SphericalTriangulation {
public:
    struct Containment {
        std::size_t face;              // index into faces()
        std::array<int, 3> vertices;   // canonical direction indices
        std::array<double, 3> weights; // clamped to [0,1], sum 1
    };

    static SphericalTriangulation build(const DirectionSet& s);

    const DirectionSet& vertices() const { return verts_; }
    std::size_t face_count() const { return faces_.size(); }

    // Canonical direction indices of face f.
    std::array<int, 3> face(std::size_t f) const;
    // Actual position of corner j of face f on the sphere (may be an antipode
    // of the canonical direction).
    Eigen::Vector3d corner(std::size_t f, int j) const;

    // Face whose gnomonic barycentric weights for q are all >= -1e-9; ties
    // (edge/vertex hits) resolved by lowest face index. Throws
    // ValidationError("triangulation gap") if no face qualifies.
    Containment locate(const UnitVector& q) const;

    // Sum of spherical face areas; 4*pi for a valid tiling.
    double total_area() const;

    // Counts over the symmetrized sphere, for Euler characteristic checks.
    std::size_t symmetrized_vertex_count() const { return points_.size(); }
    std::size_t symmetrized_edge_count() const;

private:
    DirectionSet verts_;
    std::vector<Eigen::Vector3d> points_;        // 2n symmetrized points
    std::vector<std::array<int, 3>> faces_;      // indices into points_
};

SphericalTriangulation build_triangulation(const DirectionSet& s);
SphericalTriangulation::Containment containing_triangle(const SphericalTriangulation& t,
                                                        const UnitVector& q);

// Deterministic candidate pool: spherical Fibonacci lattice on the hemisphere,
// jittered by the seeded generator, canonicalized.
DirectionSet generate_candidates(std::size_t n, std::uint64_t seed, double bval = 1000.0);

} // namespace qhex

#endif

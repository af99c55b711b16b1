#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace hifu {

/// Boundary segments of the computational domain: the transducer-facing
/// curved bottom (GammaB), the top face (GammaA), and the two side walls.
enum class BoundaryTag : std::uint8_t { GammaA, GammaB, Wall };

[[nodiscard]] std::string_view to_string(BoundaryTag tag);
/// Throws ParseError on an unknown name.
[[nodiscard]] BoundaryTag parse_boundary_tag(std::string_view name);

struct Point2 {
    double x1 = 0.0;
    double x2 = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

using Triangle = std::array<std::size_t, 3>;

struct BoundaryEdge {
    std::array<std::size_t, 2> v;  // ordered as in the owning counter-clockwise triangle
    BoundaryTag tag;
};

/// Conforming triangulation with tagged boundary edges. Immutable once built;
/// the constructor validates orientation, index ranges and boundary closure.
class Mesh {
public:
    Mesh() = default;
    Mesh(std::vector<Point2> vertices, std::vector<Triangle> triangles, std::vector<BoundaryEdge> boundary);

    [[nodiscard]] const std::vector<Point2>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    [[nodiscard]] const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_; }

    [[nodiscard]] std::size_t num_vertices() const noexcept { return vertices_.size(); }
    [[nodiscard]] std::size_t num_triangles() const noexcept { return triangles_.size(); }
    [[nodiscard]] std::size_t num_edges() const noexcept { return num_edges_; }

    [[nodiscard]] double signed_area(std::size_t k) const;
    [[nodiscard]] Point2 centroid(std::size_t k) const;
    [[nodiscard]] double total_area() const;
    [[nodiscard]] bool has_tag(BoundaryTag tag) const;
    [[nodiscard]] double boundary_length(BoundaryTag tag) const;
    /// Smallest interior angle over all triangles, in degrees.
    [[nodiscard]] double min_angle_degrees() const;

private:
    void validate();

    std::vector<Point2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> boundary_;
    std::size_t num_edges_ = 0;
};

/// Geometry of the treatment domain: the rectangle [-0.04, 0.04] x [0, 0.12] m
/// joined to the circular cap x1^2 + (x2 - 0.03)^2 <= 0.05^2, x2 <= 0.
struct DomainGeometry {
    static constexpr double half_width = 0.04;
    static constexpr double top = 0.12;
    static constexpr double arc_center_x2 = 0.03;
    static constexpr double arc_radius = 0.05;
    static constexpr double focal_min_x2 = 0.02;
    static constexpr double focal_max_x2 = 0.05;

    [[nodiscard]] static constexpr double bottom() { return arc_center_x2 - arc_radius; }
    /// Angle subtended by the arc at its centre (radians).
    [[nodiscard]] static double arc_angle();
    [[nodiscard]] static double arc_length();
    [[nodiscard]] static double cap_area();
    [[nodiscard]] static double area();
    [[nodiscard]] static bool contains(Point2 p, double tol = 1e-12);
};

/// Triangulates the treatment domain with edges of roughly `target_edge_length`
/// metres. The left half is seeded (boundary points plus a hexagonal interior
/// lattice), Delaunay-triangulated and mirrored, so the result is
/// exactly symmetric about x1 = 0. Throws DomainError unless
/// 0 < target_edge_length <= 0.02 and ResourceError above ~2e7 triangles.
[[nodiscard]] Mesh build_domain_mesh(double target_edge_length);

/// Structured right-triangle mesh of [x0,x1] x [y0,y1]; bottom edge GammaB,
/// top edge GammaA, sides Wall. Used by the verification studies.
[[nodiscard]] Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, std::size_t nx, std::size_t ny);

// ASCII mesh format:
//   hifumesh 1
//   V <count>      followed by "x1 x2" lines
//   T <count>      followed by "i j k" lines (0-based)
//   B <count>      followed by "i j TAG" lines, TAG in {GammaA, GammaB, Wall}
void write_mesh(const Mesh& mesh, std::ostream& out);
[[nodiscard]] Mesh read_mesh(std::istream& in);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
[[nodiscard]] Mesh load_mesh(const std::filesystem::path& path);

}  // namespace hifu

#include "hifu/mesh.hpp"

#include "hifu/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

namespace hifu {

std::string_view to_string(BoundaryTag tag) {
    switch (tag) {
        case BoundaryTag::GammaA: return "GammaA";
        case BoundaryTag::GammaB: return "GammaB";
        case BoundaryTag::Wall: return "Wall";
    }
    return "Wall";
}

BoundaryTag parse_boundary_tag(std::string_view name) {
    if (name == "GammaA") return BoundaryTag::GammaA;
    if (name == "GammaB") return BoundaryTag::GammaB;
    if (name == "Wall") return BoundaryTag::Wall;
    throw ParseError(fmt::format("unknown boundary tag '{}'", name), 0);
}

// -----------------------------------------------------------------------------
// Mesh
// -----------------------------------------------------------------------------

namespace {

double orient(const Point2& a, const Point2& b, const Point2& c) {
    return (b.x1 - a.x1) * (c.x2 - a.x2) - (b.x2 - a.x2) * (c.x1 - a.x1);
}

std::uint64_t edge_key(std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

}  // namespace

Mesh::Mesh(std::vector<Point2> vertices, std::vector<Triangle> triangles, std::vector<BoundaryEdge> boundary)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), boundary_(std::move(boundary)) {
    validate();
}

void Mesh::validate() {
    const std::size_t nv = vertices_.size();
    if (nv >= (std::size_t{1} << 32)) throw ValidationError("vertices", "too many vertices");
    for (std::size_t i = 0; i < nv; ++i) {
        if (!std::isfinite(vertices_[i].x1) || !std::isfinite(vertices_[i].x2))
            throw ValidationError("vertices", fmt::format("vertex {} is not finite", i));
    }
    if (triangles_.empty()) throw ValidationError("triangles", "mesh has no triangles");

    struct HalfEdge {
        std::uint64_t key;
        std::size_t from;
        std::size_t to;
    };
    std::vector<HalfEdge> half;
    half.reserve(3 * triangles_.size());
    for (std::size_t k = 0; k < triangles_.size(); ++k) {
        const auto& t = triangles_[k];
        for (std::size_t i : t) {
            if (i >= nv)
                throw ValidationError("triangles",
                                      fmt::format("triangle {} references vertex {} of {}", k, i, nv));
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw ValidationError("triangles", fmt::format("triangle {} repeats a vertex", k));
        if (!(signed_area(k) > 0.0))
            throw ValidationError("triangles", fmt::format("triangle {} has non-positive signed area", k));
        for (int e = 0; e < 3; ++e) {
            const std::size_t a = t[e];
            const std::size_t b = t[(e + 1) % 3];
            half.push_back({edge_key(a, b), a, b});
        }
    }
    std::sort(half.begin(), half.end(), [](const HalfEdge& l, const HalfEdge& r) { return l.key < r.key; });

    // Edges owned by exactly one triangle, keyed, with the owner's orientation.
    std::vector<HalfEdge> open;
    num_edges_ = 0;
    for (std::size_t i = 0; i < half.size();) {
        std::size_t j = i;
        while (j < half.size() && half[j].key == half[i].key) ++j;
        const std::size_t mult = j - i;
        if (mult > 2) throw ValidationError("triangles", "edge shared by more than two triangles");
        if (mult == 2 && half[i].from == half[i + 1].from)
            throw ValidationError("triangles", "adjacent triangles with inconsistent orientation");
        if (mult == 1) open.push_back(half[i]);
        ++num_edges_;
        i = j;
    }

    if (boundary_.size() != open.size())
        throw ValidationError("boundary", fmt::format("{} boundary edges listed, triangulation has {}",
                                                      boundary_.size(), open.size()));
    std::vector<std::pair<std::uint64_t, std::size_t>> listed;
    listed.reserve(boundary_.size());
    for (std::size_t e = 0; e < boundary_.size(); ++e) {
        const auto& be = boundary_[e];
        if (be.v[0] >= nv || be.v[1] >= nv)
            throw ValidationError("boundary", fmt::format("boundary edge {} references a missing vertex", e));
        listed.emplace_back(edge_key(be.v[0], be.v[1]), e);
    }
    std::sort(listed.begin(), listed.end());
    for (std::size_t e = 0; e < listed.size(); ++e) {
        if (e > 0 && listed[e].first == listed[e - 1].first)
            throw ValidationError("boundary", "boundary edge tagged twice");
        if (listed[e].first != open[e].key)
            throw ValidationError("boundary", "boundary edge is not on the triangulation boundary");
        boundary_[listed[e].second].v = {open[e].from, open[e].to};
    }
}

double Mesh::signed_area(std::size_t k) const {
    const auto& t = triangles_.at(k);
    return 0.5 * orient(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

Point2 Mesh::centroid(std::size_t k) const {
    const auto& t = triangles_.at(k);
    return {(vertices_[t[0]].x1 + vertices_[t[1]].x1 + vertices_[t[2]].x1) / 3.0,
            (vertices_[t[0]].x2 + vertices_[t[1]].x2 + vertices_[t[2]].x2) / 3.0};
}

double Mesh::total_area() const {
    double s = 0.0;
    for (std::size_t k = 0; k < triangles_.size(); ++k) s += signed_area(k);
    return s;
}

bool Mesh::has_tag(BoundaryTag tag) const {
    return std::any_of(boundary_.begin(), boundary_.end(), [tag](const BoundaryEdge& e) { return e.tag == tag; });
}

double Mesh::boundary_length(BoundaryTag tag) const {
    double s = 0.0;
    for (const auto& e : boundary_) {
        if (e.tag != tag) continue;
        const auto& a = vertices_[e.v[0]];
        const auto& b = vertices_[e.v[1]];
        s += std::hypot(b.x1 - a.x1, b.x2 - a.x2);
    }
    return s;
}

double Mesh::min_angle_degrees() const {
    double best = 180.0;
    for (const auto& t : triangles_) {
        for (int i = 0; i < 3; ++i) {
            const auto& p = vertices_[t[i]];
            const auto& q = vertices_[t[(i + 1) % 3]];
            const auto& r = vertices_[t[(i + 2) % 3]];
            const double ux = q.x1 - p.x1, uy = q.x2 - p.x2;
            const double vx = r.x1 - p.x1, vy = r.x2 - p.x2;
            const double ang = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
            best = std::min(best, ang * 180.0 / std::numbers::pi);
        }
    }
    return best;
}

// -----------------------------------------------------------------------------
// Domain geometry
// -----------------------------------------------------------------------------

double DomainGeometry::arc_angle() { return 2.0 * std::asin(half_width / arc_radius); }

double DomainGeometry::arc_length() { return arc_radius * arc_angle(); }

double DomainGeometry::cap_area() {
    const double phi = arc_angle();
    return 0.5 * arc_radius * arc_radius * (phi - std::sin(phi));
}

double DomainGeometry::area() { return 2.0 * half_width * top + cap_area(); }

bool DomainGeometry::contains(Point2 p, double tol) {
    if (std::abs(p.x1) > half_width + tol || p.x2 > top + tol) return false;
    if (p.x2 >= 0.0) return true;
    return std::hypot(p.x1, p.x2 - arc_center_x2) <= arc_radius + tol;
}

// -----------------------------------------------------------------------------
// Delaunay triangulation (Bowyer-Watson with adjacency walk)
// -----------------------------------------------------------------------------

namespace {

class Delaunay {
public:
    explicit Delaunay(const std::vector<Point2>& pts) : pts_(pts) {}

    std::vector<Triangle> triangulate() {
        const std::size_t n = pts_.size();
        double lo1 = std::numeric_limits<double>::max(), hi1 = -lo1, lo2 = lo1, hi2 = -lo1;
        for (const auto& p : pts_) {
            lo1 = std::min(lo1, p.x1);
            hi1 = std::max(hi1, p.x1);
            lo2 = std::min(lo2, p.x2);
            hi2 = std::max(hi2, p.x2);
        }
        const double span = std::max(hi1 - lo1, hi2 - lo2);
        const double c1 = 0.5 * (lo1 + hi1), c2 = 0.5 * (lo2 + hi2);
        pts_.push_back({c1 - 50.0 * span, c2 - 30.0 * span});
        pts_.push_back({c1 + 50.0 * span, c2 - 30.0 * span});
        pts_.push_back({c1, c2 + 50.0 * span});
        tris_.clear();
        tris_.push_back({{int(n), int(n + 1), int(n + 2)}, {-1, -1, -1}, true});
        stamp_.assign(1, 0);

        // Insertion in a snake order over coarse rows keeps the walk short.
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        const double band = span / std::max(1.0, std::sqrt(double(n)) / 2.0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto ra = static_cast<long>((pts_[a].x2 - lo2) / band);
            const auto rb = static_cast<long>((pts_[b].x2 - lo2) / band);
            if (ra != rb) return ra < rb;
            return (ra % 2 == 0) ? pts_[a].x1 < pts_[b].x1 : pts_[a].x1 > pts_[b].x1;
        });

        int last = 0;
        for (std::size_t i : order) last = insert(int(i), last);

        std::vector<Triangle> out;
        for (const auto& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= int(n) || t.v[1] >= int(n) || t.v[2] >= int(n)) continue;
            out.push_back({std::size_t(t.v[0]), std::size_t(t.v[1]), std::size_t(t.v[2])});
        }
        pts_.resize(n);
        return out;
    }

private:
    struct Tri {
        std::array<int, 3> v;
        std::array<int, 3> nb;  // neighbour opposite v[i]
        bool alive;
    };
    struct CavityEdge {
        int a, b, outer;
    };

    long double orient_ld(int a, int b, int c) const {
        const auto& A = pts_[a];
        const auto& B = pts_[b];
        const auto& C = pts_[c];
        return (static_cast<long double>(B.x1) - A.x1) * (static_cast<long double>(C.x2) - A.x2) -
               (static_cast<long double>(B.x2) - A.x2) * (static_cast<long double>(C.x1) - A.x1);
    }

    bool in_circle(const Tri& t, int d) const {
        const auto& D = pts_[d];
        long double m[3][3];
        for (int i = 0; i < 3; ++i) {
            const long double dx = static_cast<long double>(pts_[t.v[i]].x1) - D.x1;
            const long double dy = static_cast<long double>(pts_[t.v[i]].x2) - D.x2;
            m[i][0] = dx;
            m[i][1] = dy;
            m[i][2] = dx * dx + dy * dy;
        }
        const long double det = m[0][2] * (m[1][0] * m[2][1] - m[2][0] * m[1][1]) +
                                m[1][2] * (m[2][0] * m[0][1] - m[0][0] * m[2][1]) +
                                m[2][2] * (m[0][0] * m[1][1] - m[1][0] * m[0][1]);
        return det > 0;
    }

    int locate(int p, int start) const {
        int t = start;
        for (std::size_t guard = 0; guard < 4 * tris_.size() + 16; ++guard) {
            const Tri& tr = tris_[t];
            int next = -1;
            for (int i = 0; i < 3; ++i) {
                if (orient_ld(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], p) < 0) {
                    next = tr.nb[i];
                    break;
                }
            }
            if (next < 0) return t;
            t = next;
        }
        throw Error("mesh: Delaunay point location did not terminate");
    }

    int insert(int p, int start) {
        const int t0 = locate(p, start);
        ++epoch_;
        cavity_.clear();
        edges_.clear();
        cavity_.push_back(t0);
        stamp_[t0] = epoch_;
        for (std::size_t c = 0; c < cavity_.size(); ++c) {
            const int t = cavity_[c];
            for (int i = 0; i < 3; ++i) {
                const int nb = tris_[t].nb[i];
                if (nb >= 0 && stamp_[nb] == epoch_) continue;
                if (nb >= 0 && stamp_[nb] != -epoch_ && in_circle(tris_[nb], p)) {
                    stamp_[nb] = epoch_;
                    cavity_.push_back(nb);
                    continue;
                }
                if (nb >= 0) stamp_[nb] = -epoch_;
                edges_.push_back({tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3], nb});
            }
        }

        for (int t : cavity_) {
            tris_[t].alive = false;
            free_.push_back(t);
        }
        std::vector<int> made(edges_.size());
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const auto& ce = edges_[e];
            if (!(orient_ld(ce.a, ce.b, p) > 0)) throw Error("mesh: Delaunay cavity is not star-shaped");
            int slot;
            if (!free_.empty()) {
                slot = free_.back();
                free_.pop_back();
            } else {
                slot = int(tris_.size());
                tris_.push_back({});
                stamp_.push_back(0);
            }
            tris_[slot] = {{ce.a, ce.b, p}, {-1, -1, ce.outer}, true};
            stamp_[slot] = 0;
            made[e] = slot;
            if (ce.outer >= 0) {
                auto& o = tris_[ce.outer];
                for (int j = 0; j < 3; ++j)
                    if (o.v[j] != ce.a && o.v[j] != ce.b) o.nb[j] = slot;
            }
        }
        // Link the fan: the edge (b, p) of the triangle on (a, b) is shared with
        // the triangle whose cavity edge starts at b.
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            for (std::size_t f = 0; f < edges_.size(); ++f) {
                if (edges_[f].a == edges_[e].b) {
                    tris_[made[e]].nb[0] = made[f];
                    tris_[made[f]].nb[1] = made[e];
                }
            }
        }
        return made.front();
    }

    std::vector<Point2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> stamp_;
    std::vector<int> free_;
    std::vector<int> cavity_;
    std::vector<CavityEdge> edges_;
    int epoch_ = 0;
};

void append_segment(std::vector<Point2>& pts, Point2 a, Point2 b, std::size_t segments) {
    for (std::size_t i = 0; i < segments; ++i) {
        const double s = double(i) / double(segments);
        pts.push_back({a.x1 + s * (b.x1 - a.x1), a.x2 + s * (b.x2 - a.x2)});
    }
}

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    const double ex = b.x1 - a.x1, ey = b.x2 - a.x2;
    double s = ((p.x1 - a.x1) * ex + (p.x2 - a.x2) * ey) / (ex * ex + ey * ey);
    s = std::clamp(s, 0.0, 1.0);
    return std::hypot(p.x1 - a.x1 - s * ex, p.x2 - a.x2 - s * ey);
}

// Seeds and triangulates the left half (x1 <= 0). Returns the points, with the
// first `boundary_count` forming the boundary polygon in order.
std::pair<std::vector<Point2>, std::vector<Triangle>> half_domain(double h, std::size_t& boundary_count) {
    using G = DomainGeometry;
    const double r = G::arc_radius;
    const double c2 = G::arc_center_x2;
    const double theta_bottom = -std::numbers::pi / 2.0;
    const double theta_corner = std::atan2(0.0 - c2, -G::half_width);  // (-0.04, 0)

    std::vector<Point2> pts;
    // Arc from the bottom of the axis to the left corner, every point exactly on the circle.
    const auto n_arc = std::max<std::size_t>(1, std::size_t(std::lround(r * (theta_bottom - theta_corner) / h)));
    pts.push_back({0.0, G::bottom()});
    for (std::size_t i = 1; i < n_arc; ++i) {
        const double th = theta_bottom + (theta_corner - theta_bottom) * double(i) / double(n_arc);
        pts.push_back({r * std::cos(th), c2 + r * std::sin(th)});
    }
    const auto n_wall = std::max<std::size_t>(1, std::size_t(std::lround(G::top / h)));
    append_segment(pts, {-G::half_width, 0.0}, {-G::half_width, G::top}, n_wall);
    const auto n_top = std::max<std::size_t>(1, std::size_t(std::lround(G::half_width / h)));
    append_segment(pts, {-G::half_width, G::top}, {0.0, G::top}, n_top);
    const auto n_axis = std::max<std::size_t>(2, std::size_t(std::lround((G::top - G::bottom()) / h)));
    append_segment(pts, {0.0, G::top}, {0.0, G::bottom()}, n_axis);
    boundary_count = pts.size();

    // Hexagonal interior lattice, kept clear of the boundary.
    const double dy = h * std::sqrt(3.0) / 2.0;
    const double clearance = 0.6 * h;
    const std::vector<Point2> poly(pts.begin(), pts.end());
    for (std::size_t j = 1;; ++j) {
        const double y = G::bottom() + double(j) * dy;
        if (y > G::top - clearance) break;
        const double shift = (j % 2 == 0) ? 0.0 : 0.5 * h;
        for (std::size_t i = 0;; ++i) {
            const double x = -shift - double(i) * h;
            if (x < -G::half_width) break;
            const Point2 p{x, y};
            if (!G::contains(p, 0.0)) continue;
            double d = std::numeric_limits<double>::max();
            for (std::size_t k = 0; k < poly.size() && d >= clearance; ++k)
                d = std::min(d, segment_distance(p, poly[k], poly[(k + 1) % poly.size()]));
            if (d >= clearance) pts.push_back(p);
        }
    }

    auto tris = Delaunay(pts).triangulate();
    return {std::move(pts), std::move(tris)};
}

std::vector<BoundaryEdge> tag_boundary(const std::vector<Point2>& v, const std::vector<Triangle>& tris) {
    using G = DomainGeometry;
    std::vector<std::pair<std::uint64_t, std::array<std::size_t, 2>>> half;
    half.reserve(3 * tris.size());
    for (const auto& t : tris)
        for (int i = 0; i < 3; ++i) half.push_back({edge_key(t[i], t[(i + 1) % 3]), {t[i], t[(i + 1) % 3]}});
    std::sort(half.begin(), half.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const auto on_arc = [&](const Point2& p) {
        return p.x2 <= 1e-12 && std::abs(std::hypot(p.x1, p.x2 - G::arc_center_x2) - G::arc_radius) <= 1e-9;
    };
    std::vector<BoundaryEdge> out;
    for (std::size_t i = 0; i < half.size();) {
        std::size_t j = i;
        while (j < half.size() && half[j].first == half[i].first) ++j;
        if (j - i == 1) {
            const auto e = half[i].second;
            const Point2& a = v[e[0]];
            const Point2& b = v[e[1]];
            BoundaryTag tag = BoundaryTag::Wall;
            if (std::abs(a.x2 - G::top) <= 1e-12 && std::abs(b.x2 - G::top) <= 1e-12) tag = BoundaryTag::GammaA;
            else if (on_arc(a) && on_arc(b)) tag = BoundaryTag::GammaB;
            out.push_back({e, tag});
        }
        i = j;
    }
    return out;
}

}  // namespace

Mesh build_domain_mesh(double h) {
    if (!(h > 0.0) || !(h <= 0.02))
        throw DomainError(fmt::format("target edge length {} outside (0, 0.02]", h));
    const double estimate = DomainGeometry::area() / (std::sqrt(3.0) / 4.0 * h * h);
    if (estimate > 2.0e7)
        throw ResourceError(fmt::format("target edge length {} needs ~{:.3g} triangles (budget 2e7)", h, estimate));

    std::size_t nb = 0;
    auto [half_pts, half_tris] = half_domain(h, nb);

    // Mirror across x1 = 0: axis points are shared, all others are duplicated.
    const std::size_t n = half_pts.size();
    std::vector<Point2> pts = half_pts;
    std::vector<std::size_t> mirror(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (half_pts[i].x1 == 0.0) {
            mirror[i] = i;
        } else {
            mirror[i] = pts.size();
            pts.push_back({-half_pts[i].x1, half_pts[i].x2});
        }
    }
    std::vector<Triangle> tris = half_tris;
    tris.reserve(2 * half_tris.size());
    for (const auto& t : half_tris) tris.push_back({mirror[t[0]], mirror[t[2]], mirror[t[1]]});

    auto boundary = tag_boundary(pts, tris);
    return Mesh(std::move(pts), std::move(tris), std::move(boundary));
}

Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, std::size_t nx, std::size_t ny) {
    if (!(x1 > x0) || !(y1 > y0) || nx == 0 || ny == 0)
        throw DomainError("rectangle mesh needs x1 > x0, y1 > y0 and at least one cell per direction");
    std::vector<Point2> v;
    v.reserve((nx + 1) * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j)
        for (std::size_t i = 0; i <= nx; ++i)
            v.push_back({x0 + (x1 - x0) * double(i) / double(nx), y0 + (y1 - y0) * double(j) / double(ny)});
    const auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
    std::vector<Triangle> t;
    t.reserve(2 * nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    std::vector<BoundaryEdge> b;
    for (std::size_t i = 0; i < nx; ++i) {
        b.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::GammaB});
        b.push_back({{id(i + 1, ny), id(i, ny)}, BoundaryTag::GammaA});
    }
    for (std::size_t j = 0; j < ny; ++j) {
        b.push_back({{id(nx, j), id(nx, j + 1)}, BoundaryTag::Wall});
        b.push_back({{id(0, j + 1), id(0, j)}, BoundaryTag::Wall});
    }
    return Mesh(std::move(v), std::move(t), std::move(b));
}

// -----------------------------------------------------------------------------
// ASCII I/O
// -----------------------------------------------------------------------------

void write_mesh(const Mesh& mesh, std::ostream& out) {
    out << "hifumesh 1\n";
    out << "V " << mesh.num_vertices() << '\n';
    for (const auto& p : mesh.vertices()) out << fmt::format("{:.17g} {:.17g}\n", p.x1, p.x2);
    out << "T " << mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "B " << mesh.boundary_edges().size() << '\n';
    for (const auto& e : mesh.boundary_edges()) out << e.v[0] << ' ' << e.v[1] << ' ' << to_string(e.tag) << '\n';
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-blank line split into whitespace-separated tokens.
    std::vector<std::string> next(const char* expecting) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            std::istringstream ss(line);
            std::vector<std::string> tok;
            for (std::string s; ss >> s;) tok.push_back(s);
            if (!tok.empty()) return tok;
        }
        throw ParseError(fmt::format("unexpected end of file, expected {}", expecting), line_no_ + 1);
    }

    [[nodiscard]] std::size_t line() const { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(fmt::format("'{}' is not a number", s), line);
    }
}

std::size_t parse_index(const std::string& s, std::size_t line) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(fmt::format("'{}' is not a non-negative integer", s), line);
    try {
        return static_cast<std::size_t>(std::stoull(s));
    } catch (const std::exception&) {
        throw ParseError(fmt::format("'{}' is out of range", s), line);
    }
}

std::size_t parse_header(LineReader& r, const char* key) {
    const auto tok = r.next(key);
    if (tok.size() != 2 || tok[0] != key)
        throw ParseError(fmt::format("expected '{} <count>'", key), r.line());
    return parse_index(tok[1], r.line());
}

}  // namespace

Mesh read_mesh(std::istream& in) {
    LineReader r(in);
    const auto head = r.next("header 'hifumesh 1'");
    if (head.size() != 2 || head[0] != "hifumesh" || head[1] != "1")
        throw ParseError("expected header 'hifumesh 1'", r.line());

    const std::size_t nv = parse_header(r, "V");
    std::vector<Point2> v;
    v.reserve(std::min<std::size_t>(nv, 1u << 24));
    for (std::size_t i = 0; i < nv; ++i) {
        const auto tok = r.next("vertex");
        if (tok.size() != 2) throw ParseError("vertex line needs 'x1 x2'", r.line());
        v.push_back({parse_double(tok[0], r.line()), parse_double(tok[1], r.line())});
    }
    const std::size_t nt = parse_header(r, "T");
    std::vector<Triangle> t;
    t.reserve(std::min<std::size_t>(nt, 1u << 24));
    for (std::size_t i = 0; i < nt; ++i) {
        const auto tok = r.next("triangle");
        if (tok.size() != 3) throw ParseError("triangle line needs 'i j k'", r.line());
        t.push_back({parse_index(tok[0], r.line()), parse_index(tok[1], r.line()), parse_index(tok[2], r.line())});
    }
    const std::size_t nb = parse_header(r, "B");
    std::vector<BoundaryEdge> b;
    b.reserve(std::min<std::size_t>(nb, 1u << 24));
    for (std::size_t i = 0; i < nb; ++i) {
        const auto tok = r.next("boundary edge");
        if (tok.size() != 3) throw ParseError("boundary line needs 'i j TAG'", r.line());
        BoundaryTag tag{};
        try {
            tag = parse_boundary_tag(tok[2]);
        } catch (const ParseError& e) {
            throw ParseError(fmt::format("unknown boundary tag '{}'", tok[2]), r.line());
        }
        b.push_back({{parse_index(tok[0], r.line()), parse_index(tok[1], r.line())}, tag});
    }
    return Mesh(std::move(v), std::move(t), std::move(b));
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    write_mesh(mesh, out);
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

Mesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    return read_mesh(in);
}

}  // namespace hifu

#include "hifu/fem.hpp"

#include "hifu/error.hpp"
#include "hifu/parallel.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hifu {

namespace {

constexpr std::size_t kTagCount = 3;

std::size_t tag_index(BoundaryTag tag) { return static_cast<std::size_t>(tag); }

// int l_a l_b l_c l_d over a triangle, divided by its area: 2 n0! n1! n2! / 6!.
struct QuarticTable {
    double v[3][3][3][3];
    constexpr QuarticTable() : v{} {
        constexpr double fact[5] = {1, 1, 2, 6, 24};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c)
                    for (int d = 0; d < 3; ++d) {
                        int n[3] = {0, 0, 0};
                        ++n[a];
                        ++n[b];
                        ++n[c];
                        ++n[d];
                        v[a][b][c][d] = 2.0 * fact[n[0]] * fact[n[1]] * fact[n[2]] / 720.0;
                    }
    }
};
constexpr QuarticTable kQuartic{};

int find_slot(const SparseMatrix& p, std::size_t row, std::size_t col) {
    const int* begin = p.innerIndexPtr() + p.outerIndexPtr()[row];
    const int* end = p.innerIndexPtr() + p.outerIndexPtr()[row + 1];
    const int* it = std::lower_bound(begin, end, static_cast<int>(col));
    if (it == end || *it != static_cast<int>(col)) throw ConsistencyError("fem: entry outside the sparsity pattern");
    return static_cast<int>(it - p.innerIndexPtr());
}

}  // namespace

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
    if (!mesh_) throw DomainError("fem: null mesh");
    const auto& v = mesh_->vertices();
    const auto& tris = mesh_->triangles();
    const std::size_t nt = tris.size();
    const std::size_t nv = v.size();

    area_.resize(nt);
    grad_.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        const auto& t = tris[k];
        const Point2& a = v[t[0]];
        const Point2& b = v[t[1]];
        const Point2& c = v[t[2]];
        const double det = (b.x1 - a.x1) * (c.x2 - a.x2) - (b.x2 - a.x2) * (c.x1 - a.x1);
        area_[k] = 0.5 * det;
        // grad l_i = rot90(opposite edge) / det
        grad_[k][0] = {(b.x2 - c.x2) / det, (c.x1 - b.x1) / det};
        grad_[k][1] = {(c.x2 - a.x2) / det, (a.x1 - c.x1) / det};
        grad_[k][2] = {(a.x2 - b.x2) / det, (b.x1 - a.x1) / det};
    }

    // Vertex adjacency pattern.
    std::vector<std::vector<int>> rows(nv);
    for (const auto& t : tris)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) rows[t[i]].push_back(static_cast<int>(t[j]));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(7 * nv);
    for (std::size_t r = 0; r < nv; ++r) {
        auto& row = rows[r];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        for (int c : row) trip.emplace_back(static_cast<int>(r), c, 0.0);
    }
    pattern_.resize(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(nv));
    pattern_.setFromTriplets(trip.begin(), trip.end());
    pattern_.makeCompressed();

    const std::size_t nnz = static_cast<std::size_t>(pattern_.nonZeros());
    slot_.resize(nt);
    std::vector<int> count(nnz + 1, 0);
    for (std::size_t k = 0; k < nt; ++k) {
        const auto& t = tris[k];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int s = find_slot(pattern_, t[i], t[j]);
                slot_[k][3 * i + j] = s;
                ++count[s + 1];
            }
    }
    contrib_ptr_.assign(nnz + 1, 0);
    std::partial_sum(count.begin(), count.end(), contrib_ptr_.begin());
    contrib_.resize(9 * nt);
    std::vector<int> fill(contrib_ptr_.begin(), contrib_ptr_.end() - 1);
    for (std::size_t k = 0; k < nt; ++k)
        for (int l = 0; l < 9; ++l) contrib_[fill[slot_[k][l]]++] = static_cast<int>(9 * k) + l;

    for (std::size_t t = 0; t < kTagCount; ++t) unit_load_[t] = Vector::Zero(static_cast<Eigen::Index>(nv));
    for (const auto& e : mesh_->boundary_edges()) {
        const Point2& a = v[e.v[0]];
        const Point2& b = v[e.v[1]];
        const double len = std::hypot(b.x1 - a.x1, b.x2 - a.x2);
        auto& u = unit_load_[tag_index(e.tag)];
        u[static_cast<Eigen::Index>(e.v[0])] += 0.5 * len;
        u[static_cast<Eigen::Index>(e.v[1])] += 0.5 * len;
        has_tag_[tag_index(e.tag)] = true;
    }

    mass_ = weighted_mass(NodalField::Ones(static_cast<Eigen::Index>(nv)));
}

SparseMatrix FeSpace::zero_matrix() const { return pattern_; }

template <class Entry>
SparseMatrix FeSpace::assemble(const Entry& entry) const {
    SparseMatrix m = pattern_;
    double* val = m.valuePtr();
    parallel_for(static_cast<std::size_t>(m.nonZeros()), [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            double sum = 0.0;
            for (int c = contrib_ptr_[s]; c < contrib_ptr_[s + 1]; ++c) {
                const int code = contrib_[c];
                const int l = code % 9;
                sum += entry(static_cast<std::size_t>(code / 9), l / 3, l % 3);
            }
            val[s] = sum;
        }
    });
    return m;
}

void FeSpace::check_field(const NodalField& f, const char* name) const {
    if (static_cast<std::size_t>(f.size()) != dim())
        throw ValidationError(name, fmt::format("field has {} values, mesh has {} vertices", f.size(), dim()));
}

SparseMatrix FeSpace::weighted_mass(const NodalField& w) const {
    check_field(w, "weight");
    const auto& tris = mesh_->triangles();
    return assemble([&](std::size_t k, int i, int j) {
        const auto& t = tris[k];
        const double wi = w[static_cast<Eigen::Index>(t[i])];
        const double wj = w[static_cast<Eigen::Index>(t[j])];
        if (i == j) {
            const double rest = w[static_cast<Eigen::Index>(t[(i + 1) % 3])] + w[static_cast<Eigen::Index>(t[(i + 2) % 3])];
            return area_[k] * (wi / 10.0 + rest / 30.0);
        }
        const double wk = w[static_cast<Eigen::Index>(t[3 - i - j])];
        return area_[k] * ((wi + wj) / 30.0 + wk / 60.0);
    });
}

SparseMatrix FeSpace::weighted_stiffness(const NodalField& w) const {
    check_field(w, "weight");
    const auto& tris = mesh_->triangles();
    return assemble([&](std::size_t k, int i, int j) {
        const auto& t = tris[k];
        const auto& g = grad_[k];
        const double w0 = w[static_cast<Eigen::Index>(t[0])];
        const double w1 = w[static_cast<Eigen::Index>(t[1])];
        const double w2 = w[static_cast<Eigen::Index>(t[2])];
        const double mean = (w0 + w1 + w2) / 3.0;
        const double gw1 = w0 * g[0].x1 + w1 * g[1].x1 + w2 * g[2].x1;
        const double gw2 = w0 * g[0].x2 + w1 * g[1].x2 + w2 * g[2].x2;
        const double gg = g[j].x1 * g[i].x1 + g[j].x2 * g[i].x2;
        const double gjw = g[j].x1 * gw1 + g[j].x2 * gw2;
        return area_[k] * (mean * gg + gjw / 3.0);
    });
}

SparseMatrix FeSpace::diffusion(const NodalField& w) const {
    check_field(w, "weight");
    const auto& tris = mesh_->triangles();
    return assemble([&](std::size_t k, int i, int j) {
        const auto& t = tris[k];
        const auto& g = grad_[k];
        const double mean = (w[static_cast<Eigen::Index>(t[0])] + w[static_cast<Eigen::Index>(t[1])] +
                             w[static_cast<Eigen::Index>(t[2])]) /
                            3.0;
        return area_[k] * mean * (g[j].x1 * g[i].x1 + g[j].x2 * g[i].x2);
    });
}

SparseMatrix FeSpace::convection(const ElementField& velocity) const {
    if (velocity.size() != num_elements())
        throw ValidationError("velocity", fmt::format("{} element vectors for {} elements", velocity.size(),
                                                      num_elements()));
    return assemble([&](std::size_t k, int i, int /*j*/) {
        const auto& g = grad_[k][i];
        return area_[k] * (velocity[k].x1 * g.x1 + velocity[k].x2 * g.x2) / 3.0;
    });
}

SparseMatrix FeSpace::boundary_mass(BoundaryTag tag, double coeff) const {
    if (!has_tag_[tag_index(tag)])
        throw DomainError(fmt::format("fem: mesh has no {} edges", to_string(tag)));
    SparseMatrix m = pattern_;
    double* val = m.valuePtr();
    const auto& v = mesh_->vertices();
    for (const auto& e : mesh_->boundary_edges()) {
        if (e.tag != tag) continue;
        const Point2& a = v[e.v[0]];
        const Point2& b = v[e.v[1]];
        const double len = std::hypot(b.x1 - a.x1, b.x2 - a.x2);
        const double d = coeff * len / 3.0;
        const double o = coeff * len / 6.0;
        val[find_slot(pattern_, e.v[0], e.v[0])] += d;
        val[find_slot(pattern_, e.v[1], e.v[1])] += d;
        val[find_slot(pattern_, e.v[0], e.v[1])] += o;
        val[find_slot(pattern_, e.v[1], e.v[0])] += o;
    }
    return m;
}

Vector FeSpace::boundary_load(BoundaryTag tag, const std::function<double(Point2)>& flux) const {
    if (!has_tag_[tag_index(tag)])
        throw DomainError(fmt::format("fem: mesh has no {} edges", to_string(tag)));
    Vector b = Vector::Zero(static_cast<Eigen::Index>(dim()));
    const auto& v = mesh_->vertices();
    const double s0 = 0.5 - 0.5 / std::sqrt(3.0);
    const double s1 = 0.5 + 0.5 / std::sqrt(3.0);
    for (const auto& e : mesh_->boundary_edges()) {
        if (e.tag != tag) continue;
        const Point2& a = v[e.v[0]];
        const Point2& c = v[e.v[1]];
        const double len = std::hypot(c.x1 - a.x1, c.x2 - a.x2);
        const double f0 = flux({a.x1 + s0 * (c.x1 - a.x1), a.x2 + s0 * (c.x2 - a.x2)});
        const double f1 = flux({a.x1 + s1 * (c.x1 - a.x1), a.x2 + s1 * (c.x2 - a.x2)});
        b[static_cast<Eigen::Index>(e.v[0])] += 0.5 * len * (f0 * (1.0 - s0) + f1 * (1.0 - s1));
        b[static_cast<Eigen::Index>(e.v[1])] += 0.5 * len * (f0 * s0 + f1 * s1);
    }
    return b;
}

const Vector& FeSpace::unit_boundary_load(BoundaryTag tag) const {
    if (!has_tag_[tag_index(tag)])
        throw DomainError(fmt::format("fem: mesh has no {} edges", to_string(tag)));
    return unit_load_[tag_index(tag)];
}

Vector FeSpace::quartic_load(const NodalField& k, const NodalField& u, const NodalField& w) const {
    check_field(k, "coefficient");
    check_field(u, "field");
    check_field(w, "field");
    const auto& tris = mesh_->triangles();
    const std::size_t nt = tris.size();
    std::vector<std::array<double, 3>> local(nt);
    parallel_for(nt, [&](std::size_t begin, std::size_t end) {
        for (std::size_t e = begin; e < end; ++e) {
            const auto& t = tris[e];
            double kv[3], uv[3], wv[3];
            for (int i = 0; i < 3; ++i) {
                const auto n = static_cast<Eigen::Index>(t[i]);
                kv[i] = k[n];
                uv[i] = u[n];
                wv[i] = w[n];
            }
            for (int d = 0; d < 3; ++d) {
                double s = 0.0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        for (int c = 0; c < 3; ++c) s += kQuartic.v[a][b][c][d] * kv[a] * uv[b] * wv[c];
                local[e][d] = area_[e] * s;
            }
        }
    }, 1024);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(dim()));
    for (std::size_t e = 0; e < nt; ++e)
        for (int d = 0; d < 3; ++d) out[static_cast<Eigen::Index>(tris[e][d])] += local[e][d];
    return out;
}

double FeSpace::l2_norm(const NodalField& u) const {
    check_field(u, "field");
    return std::sqrt(std::max(0.0, u.dot(mass_ * u)));
}

ElementField FeSpace::gradient(const NodalField& f) const {
    check_field(f, "field");
    const auto& tris = mesh_->triangles();
    ElementField g(tris.size());
    for (std::size_t k = 0; k < tris.size(); ++k) {
        Vec2 s;
        for (int i = 0; i < 3; ++i) {
            const double fi = f[static_cast<Eigen::Index>(tris[k][i])];
            s.x1 += fi * grad_[k][i].x1;
            s.x2 += fi * grad_[k][i].x2;
        }
        g[k] = s;
    }
    return g;
}

double FeSpace::integrate(const NodalField& f) const {
    check_field(f, "field");
    const auto& tris = mesh_->triangles();
    double s = 0.0;
    for (std::size_t k = 0; k < tris.size(); ++k)
        s += area_[k] * (f[static_cast<Eigen::Index>(tris[k][0])] + f[static_cast<Eigen::Index>(tris[k][1])] +
                         f[static_cast<Eigen::Index>(tris[k][2])]) / 3.0;
    return s;
}

double FeSpace::integrate(const NodalField& f, const std::vector<std::uint8_t>& element_mask) const {
    check_field(f, "field");
    if (element_mask.size() != num_elements()) throw ValidationError("mask", "one entry per element required");
    const auto& tris = mesh_->triangles();
    double s = 0.0;
    for (std::size_t k = 0; k < tris.size(); ++k) {
        if (!element_mask[k]) continue;
        s += area_[k] * (f[static_cast<Eigen::Index>(tris[k][0])] + f[static_cast<Eigen::Index>(tris[k][1])] +
                         f[static_cast<Eigen::Index>(tris[k][2])]) / 3.0;
    }
    return s;
}

void add_scaled(SparseMatrix& y, double a, const SparseMatrix& x) {
    if (y.nonZeros() != x.nonZeros() || y.rows() != x.rows() || y.cols() != x.cols())
        throw ConsistencyError("fem: add_scaled on matrices with different patterns");
    const auto n = static_cast<Eigen::Index>(y.nonZeros());
    Eigen::Map<Vector>(y.valuePtr(), n) += a * Eigen::Map<const Vector>(x.valuePtr(), n);
}

namespace {

std::shared_ptr<const Mesh> borrow(const Mesh& mesh) {
    return std::shared_ptr<const Mesh>(std::shared_ptr<const Mesh>{}, &mesh);
}

}  // namespace

SparseMatrix assemble_weighted_mass(const Mesh& mesh, const NodalField& weight) {
    return FeSpace(borrow(mesh)).weighted_mass(weight);
}

SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, const NodalField& weight) {
    return FeSpace(borrow(mesh)).weighted_stiffness(weight);
}

SparseMatrix assemble_convection(const Mesh& mesh, const ElementField& velocity) {
    return FeSpace(borrow(mesh)).convection(velocity);
}

Vector assemble_boundary_load(const Mesh& mesh, BoundaryTag tag, const std::function<double(Point2)>& flux) {
    return FeSpace(borrow(mesh)).boundary_load(tag, flux);
}

SparseMatrix assemble_boundary_mass(const Mesh& mesh, BoundaryTag tag, double coeff) {
    return FeSpace(borrow(mesh)).boundary_mass(tag, coeff);
}

ElementField element_gradient(const Mesh& mesh, const NodalField& field) {
    return FeSpace(borrow(mesh)).gradient(field);
}

// -----------------------------------------------------------------------------
// Solver
// -----------------------------------------------------------------------------

namespace {

template <class Solver>
SolveResult run_solver(const SparseMatrix& a, const Vector& b, const SolveOptions& opts, const char* name) {
    const auto n = a.rows();
    const double bnorm = b.norm();
    SolveResult out;
    if (!std::isfinite(bnorm)) throw ConvergenceError(fmt::format("{}: right-hand side is not finite", name),
                                                      bnorm, 0);
    if (bnorm == 0.0) {
        out.x = Vector::Zero(n);
        return out;
    }
    const auto cap = static_cast<Eigen::Index>(opts.max_iterations ? opts.max_iterations : 10 * std::size_t(n));
    Solver solver;
    solver.compute(a);
    solver.setTolerance(opts.tolerance);

    Vector x = opts.initial_guess ? *opts.initial_guess : Vector::Zero(n);
    Eigen::Index used = 0;
    double res = (b - a * x).norm() / bnorm;
    // Restarts guard against drift between the recursive and the true residual.
    for (int attempt = 0; attempt < 8 && !(res <= opts.tolerance) && used < cap; ++attempt) {
        solver.setMaxIterations(cap - used);
        x = solver.solveWithGuess(b, x);
        used += solver.iterations();
        if (!x.allFinite()) break;
        res = (b - a * x).norm() / bnorm;
        if (solver.info() == Eigen::NumericalIssue) break;
        if (solver.iterations() == 0) break;
    }
    out.iterations = static_cast<int>(used);
    out.residual = x.allFinite() ? res : std::numeric_limits<double>::quiet_NaN();
    if (!x.allFinite() || !(res <= opts.tolerance))
        throw ConvergenceError(fmt::format("{}: relative residual {:.3e} after {} iterations (tolerance {:.1e})",
                                           name, out.residual, used, opts.tolerance),
                               out.residual, out.iterations);
    out.x = std::move(x);
    return out;
}

}  // namespace

SolveResult solve_sparse(const SparseMatrix& a, const Vector& b, const SolveOptions& opts) {
    if (a.rows() != a.cols()) throw ValidationError("matrix", "solve_sparse needs a square matrix");
    if (a.rows() != b.size()) throw ValidationError("rhs", "dimension mismatch between matrix and right side");
    if (opts.initial_guess && opts.initial_guess->size() != b.size())
        throw ValidationError("initial_guess", "dimension mismatch");
    if (opts.kind == SolverKind::ConjugateGradient) {
        using Cg = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                                            Eigen::DiagonalPreconditioner<double>>;
        return run_solver<Cg>(a, b, opts, "cg");
    }
    using Bicg = Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>>;
    return run_solver<Bicg>(a, b, opts, "bicgstab");
}

void apply_dirichlet(SparseMatrix& a, Vector& b, const std::vector<std::size_t>& nodes, const Vector& values) {
    if (static_cast<std::size_t>(values.size()) != nodes.size())
        throw ValidationError("values", "one Dirichlet value per node required");
    const auto n = a.rows();
    std::vector<char> fixed(static_cast<std::size_t>(n), 0);
    Vector g = Vector::Zero(n);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] >= static_cast<std::size_t>(n)) throw ValidationError("nodes", "Dirichlet node out of range");
        fixed[nodes[i]] = 1;
        g[static_cast<Eigen::Index>(nodes[i])] = values[static_cast<Eigen::Index>(i)];
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
            const auto c = it.col();
            if (fixed[static_cast<std::size_t>(r)]) {
                it.valueRef() = (c == r) ? 1.0 : 0.0;
            } else if (fixed[static_cast<std::size_t>(c)]) {
                b[r] -= it.value() * g[c];
                it.valueRef() = 0.0;
            }
        }
        if (fixed[static_cast<std::size_t>(r)]) b[r] = g[r];
    }
}

}  // namespace hifu

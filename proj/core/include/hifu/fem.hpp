#pragma once

// P1 finite elements on triangles: closed-form element integrals, assembly on
// a shared sparsity pattern, and the sparse linear solver.

#include "hifu/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace hifu {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;
/// One value per mesh vertex.
using NodalField = Eigen::VectorXd;

struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// One vector per triangle (P1 gradients, convective velocities).
using ElementField = std::vector<Vec2>;

/// Element geometry and sparsity pattern of the P1 space on one mesh.
///
/// Every matrix produced by a given FeSpace shares the vertex-adjacency
/// pattern, so operators combine with `add_scaled` on the value arrays.
/// Assembly runs element entries in parallel but sums each stored entry in a
/// fixed element order: results are bit-identical for any thread count.
class FeSpace {
public:
    explicit FeSpace(std::shared_ptr<const Mesh> mesh);

    [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
    [[nodiscard]] std::size_t dim() const noexcept { return mesh_->num_vertices(); }
    [[nodiscard]] std::size_t num_elements() const noexcept { return mesh_->num_triangles(); }
    [[nodiscard]] double area(std::size_t k) const { return area_[k]; }
    /// Gradients of the three barycentric coordinates of element k.
    [[nodiscard]] const std::array<Vec2, 3>& basis_gradients(std::size_t k) const { return grad_[k]; }

    /// Matrix with the shared pattern and all values zero.
    [[nodiscard]] SparseMatrix zero_matrix() const;

    /// M_ij = int w v_i v_j, w interpolated P1 (exact).
    [[nodiscard]] SparseMatrix weighted_mass(const NodalField& w) const;
    /// A_ij = int grad v_j . grad(w v_i), the coefficient on the test side (exact).
    [[nodiscard]] SparseMatrix weighted_stiffness(const NodalField& w) const;
    /// S_ij = int w grad v_j . grad v_i, the symmetric form (exact).
    [[nodiscard]] SparseMatrix diffusion(const NodalField& w) const;
    /// C_ij = int (v . grad v_i) v_j with v constant per element.
    [[nodiscard]] SparseMatrix convection(const ElementField& velocity) const;
    /// B_ij = coeff int_{Gamma_tag} v_i v_j.
    [[nodiscard]] SparseMatrix boundary_mass(BoundaryTag tag, double coeff) const;

    /// b_i = int_{Gamma_tag} flux v_i, two-point Gauss per edge.
    [[nodiscard]] Vector boundary_load(BoundaryTag tag, const std::function<double(Point2)>& flux) const;
    /// b_i = int_{Gamma_tag} v_i (cached).
    [[nodiscard]] const Vector& unit_boundary_load(BoundaryTag tag) const;
    /// b_i = int k u w v_i for P1 fields k, u, w (exact).
    [[nodiscard]] Vector quartic_load(const NodalField& k, const NodalField& u, const NodalField& w) const;

    /// The consistent mass matrix with w = 1 (cached).
    [[nodiscard]] const SparseMatrix& mass() const noexcept { return mass_; }
    /// sqrt(u^T M u).
    [[nodiscard]] double l2_norm(const NodalField& u) const;

    [[nodiscard]] ElementField gradient(const NodalField& f) const;
    /// int f over the domain, or over the elements with mask[k] != 0.
    [[nodiscard]] double integrate(const NodalField& f) const;
    [[nodiscard]] double integrate(const NodalField& f, const std::vector<std::uint8_t>& element_mask) const;

private:
    template <class Entry>
    SparseMatrix assemble(const Entry& entry) const;
    void check_field(const NodalField& f, const char* name) const;

    std::shared_ptr<const Mesh> mesh_;
    std::vector<double> area_;
    std::vector<std::array<Vec2, 3>> grad_;
    SparseMatrix pattern_;
    std::vector<std::array<int, 9>> slot_;  // element-local (i,j) -> value index
    std::vector<int> contrib_ptr_;          // value index -> range in contrib_
    std::vector<int> contrib_;              // 9 * element + local
    std::array<Vector, 3> unit_load_;
    std::array<bool, 3> has_tag_{};
    SparseMatrix mass_;
};

/// y += a x for matrices on the same pattern. Throws ConsistencyError on a
/// pattern mismatch.
void add_scaled(SparseMatrix& y, double a, const SparseMatrix& x);

// Free-function forms. Each builds a temporary FeSpace; steppers keep one.
[[nodiscard]] SparseMatrix assemble_weighted_mass(const Mesh& mesh, const NodalField& weight);
[[nodiscard]] SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, const NodalField& weight);
[[nodiscard]] SparseMatrix assemble_convection(const Mesh& mesh, const ElementField& velocity);
[[nodiscard]] Vector assemble_boundary_load(const Mesh& mesh, BoundaryTag tag,
                                            const std::function<double(Point2)>& flux);
[[nodiscard]] SparseMatrix assemble_boundary_mass(const Mesh& mesh, BoundaryTag tag, double coeff);
[[nodiscard]] ElementField element_gradient(const Mesh& mesh, const NodalField& field);

// -----------------------------------------------------------------------------
// Solver
// -----------------------------------------------------------------------------

enum class SolverKind { ConjugateGradient, BiCgStab };

struct SolveOptions {
    SolverKind kind = SolverKind::ConjugateGradient;
    double tolerance = 1e-10;             // relative residual |b - Ax| / |b|
    std::size_t max_iterations = 0;       // 0 means 10 * dimension
    const Vector* initial_guess = nullptr;
};

struct SolveResult {
    Vector x;
    int iterations = 0;
    double residual = 0.0;  // true relative residual of the returned x
};

/// Diagonally preconditioned CG (symmetric positive definite A) or BiCGStab.
/// Throws ConvergenceError, carrying the final residual, on breakdown,
/// non-finite iterates, or when the iteration cap is reached.
[[nodiscard]] SolveResult solve_sparse(const SparseMatrix& a, const Vector& b, const SolveOptions& opts = {});

/// Imposes u = value at `nodes` by symmetric elimination: the rows and columns
/// are replaced by identity and the known values moved to the right side.
void apply_dirichlet(SparseMatrix& a, Vector& b, const std::vector<std::size_t>& nodes, const Vector& values);

}  // namespace hifu

#include "hifu/error.hpp"
#include "hifu/fem.hpp"
#include "hifu/parallel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

using namespace hifu;

namespace {

Mesh reference_triangle() {
    return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
                {{{0, 1}, BoundaryTag::GammaB}, {{1, 2}, BoundaryTag::GammaA}, {{2, 0}, BoundaryTag::Wall}});
}

NodalField ones(std::size_t n) { return NodalField::Ones(Eigen::Index(n)); }

NodalField interpolate(const Mesh& m, double (*f)(double, double)) {
    NodalField u(Eigen::Index(m.num_vertices()));
    for (std::size_t i = 0; i < m.num_vertices(); ++i) u[Eigen::Index(i)] = f(m.vertices()[i].x1, m.vertices()[i].x2);
    return u;
}

}  // namespace

TEST(ReferenceElement, Mass) {
    const auto m = reference_triangle();
    const Eigen::MatrixXd mass = assemble_weighted_mass(m, ones(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(mass(i, j), i == j ? 1.0 / 12 : 1.0 / 24, 1e-14);
}

TEST(ReferenceElement, Stiffness) {
    const auto m = reference_triangle();
    const Eigen::MatrixXd k = assemble_weighted_stiffness(m, ones(3));
    const double expected[3][3] = {{1, -.5, -.5}, {-.5, .5, 0}, {-.5, 0, .5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(k(i, j), expected[i][j], 1e-14);
}

TEST(ReferenceElement, WeightedStiffnessCarriesTestSideCoefficient) {
    const auto m = reference_triangle();
    NodalField w(3);
    w << 1.0, 2.0, 3.0;
    const Eigen::MatrixXd a = assemble_weighted_stiffness(m, w);
    // grad(w v_i) = v_i grad w + w grad v_i with grad w = (1, 2), int w = 1, int v_i = 1/6
    const double g[3][2] = {{-1, -1}, {1, 0}, {0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double expected = (g[j][0] + 2 * g[j][1]) / 6.0 + g[i][0] * g[j][0] + g[i][1] * g[j][1];
            EXPECT_NEAR(a(i, j), expected, 1e-14);
        }
    EXPECT_NEAR((a * ones(3)).norm(), 0.0, 1e-14);
}

TEST(ReferenceElement, Convection) {
    const auto m = reference_triangle();
    const Eigen::MatrixXd c = assemble_convection(m, {{0.7, -1.3}});
    const double g[3][2] = {{-1, -1}, {1, 0}, {0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(c(i, j), (0.7 * g[i][0] - 1.3 * g[i][1]) / 6.0, 1e-14);
}

TEST(BoundaryOperators, StraightEdge) {
    const auto m = reference_triangle();
    const auto b = assemble_boundary_load(m, BoundaryTag::GammaB, [](Point2) { return 1.0; });
    EXPECT_NEAR(b[0], 0.5, 1e-15);
    EXPECT_NEAR(b[1], 0.5, 1e-15);
    EXPECT_EQ(b[2], 0.0);
    const Eigen::MatrixXd bm = assemble_boundary_mass(m, BoundaryTag::GammaA, 1.0);
    const double len = std::sqrt(2.0);
    EXPECT_NEAR(bm(1, 1), len / 3.0, 1e-15);
    EXPECT_NEAR(bm(1, 2), len / 6.0, 1e-15);
    EXPECT_NEAR(bm(2, 2), len / 3.0, 1e-15);
    EXPECT_EQ(bm(0, 0), 0.0);
}

TEST(BoundaryOperators, LinearFluxIsExact) {
    const auto m = reference_triangle();
    const auto b = assemble_boundary_load(m, BoundaryTag::GammaB, [](Point2 p) { return p.x1; });
    EXPECT_NEAR(b[0], 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(b[1], 1.0 / 3.0, 1e-15);
}

TEST(BoundaryOperators, ArcLoadSumsToArcLength) {
    const auto m = build_domain_mesh(0.006);
    const auto b = assemble_boundary_load(m, BoundaryTag::GammaB, [](Point2) { return 1.0; });
    EXPECT_NEAR(b.sum(), 0.09273, 2e-4);
    EXPECT_NEAR(b.sum(), m.boundary_length(BoundaryTag::GammaB), 1e-14);
}

TEST(Gradient, LinearFieldIsExact) {
    const auto m = build_domain_mesh(0.01);
    const auto g = element_gradient(m, interpolate(m, [](double x, double y) { return 3 * x + 2 * y; }));
    for (const auto& v : g) {
        EXPECT_NEAR(v.x1, 3.0, 1e-9);
        EXPECT_NEAR(v.x2, 2.0, 1e-9);
    }
}

TEST(FeSpace, MassIntegratesConstantsAndQuartics) {
    auto mesh = std::make_shared<Mesh>(build_domain_mesh(0.01));
    FeSpace space(mesh);
    const auto one = ones(space.dim());
    EXPECT_NEAR(one.dot(space.mass() * one), mesh->total_area(), 1e-15);
    EXPECT_NEAR(space.integrate(one), mesh->total_area(), 1e-15);
    EXPECT_NEAR(space.quartic_load(one, one, one).sum(), mesh->total_area(), 1e-15);
    EXPECT_NEAR(space.l2_norm(one), std::sqrt(mesh->total_area()), 1e-15);
    const auto s = space.diffusion(one);
    EXPECT_NEAR((s * one).norm(), 0.0, 1e-12);
}

TEST(FeSpace, SymmetricStructure) {
    auto mesh = std::make_shared<Mesh>(build_domain_mesh(0.01));
    FeSpace space(mesh);
    NodalField w = NodalField::LinSpaced(Eigen::Index(space.dim()), 1.0, 2.0);
    const SparseMatrix m = space.weighted_mass(w);
    EXPECT_NEAR((Eigen::MatrixXd(m) - Eigen::MatrixXd(m).transpose()).norm(), 0.0, 1e-16);
}

TEST(FeSpace, AddScaledRequiresSamePattern) {
    auto mesh = std::make_shared<Mesh>(reference_triangle());
    FeSpace a(mesh);
    SparseMatrix y = a.mass();
    add_scaled(y, 2.0, a.mass());
    EXPECT_NEAR(Eigen::MatrixXd(y)(0, 0), 3.0 / 12, 1e-15);
    SparseMatrix other(2, 2);
    EXPECT_THROW(add_scaled(y, 1.0, other), ConsistencyError);
}

TEST(FeSpace, AssemblyIndependentOfThreads) {
    auto mesh = std::make_shared<Mesh>(build_domain_mesh(0.004));
    FeSpace space(mesh);
    NodalField w = NodalField::LinSpaced(Eigen::Index(space.dim()), 1.0, 3.0);
    set_worker_count(1);
    const SparseMatrix a = space.weighted_stiffness(w);
    set_worker_count(4);
    const SparseMatrix b = space.weighted_stiffness(w);
    set_worker_count(0);
    ASSERT_EQ(a.nonZeros(), b.nonZeros());
    for (Eigen::Index i = 0; i < a.nonZeros(); ++i) EXPECT_EQ(a.valuePtr()[i], b.valuePtr()[i]);
}

TEST(Solve, SmallSpdSystem) {
    SparseMatrix a(2, 2);
    a.insert(0, 0) = 4;
    a.insert(0, 1) = 1;
    a.insert(1, 0) = 1;
    a.insert(1, 1) = 3;
    Vector b(2);
    b << 1, 2;
    for (auto kind : {SolverKind::ConjugateGradient, SolverKind::BiCgStab}) {
        const auto r = solve_sparse(a, b, {kind});
        EXPECT_NEAR(r.x[0], 1.0 / 11, 1e-12);
        EXPECT_NEAR(r.x[1], 7.0 / 11, 1e-12);
        EXPECT_LE(r.residual, 1e-10);
    }
}

TEST(Solve, SingularSystemRaises) {
    SparseMatrix a(2, 2);
    a.insert(0, 0) = 1;
    a.insert(0, 1) = 1;
    a.insert(1, 0) = 1;
    a.insert(1, 1) = 1;
    Vector b(2);
    b << 1, -1;
    EXPECT_THROW((void)solve_sparse(a, b, {SolverKind::BiCgStab}), ConvergenceError);
}

TEST(Solve, DirichletElimination) {
    auto mesh = std::make_shared<Mesh>(build_rectangle_mesh(0, 1, 0, 1, 8, 8));
    FeSpace space(mesh);
    SparseMatrix k = space.diffusion(ones(space.dim()));
    Vector b = Vector::Zero(Eigen::Index(space.dim()));
    std::vector<std::size_t> nodes;
    Vector values(0);
    std::vector<double> vals;
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const auto p = mesh->vertices()[i];
        if (p.x1 == 0 || p.x1 == 1 || p.x2 == 0 || p.x2 == 1) {
            nodes.push_back(i);
            vals.push_back(1 + p.x1 - 2 * p.x2);
        }
    }
    values = Eigen::Map<Vector>(vals.data(), Eigen::Index(vals.size()));
    apply_dirichlet(k, b, nodes, values);
    const auto r = solve_sparse(k, b, {SolverKind::ConjugateGradient, 1e-13});
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const auto p = mesh->vertices()[i];
        EXPECT_NEAR(r.x[Eigen::Index(i)], 1 + p.x1 - 2 * p.x2, 1e-10);
    }
}

#include "hifu/error.hpp"
#include "hifu/transport.hpp"

#include <gtest/gtest.h>

#include <memory>

using namespace hifu;

namespace {

std::shared_ptr<const FeSpace> domain_space() {
    static auto space = std::make_shared<const FeSpace>(std::make_shared<const Mesh>(build_domain_mesh(0.008)));
    return space;
}

ElementField pressure_gradient(const FeSpace& space) {
    NodalField p(Eigen::Index(space.dim()));
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const auto v = space.mesh().vertices()[i];
        p[Eigen::Index(i)] = 1e5 * std::exp(-((v.x1 * v.x1) + (v.x2 - 0.035) * (v.x2 - 0.035)) / 2e-4);
    }
    return space.gradient(p);
}

}  // namespace

TEST(Transport, UniformStaysUniform) {
    const auto space = domain_space();
    VelocityModel vel;
    TransportStepper tr(space, vel, TransportBoundary::inflow_only(0.0), 1e-6);
    auto c = ConcentrationState::uniform(space->dim(), 2.0);
    for (int i = 0; i < 5; ++i) tr.step(c, {});
    EXPECT_NEAR(c.c.minCoeff(), 2.0, 1e-12);
    EXPECT_NEAR(c.c.maxCoeff(), 2.0, 1e-12);
    EXPECT_EQ(c.step, 5u);
}

TEST(Transport, ZeroFluxConservesMass) {
    const auto space = domain_space();
    for (auto form : {ConvectionForm::Divergence, ConvectionForm::Reversed}) {
        VelocityModel vel;
        vel.v0 = {0.0, 10.0};
        vel.form = form;
        TransportStepper tr(space, vel, TransportBoundary::inflow_only(0.0), 1e-6);
        auto c = ConcentrationState::uniform(space->dim(), 0.0);
        for (Eigen::Index i = 0; i < c.c.size(); ++i) c.c[i] = double(i % 5);
        const double m0 = mass_integral(c, space->mesh(), MassRegion::Whole);
        const auto grad = pressure_gradient(*space);
        for (int i = 0; i < 10; ++i) tr.step(c, grad);
        EXPECT_NEAR(mass_integral(c, space->mesh(), MassRegion::Whole), m0, 1e-10 * m0);
    }
}

TEST(Transport, InflowBudgetMatchesArcLength) {
    const auto space = domain_space();
    VelocityModel vel;
    vel.v0 = {0.0, 10.0};
    const double g = 0.01, dt = 1e-6;
    TransportStepper tr(space, vel, TransportBoundary::inflow_only(g), dt);
    auto c = ConcentrationState::uniform(space->dim(), 0.0);
    const auto grad = pressure_gradient(*space);
    const double arc = space->mesh().boundary_length(BoundaryTag::GammaB);
    for (int i = 0; i < 20; ++i) {
        const double before = mass_integral(c, space->mesh(), MassRegion::Whole);
        const auto st = tr.step(c, grad);
        const double after = mass_integral(c, space->mesh(), MassRegion::Whole);
        EXPECT_NEAR(after - before, dt * g * arc, 1e-8 * dt * g * arc);
        EXPECT_LE(st.budget.relative_error(), 1e-8);
        EXPECT_NEAR(st.budget.expected, dt * g * arc, 1e-15);
    }
}

TEST(Transport, OutflowRemovesMass) {
    const auto space = domain_space();
    VelocityModel vel;
    TransportStepper tr(space, vel, TransportBoundary::inflow_outflow(0.0, 50.0), 1e-5);
    auto c = ConcentrationState::uniform(space->dim(), 1.0);
    const double m0 = mass_integral(c, space->mesh(), MassRegion::Whole);
    for (int i = 0; i < 5; ++i) {
        const auto st = tr.step(c, {});
        EXPECT_LE(st.budget.relative_error(), 1e-8);
    }
    EXPECT_LT(mass_integral(c, space->mesh(), MassRegion::Whole), m0);
}

TEST(Transport, ConvectionDirection) {
    // a blob near the arc moves up under the divergence form and down under the reversed one
    const auto space = domain_space();
    double centroid[2]{};
    int idx = 0;
    for (auto form : {ConvectionForm::Divergence, ConvectionForm::Reversed}) {
        VelocityModel vel;
        vel.v0 = {0.0, 1000.0};
        vel.d0 = 1e-3;
        vel.form = form;
        TransportStepper tr(space, vel, TransportBoundary::inflow_only(0.0), 1e-6);
        auto c = ConcentrationState::uniform(space->dim(), 0.0);
        NodalField x2(c.c.size());
        for (std::size_t i = 0; i < space->dim(); ++i) {
            const auto v = space->mesh().vertices()[i];
            x2[Eigen::Index(i)] = v.x2;
            c.c[Eigen::Index(i)] = std::exp(-(v.x1 * v.x1 + (v.x2 - 0.05) * (v.x2 - 0.05)) / 1e-4);
        }
        for (int i = 0; i < 10; ++i) tr.step(c, {});
        centroid[idx++] = space->integrate(c.c.cwiseProduct(x2)) / space->integrate(c.c);
    }
    EXPECT_GT(centroid[0], 0.05);
    EXPECT_LT(centroid[1], 0.05);
}

TEST(Velocity, ComposesDriftAndPressureGradient) {
    VelocityModel vel;
    vel.v0 = {1.0, 2.0};
    vel.k_d = 0.5;
    const auto v = vel.velocity({{2.0, -4.0}}, 1);
    EXPECT_EQ(v[0].x1, 0.0);
    EXPECT_EQ(v[0].x2, 4.0);
    const auto w = vel.velocity({}, 3);
    ASSERT_EQ(w.size(), 3u);
    EXPECT_EQ(w[2].x2, 2.0);
    vel.d0 = 0.0;
    EXPECT_THROW(vel.validate(), ValidationError);
}

TEST(MassIntegral, AreaAndFocalStrip) {
    const auto space = domain_space();
    const auto c = ConcentrationState::uniform(space->dim(), 1.0);
    EXPECT_NEAR(mass_integral(c, space->mesh(), MassRegion::Whole), space->mesh().total_area(), 1e-15);
    EXPECT_NEAR(mass_integral(c, space->mesh(), MassRegion::Focal), 2.4e-3, 2.4e-4);
}

TEST(Names, RoundTrip) {
    for (auto r : {MassRegion::Whole, MassRegion::Focal}) EXPECT_EQ(parse_mass_region(to_string(r)), r);
    for (auto f : {ConvectionForm::Divergence, ConvectionForm::Reversed})
        EXPECT_EQ(parse_convection_form(to_string(f)), f);
    EXPECT_THROW((void)parse_convection_form("sideways"), ValidationError);
}

TEST(TransportStep, FreeFunctionMatchesStepper) {
    const auto space = domain_space();
    VelocityModel vel;
    vel.v0 = {0.0, 10.0};
    const auto grad = pressure_gradient(*space);
    auto c = ConcentrationState::uniform(space->dim(), 0.3);
    const NodalField zero = NodalField::Zero(c.c.size());
    const auto a = transport_step(c, zero, grad, zero, vel, space->mesh(), 1e-6, zero,
                                  TransportBoundary::inflow_only(0.01));
    TransportStepper tr(space, vel, TransportBoundary::inflow_only(0.01), 1e-6);
    tr.step(c, grad);
    EXPECT_NEAR((a.c - c.c).lpNorm<Eigen::Infinity>(), 0.0, 1e-12);
}

#include "hifu/acoustics.hpp"
#include "hifu/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

using namespace hifu;

namespace {

AcousticState single_node(double p, double pt, double ptt) {
    AcousticState s = AcousticState::zeros(1);
    s.p[0] = p;
    s.p_t[0] = pt;
    s.p_tt[0] = ptt;
    return s;
}

MaterialModel unit_material(double b) {
    CustomMaterial spec;
    spec.q_coeffs = {1.0};
    spec.b_coeffs = {b};
    spec.omega_b = polynomial_omega_b({0.0});
    spec.constants = liver_model(1e5);
    return custom_model(spec);
}

struct Bump {
    std::shared_ptr<const FeSpace> space;
    AcousticState state;
};

Bump bump_problem() {
    auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(0, 1, 0, 1, 12, 12));
    auto space = std::make_shared<const FeSpace>(mesh);
    AcousticState s = AcousticState::zeros(space->dim());
    for (std::size_t i = 0; i < space->dim(); ++i) {
        const auto p = mesh->vertices()[i];
        s.p[Eigen::Index(i)] = std::exp(-40.0 * ((p.x1 - 0.4) * (p.x1 - 0.4) + (p.x2 - 0.6) * (p.x2 - 0.6)));
    }
    return {space, s};
}

double energy(const FeSpace& space, const SparseMatrix& k, const AcousticState& s) {
    return 0.5 * s.p_t.dot(space.mass() * s.p_t) + 0.5 * s.p.dot(k * s.p);
}

}  // namespace

TEST(Newmark, PredictorCorrectorExample) {
    NewmarkParams nm;
    const auto pred = predictor(single_node(1, 2, 3), 0.1, nm);
    EXPECT_NEAR(pred.p[0], 1.2015, 1e-14);
    EXPECT_NEAR(pred.p_t[0], 2.045, 1e-14);
    NodalField ptt(1);
    ptt[0] = 4.0;
    const auto corr = corrector(pred, ptt, 0.1, nm);
    EXPECT_NEAR(corr.p[0], 1.2195, 1e-14);
    EXPECT_NEAR(corr.p_t[0], 2.385, 1e-14);
}

TEST(Newmark, Validation) {
    NewmarkParams nm;
    EXPECT_NO_THROW(nm.validate());
    nm.beta = 0.6;
    EXPECT_THROW(nm.validate(), ValidationError);
    nm = {};
    nm.gamma = 0.0;
    EXPECT_THROW(nm.validate(), ValidationError);
    nm = {};
    nm.max_iters = 0;
    EXPECT_THROW(nm.validate(), ValidationError);
}

TEST(Excitation, ShapeAndDerivative) {
    const auto exc = Excitation::from_frequency(1e9, 1e5);
    const double w = exc.omega;
    EXPECT_EQ(excitation_g(0.0, exc), 0.0);
    EXPECT_NEAR(excitation_g(std::numbers::pi / (2 * w), exc), 1e9, 1e-3);
    EXPECT_NEAR(excitation_g_prime(0.0, exc), 1e9 * w, 1e-6 * w);
    for (double t : {1.3e-6, 7.7e-6, 1.37e-5, 4.2e-5}) {
        const double h = 1e-11;
        const double fd = (excitation_g(t + h, exc) - excitation_g(t - h, exc)) / (2 * h);
        EXPECT_NEAR(excitation_g_prime(t, exc), fd, 1e-6 * 1e9 * w) << t;
    }
    // continuous across the end of the first period
    const double period = 2 * std::numbers::pi / w;
    EXPECT_NEAR(excitation_g(period * (1 - 1e-12), exc), excitation_g(period * (1 + 1e-12), exc), 1.0);
}

TEST(HistoryTerm, ConstantHistory) {
    const double alpha = 0.7, c = 2.5;
    for (std::size_t n : {0u, 3u, 40u}) {
        AcousticState s = AcousticState::zeros(2);
        s.velocity_history.assign(n + 1, NodalField::Constant(2, c));
        const auto w = l1_weights(alpha, n);
        const auto u = history_term(s, w);
        const double expected = c * (std::pow(double(n + 1), 1 - alpha) / gamma_fn(2 - alpha) - w[0]);
        EXPECT_NEAR(u[0], expected, 1e-13);
        EXPECT_NEAR(u[1], expected, 1e-13);
    }
}

TEST(HistoryTerm, LengthMismatch) {
    AcousticState s = AcousticState::zeros(2);
    EXPECT_THROW((void)history_term(s, l1_weights(0.5, 3)), ConsistencyError);
}

TEST(CouplingMode, Names) {
    for (auto m : {CouplingMode::Full, CouplingMode::FrozenTemperature, CouplingMode::LinearAcoustics,
                   CouplingMode::NoUltrasound})
        EXPECT_EQ(parse_coupling_mode(to_string(m)), m);
    EXPECT_THROW((void)parse_coupling_mode("half"), ValidationError);
    EXPECT_FALSE(WesterveltOptions::for_mode(CouplingMode::LinearAcoustics).nonlinear);
    EXPECT_FALSE(WesterveltOptions::for_mode(CouplingMode::FrozenTemperature).thermal_coupling);
    EXPECT_THROW((void)WesterveltOptions::for_mode(CouplingMode::NoUltrasound), ValidationError);
    for (auto d : {DampingModel::Fractional, DampingModel::Strong, DampingModel::None})
        EXPECT_EQ(parse_damping_model(to_string(d)), d);
}

TEST(Westervelt, ZeroDataStaysZero) {
    auto mesh = std::make_shared<const Mesh>(build_domain_mesh(0.01));
    auto space = std::make_shared<const FeSpace>(mesh);
    WesterveltStepper stepper(space, liver_model(1e5), Excitation{0.0, 2 * std::numbers::pi * 1e5}, 6.67e-8,
                              WesterveltOptions{});
    AcousticState s = AcousticState::zeros(space->dim());
    const NodalField theta = NodalField::Zero(Eigen::Index(space->dim()));
    stepper.initialize(s, theta);
    for (int i = 0; i < 5; ++i) stepper.step(s, theta);
    EXPECT_EQ(s.p.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(s.p_t.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(s.step, 5u);
    EXPECT_EQ(s.velocity_history.size(), 6u);
}

TEST(Westervelt, DampedEnergyDoesNotGrow) {
    auto [space, s] = bump_problem();
    WesterveltOptions opts = WesterveltOptions::for_mode(CouplingMode::LinearAcoustics);
    opts.thermal_coupling = false;
    opts.damping = DampingModel::Strong;
    opts.newmark.beta = 0.25;
    opts.newmark.gamma = 0.5;
    WesterveltStepper stepper(space, unit_material(0.02), Excitation{0.0, 1.0}, 0.01, opts);
    const NodalField theta = NodalField::Zero(Eigen::Index(space->dim()));
    const SparseMatrix k = space->diffusion(NodalField::Ones(Eigen::Index(space->dim())));
    stepper.initialize(s, theta);
    double e = energy(*space, k, s);
    const double e0 = e;
    for (int i = 0; i < 100; ++i) {
        stepper.step(s, theta);
        const double next = energy(*space, k, s);
        EXPECT_LE(next, e * (1 + 1e-12)) << i;
        e = next;
    }
    EXPECT_LT(e, e0);
}

TEST(Westervelt, UndampedAverageAccelerationConservesEnergy) {
    auto [space, s] = bump_problem();
    WesterveltOptions opts = WesterveltOptions::for_mode(CouplingMode::LinearAcoustics);
    opts.thermal_coupling = false;
    opts.damping = DampingModel::None;
    opts.newmark.beta = 0.25;
    opts.newmark.gamma = 0.5;
    WesterveltStepper stepper(space, unit_material(0.0), Excitation{0.0, 1.0}, 0.01, opts);
    const NodalField theta = NodalField::Zero(Eigen::Index(space->dim()));
    const SparseMatrix k = space->diffusion(NodalField::Ones(Eigen::Index(space->dim())));
    stepper.initialize(s, theta);
    const double e0 = energy(*space, k, s);
    for (int i = 0; i < 100; ++i) stepper.step(s, theta);
    EXPECT_NEAR(energy(*space, k, s), e0, 1e-9 * e0);
}

TEST(Westervelt, LinearStepNeedsTwoSolves) {
    auto [space, s] = bump_problem();
    WesterveltOptions opts = WesterveltOptions::for_mode(CouplingMode::LinearAcoustics);
    WesterveltStepper stepper(space, unit_material(0.01), Excitation{0.0, 1.0}, 0.01, opts);
    const NodalField theta = NodalField::Zero(Eigen::Index(space->dim()));
    stepper.initialize(s, theta);
    for (int i = 0; i < 10; ++i) {
        const auto st = stepper.step(s, theta);
        EXPECT_EQ(st.iterations, 2);
        EXPECT_EQ(st.last_change, 0.0);
    }
}

TEST(Westervelt, FreeFunctionMatchesStepper) {
    auto mesh = std::make_shared<const Mesh>(build_domain_mesh(0.01));
    auto space = std::make_shared<const FeSpace>(mesh);
    const auto exc = Excitation::from_frequency(1e9, 1e5);
    const auto model = liver_model(1e5);
    const NodalField theta = NodalField::Zero(Eigen::Index(space->dim()));
    AcousticState s = AcousticState::zeros(space->dim());
    WesterveltStepper stepper(space, model, exc, 6.67e-8, WesterveltOptions{});
    stepper.initialize(s, theta);
    const AcousticState a = westervelt_step(s, theta, model, *mesh, exc, 6.67e-8, NewmarkParams{}, 0.8,
                                            CouplingMode::Full);
    stepper.step(s, theta);
    EXPECT_GT(s.p.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_NEAR((a.p - s.p).lpNorm<Eigen::Infinity>(), 0.0, 1e-9 * s.p.lpNorm<Eigen::Infinity>());
}

TEST(Westervelt, HistoryCap) {
    auto [space, s] = bump_problem();
    WesterveltOptions opts;
    opts.history_cap_bytes = 64;
    WesterveltStepper stepper(space, unit_material(0.01), Excitation{0.0, 1.0}, 0.01, opts);
    const NodalField theta = NodalField::Zero(Eigen::Index(space->dim()));
    stepper.initialize(s, theta);
    EXPECT_THROW(stepper.step(s, theta), ResourceError);
}

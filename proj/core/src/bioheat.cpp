#include "hifu/bioheat.hpp"

#include "hifu/error.hpp"

#include <fmt/format.h>

namespace hifu {

ThermalState ThermalState::zeros(std::size_t n) {
    return {NodalField::Zero(static_cast<Eigen::Index>(n)), 0, 0.0};
}

PennesStepper::PennesStepper(std::shared_ptr<const FeSpace> space, MaterialModel model, double dt, double linear_tol)
    : space_(std::move(space)), model_(std::move(model)), dt_(dt), linear_tol_(linear_tol) {
    if (!space_) throw DomainError("pennes: null finite-element space");
    if (!(dt_ > 0.0)) throw ValidationError("time.dt", "must be positive");
    diffusion_ = space_->weighted_stiffness(NodalField::Ones(static_cast<Eigen::Index>(space_->dim())));
    diffusion_ *= dt_ * model_.kappa();
}

ThermalStats PennesStepper::step(ThermalState& s, const NodalField& pt_new, const NodalField* f_theta) {
    const auto dim = static_cast<Eigen::Index>(space_->dim());
    if (s.theta.size() != dim || pt_new.size() != dim)
        throw ValidationError("theta", "field does not match the mesh");
    if (f_theta && f_theta->size() != dim) throw ValidationError("f_theta", "field does not match the mesh");

    const CoefficientFields coef = eval_coefficient_fields(model_, s.theta);
    const NodalField reaction = (1.0 + dt_ * model_.nu() * coef.omega_b.array()).matrix();
    Eigen::Index where = 0;
    const double rmin = reaction.minCoeff(&where);
    if (!(rmin > 0.0))
        throw DefinitenessError(fmt::format("1 + tau nu omega_b = {:.6g} at node {}: heat system is not definite",
                                            rmin, where));
    SparseMatrix a = space_->weighted_mass(reaction);
    add_scaled(a, 1.0, diffusion_);

    const double scale = model_.zeta_tilde / (model_.rho_a * model_.c_a);
    const NodalField g_coef = (scale * coef.b.array() / coef.q.array().square()).matrix();
    NodalField rhs = space_->mass() * s.theta + dt_ * space_->quartic_load(g_coef, pt_new, pt_new);
    if (f_theta) rhs += dt_ * (space_->mass() * *f_theta);

    SolveOptions so;
    so.kind = SolverKind::ConjugateGradient;
    so.tolerance = linear_tol_;
    so.initial_guess = &s.theta;
    SolveResult sol = solve_sparse(a, rhs, so);

    s.theta = std::move(sol.x);
    s.step += 1;
    s.time = static_cast<double>(s.step) * dt_;
    return {sol.iterations, s.theta.minCoeff()};
}

ThermalState pennes_step(const ThermalState& thermal, const NodalField& pt_new, const MaterialModel& model,
                         const Mesh& mesh, double dt, const NodalField& f_theta) {
    auto space = std::make_shared<const FeSpace>(std::shared_ptr<const Mesh>(std::shared_ptr<const Mesh>{}, &mesh));
    PennesStepper stepper(space, model, dt);
    ThermalState next = thermal;
    stepper.step(next, pt_new, &f_theta);
    return next;
}

ThermalProbe thermal_dose_probe(const ThermalState& thermal) {
    ThermalProbe p;
    if (thermal.theta.size() == 0) return p;
    p.max_theta = thermal.theta[0];
    for (Eigen::Index i = 1; i < thermal.theta.size(); ++i) {
        if (thermal.theta[i] > p.max_theta) {
            p.max_theta = thermal.theta[i];
            p.node = static_cast<std::size_t>(i);
        }
    }
    return p;
}

}  // namespace hifu

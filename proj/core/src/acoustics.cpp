#include "hifu/acoustics.hpp"

#include "hifu/error.hpp"
#include "hifu/parallel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace hifu {

void NewmarkParams::validate() const {
    if (!(beta > 0.0 && beta <= 0.5)) throw ValidationError("newmark.beta", "must lie in (0, 0.5]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("newmark.gamma", "must lie in (0, 1]");
    if (!(tol > 0.0)) throw ValidationError("newmark.tol", "must be positive");
    if (max_iters < 1) throw ValidationError("newmark.max_iters", "must be at least 1");
}

Excitation Excitation::from_frequency(double g0, double frequency) {
    if (!(frequency > 0.0)) throw ValidationError("excitation.frequency", "must be positive");
    if (!std::isfinite(g0)) throw ValidationError("excitation.g0", "must be finite");
    return {g0, 2.0 * std::numbers::pi * frequency};
}

double excitation_g(double t, const Excitation& exc) {
    const double wt = exc.omega * t;
    if (t <= 2.0 * std::numbers::pi / exc.omega) return exc.g0 * std::sin(wt);
    return exc.g0 * std::sin(wt) * (1.0 + std::sin(0.25 * wt));
}

double excitation_g_prime(double t, const Excitation& exc) {
    const double w = exc.omega;
    const double wt = w * t;
    if (t <= 2.0 * std::numbers::pi / w) return exc.g0 * w * std::cos(wt);
    return exc.g0 * (w * std::cos(wt) * (1.0 + std::sin(0.25 * wt)) + 0.25 * w * std::sin(wt) * std::cos(0.25 * wt));
}

AcousticState AcousticState::zeros(std::size_t n) {
    const auto m = static_cast<Eigen::Index>(n);
    AcousticState s{NodalField::Zero(m), NodalField::Zero(m), NodalField::Zero(m), {}, 0, 0.0};
    s.velocity_history.push_back(NodalField::Zero(m));
    return s;
}

NewmarkPredictor predictor(const AcousticState& s, double dt, const NewmarkParams& params) {
    if (!(dt > 0.0)) throw DomainError("predictor: dt must be positive");
    return {s.p + dt * s.p_t + (0.5 - params.beta) * dt * dt * s.p_tt, s.p_t + (1.0 - params.gamma) * dt * s.p_tt};
}

NewmarkPredictor corrector(const NewmarkPredictor& pred, const NodalField& p_tt_new, double dt,
                           const NewmarkParams& params) {
    return {pred.p + params.beta * dt * dt * p_tt_new, pred.p_t + params.gamma * dt * p_tt_new};
}

NodalField history_term(const AcousticState& state, const L1Weights& weights) {
    const auto& hist = state.velocity_history;
    const std::size_t n = weights.n;
    if (hist.size() != n + 1 || weights.size() != n + 2)
        throw ConsistencyError(fmt::format("history holds {} snapshots, weights expect {}", hist.size(), n + 1));
    if (hist.empty()) throw ConsistencyError("empty velocity history");
    const Eigen::Index dim = hist.front().size();
    NodalField out = NodalField::Zero(dim);
    parallel_for(static_cast<std::size_t>(dim), [&](std::size_t begin, std::size_t end) {
        const auto b = static_cast<Eigen::Index>(begin);
        const auto len = static_cast<Eigen::Index>(end - begin);
        for (std::size_t j = 1; j <= n + 1; ++j) out.segment(b, len) += weights[j] * hist[n + 1 - j].segment(b, len);
    }, 2048);
    return out;
}

std::string_view to_string(CouplingMode mode) {
    switch (mode) {
        case CouplingMode::Full: return "full";
        case CouplingMode::FrozenTemperature: return "frozen_temperature";
        case CouplingMode::LinearAcoustics: return "linear_acoustics";
        case CouplingMode::NoUltrasound: return "no_ultrasound";
    }
    return "full";
}

CouplingMode parse_coupling_mode(std::string_view name) {
    if (name == "full") return CouplingMode::Full;
    if (name == "frozen_temperature") return CouplingMode::FrozenTemperature;
    if (name == "linear_acoustics") return CouplingMode::LinearAcoustics;
    if (name == "no_ultrasound") return CouplingMode::NoUltrasound;
    throw ValidationError("coupling", fmt::format("unknown coupling mode '{}'", name));
}

std::string_view to_string(DampingModel model) {
    switch (model) {
        case DampingModel::Fractional: return "fractional";
        case DampingModel::Strong: return "strong";
        case DampingModel::None: return "none";
    }
    return "fractional";
}

DampingModel parse_damping_model(std::string_view name) {
    if (name == "fractional") return DampingModel::Fractional;
    if (name == "strong") return DampingModel::Strong;
    if (name == "none") return DampingModel::None;
    throw ValidationError("acoustics.damping", fmt::format("unknown damping model '{}'", name));
}

WesterveltOptions WesterveltOptions::for_mode(CouplingMode mode) {
    WesterveltOptions o;
    switch (mode) {
        case CouplingMode::Full: break;
        case CouplingMode::FrozenTemperature: o.thermal_coupling = false; break;
        case CouplingMode::LinearAcoustics: o.nonlinear = false; break;
        case CouplingMode::NoUltrasound:
            throw ValidationError("coupling", "no_ultrasound runs do not step the wave equation");
    }
    return o;
}

// -----------------------------------------------------------------------------
// Stepper
// -----------------------------------------------------------------------------

WesterveltStepper::WesterveltStepper(std::shared_ptr<const FeSpace> space, MaterialModel model, Excitation exc,
                                     double dt, WesterveltOptions options)
    : space_(std::move(space)), model_(std::move(model)), exc_(exc), dt_(dt), opts_(std::move(options)) {
    if (!space_) throw DomainError("westervelt: null finite-element space");
    if (!(dt_ > 0.0)) throw ValidationError("time.dt", "must be positive");
    opts_.newmark.validate();
    if (!(opts_.linear_tol > 0.0)) throw ValidationError("acoustics.linear_tol", "must be positive");
    if (opts_.damping == DampingModel::Fractional) {
        if (!(opts_.alpha > 0.0 && opts_.alpha < 1.0)) throw ValidationError("acoustics.alpha", "must lie in (0, 1)");
        weights_.emplace(opts_.alpha);
    }
    q_ambient_ = model_.q(model_.theta_ambient);
    b_ambient_ = model_.b(model_.theta_ambient);
}

double WesterveltStepper::damping_scale() const {
    switch (opts_.damping) {
        case DampingModel::Fractional: return std::pow(dt_, 1.0 - opts_.alpha);
        case DampingModel::Strong: return 1.0;
        case DampingModel::None: return 0.0;
    }
    return 0.0;
}

double WesterveltStepper::boundary_flux(std::size_t n) const {
    const double t_next = static_cast<double>(n + 1) * dt_;
    double flux = excitation_g(t_next, exc_) * q_ambient_;
    switch (opts_.damping) {
        case DampingModel::Fractional: {
            const L1Weights w = l1_weights(opts_.alpha, n);
            double s = 0.0;
            for (std::size_t j = 0; j <= n + 1; ++j)
                s += w[j] * excitation_g_prime(static_cast<double>(n + 1 - j) * dt_, exc_);
            flux += damping_scale() * b_ambient_ * s;
            break;
        }
        case DampingModel::Strong: flux += b_ambient_ * excitation_g_prime(t_next, exc_); break;
        case DampingModel::None: break;
    }
    return flux;
}

const WesterveltStepper::Operators& WesterveltStepper::operators(const NodalField& theta_in) {
    const auto dim = static_cast<Eigen::Index>(space_->dim());
    if (theta_in.size() != dim) throw ValidationError("theta", "temperature field does not match the mesh");
    const NodalField theta = opts_.thermal_coupling ? theta_in : NodalField::Zero(dim);
    if (ops_ && (ops_->theta_key.array() == theta.array()).all()) return *ops_;
    Operators o;
    o.coef = eval_coefficient_fields(model_, theta);
    if (!opts_.nonlinear) o.coef.k.setZero();
    o.kq = space_->weighted_stiffness(o.coef.q);
    o.kb = opts_.damping == DampingModel::None ? space_->zero_matrix() : space_->weighted_stiffness(o.coef.b);
    o.theta_key = theta;
    ops_ = std::move(o);
    return *ops_;
}

void WesterveltStepper::initialize(AcousticState& s, const NodalField& theta) {
    if (s.step != 0) throw ConsistencyError("westervelt: initialize on a state past step 0");
    const auto& ops = operators(theta);
    const NodalField twok = 2.0 * ops.coef.k;
    NodalField rhs = -(ops.kq * s.p);
    if (opts_.nonlinear) rhs += space_->quartic_load(twok, s.p_t, s.p_t);
    if (space_->mesh().has_tag(BoundaryTag::GammaB))
        rhs += excitation_g(0.0, exc_) * q_ambient_ * space_->unit_boundary_load(BoundaryTag::GammaB);
    if (opts_.damping == DampingModel::Strong) {
        rhs -= ops.kb * s.p_t;
        if (space_->mesh().has_tag(BoundaryTag::GammaB))
            rhs += b_ambient_ * excitation_g_prime(0.0, exc_) * space_->unit_boundary_load(BoundaryTag::GammaB);
    }
    if (opts_.source) rhs += space_->weighted_mass(ops.coef.b) * opts_.source(0.0);
    const NodalField m = NodalField::Ones(s.p.size()) - twok.cwiseProduct(s.p);
    if (m.minCoeff() <= 0.0) throw DegeneracyError("1 - 2kp is not positive in the initial data");
    SolveOptions so;
    so.kind = SolverKind::ConjugateGradient;
    so.tolerance = opts_.linear_tol;
    s.p_tt = solve_sparse(space_->weighted_mass(m), rhs, so).x;
    s.velocity_history.assign(1, s.p_t);
    s.time = 0.0;
}

WesterveltStats WesterveltStepper::step(AcousticState& s, const NodalField& theta) {
    const std::size_t n = s.step;
    const double tau = dt_;
    const auto& nm = opts_.newmark;
    if (s.velocity_history.size() != n + 1)
        throw ConsistencyError(fmt::format("westervelt: history has {} snapshots at step {}", s.velocity_history.size(), n));
    const double bytes = static_cast<double>(n + 2) * static_cast<double>(space_->dim()) * sizeof(double);
    if (opts_.damping == DampingModel::Fractional && bytes > static_cast<double>(opts_.history_cap_bytes))
        throw ResourceError(fmt::format("velocity history would exceed the cap of {} bytes at step {}",
                                        opts_.history_cap_bytes, n + 1));

    const NewmarkPredictor pred = predictor(s, tau, nm);
    const Operators& ops = operators(theta);
    const double cs = damping_scale();

    double w0 = 0.0;
    NodalField ups = NodalField::Zero(s.p.size());
    if (opts_.damping == DampingModel::Fractional) {
        const L1Weights& w = weights_->at_step(n);
        w0 = w[0];
        ups = history_term(s, w);
    } else if (opts_.damping == DampingModel::Strong) {
        w0 = 1.0;
    }

    SparseMatrix a_fixed = ops.kq * (nm.beta * tau * tau);
    NodalField rhs_fixed = -(ops.kq * pred.p);
    if (cs != 0.0) {
        add_scaled(a_fixed, nm.gamma * tau * cs * w0, ops.kb);
        rhs_fixed -= cs * (ops.kb * (w0 * pred.p_t + ups));
    }
    if (space_->mesh().has_tag(BoundaryTag::GammaB))
        rhs_fixed += boundary_flux(n) * space_->unit_boundary_load(BoundaryTag::GammaB);
    const double t_next = static_cast<double>(n + 1) * tau;
    if (opts_.source) rhs_fixed += space_->weighted_mass(ops.coef.b) * opts_.source(t_next);

    const NodalField twok = 2.0 * ops.coef.k;
    const NodalField ones = NodalField::Ones(s.p.size());
    NodalField x_prev = s.p_tt;
    NodalField p_star = pred.p;
    NodalField pt_star = pred.p_t;

    SolveOptions so;
    so.kind = SolverKind::BiCgStab;
    so.tolerance = opts_.linear_tol;

    WesterveltStats stats;
    for (int it = 0; it < nm.max_iters; ++it) {
        const NodalField m = ones - twok.cwiseProduct(p_star);
        Eigen::Index where = 0;
        const double mmin = m.minCoeff(&where);
        stats.min_mass_factor = it == 0 ? mmin : std::min(stats.min_mass_factor, mmin);
        if (!(mmin > 0.0))
            throw DegeneracyError(fmt::format("1 - 2kp = {:.6g} at node {} in step {}", mmin, where, n + 1));
        SparseMatrix a = space_->weighted_mass(m);
        add_scaled(a, 1.0, a_fixed);
        NodalField rhs = rhs_fixed;
        if (opts_.nonlinear) rhs += space_->quartic_load(twok, pt_star, pt_star);

        so.initial_guess = &x_prev;
        SolveResult sol = solve_sparse(a, rhs, so);
        stats.linear_iterations += sol.iterations;

        const double diff = space_->l2_norm(sol.x - x_prev);
        const double norm = space_->l2_norm(sol.x);
        const double change = diff == 0.0 ? 0.0 : (norm == 0.0 ? HUGE_VAL : diff / norm);
        stats.iterations = it + 1;
        stats.last_change = change;
        stats.changes.push_back(change);

        x_prev = std::move(sol.x);
        p_star = pred.p + nm.beta * tau * tau * x_prev;
        pt_star = pred.p_t + nm.gamma * tau * x_prev;
        if (std::isnan(change))
            throw ConvergenceError(fmt::format("fixed-point iterate is not finite in step {}", n + 1), change, it + 1);
        if (change < nm.tol) {
            s.p = std::move(p_star);
            s.p_t = std::move(pt_star);
            s.p_tt = std::move(x_prev);
            s.velocity_history.push_back(s.p_t);
            s.step = n + 1;
            s.time = t_next;
            return stats;
        }
    }
    throw ConvergenceError(fmt::format("fixed point did not converge in {} iterations at step {} (last change {:.3e})",
                                       nm.max_iters, n + 1, stats.last_change),
                           stats.last_change, nm.max_iters);
}

AcousticState westervelt_step(const AcousticState& state, const NodalField& theta, const MaterialModel& model,
                              const Mesh& mesh, const Excitation& exc, double dt, const NewmarkParams& params,
                              double kernel_alpha, CouplingMode mode) {
    auto space = std::make_shared<const FeSpace>(std::shared_ptr<const Mesh>(std::shared_ptr<const Mesh>{}, &mesh));
    WesterveltOptions opts = WesterveltOptions::for_mode(mode);
    opts.newmark = params;
    opts.alpha = kernel_alpha;
    WesterveltStepper stepper(space, model, exc, dt, opts);
    AcousticState next = state;
    stepper.step(next, theta);
    return next;
}

}  // namespace hifu

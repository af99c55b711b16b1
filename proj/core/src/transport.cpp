#include "hifu/transport.hpp"

#include "hifu/error.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace hifu {

ConcentrationState ConcentrationState::uniform(std::size_t n, double c0) {
    return {NodalField::Constant(static_cast<Eigen::Index>(n), c0), 0, 0.0};
}

void VelocityModel::validate() const {
    if (!(d0 > 0.0)) throw ValidationError("transport.D0", "must be positive");
    if (!(k_d >= 0.0)) throw ValidationError("transport.k_D", "must be non-negative");
    if (!std::isfinite(v0.x1) || !std::isfinite(v0.x2)) throw ValidationError("transport.v0", "must be finite");
}

ElementField VelocityModel::velocity(const ElementField& grad_p, std::size_t num_elements) const {
    if (grad_p.empty()) return ElementField(num_elements, v0);
    if (grad_p.size() != num_elements)
        throw ValidationError("grad_p", fmt::format("{} element vectors for {} elements", grad_p.size(), num_elements));
    ElementField v(num_elements);
    for (std::size_t k = 0; k < num_elements; ++k)
        v[k] = {v0.x1 - k_d * grad_p[k].x1, v0.x2 - k_d * grad_p[k].x2};
    return v;
}

double MassBudget::relative_error() const {
    const double err = std::abs(delta - expected);
    if (scale > 0.0) return err / scale;
    return err;
}

namespace {

std::vector<double> element_diameters(const Mesh& mesh) {
    const auto& vs = mesh.vertices();
    std::vector<double> d(mesh.num_triangles());
    for (std::size_t k = 0; k < d.size(); ++k) {
        const auto& t = mesh.triangles()[k];
        double m = 0.0;
        for (int e = 0; e < 3; ++e) {
            const Point2 a = vs[t[static_cast<std::size_t>(e)]];
            const Point2 b = vs[t[static_cast<std::size_t>((e + 1) % 3)]];
            m = std::max(m, std::hypot(a.x1 - b.x1, a.x2 - b.x2));
        }
        d[k] = m;
    }
    return d;
}

}  // namespace

TransportStepper::TransportStepper(std::shared_ptr<const FeSpace> space, VelocityModel velocity,
                                   TransportBoundary boundary, double dt)
    : space_(std::move(space)), vel_(std::move(velocity)), boundary_(boundary), dt_(dt) {
    if (!space_) throw DomainError("transport: null finite-element space");
    if (!(dt_ > 0.0)) throw ValidationError("time.dt", "must be positive");
    vel_.validate();
    if (!std::isfinite(boundary_.inflow)) throw ValidationError("transport.g_tilde", "must be finite");
    if (!(boundary_.outflow >= 0.0)) throw ValidationError("transport.outflow", "must be non-negative");

    const auto n = static_cast<Eigen::Index>(space_->dim());
    fixed_ = space_->mass();
    add_scaled(fixed_, dt_ * vel_.d0, space_->diffusion(NodalField::Ones(n)));
    if (boundary_.outflow > 0.0) {
        add_scaled(fixed_, dt_, space_->boundary_mass(BoundaryTag::GammaA, boundary_.outflow));
        outflow_weights_ = space_->unit_boundary_load(BoundaryTag::GammaA);
    } else {
        outflow_weights_ = Vector::Zero(n);
    }
    inflow_load_ = boundary_.inflow != 0.0 ? Vector(dt_ * boundary_.inflow * space_->unit_boundary_load(BoundaryTag::GammaB))
                                           : Vector(Vector::Zero(n));
    diameter_ = element_diameters(space_->mesh());
}

TransportStats TransportStepper::step(ConcentrationState& s, const ElementField& grad_p, const NodalField& p_new,
                                      const NodalField& theta_new, const NodalField* f_c) {
    const auto dim = static_cast<Eigen::Index>(space_->dim());
    const std::size_t ne = space_->num_elements();
    if (s.c.size() != dim) throw ValidationError("c", "field does not match the mesh");
    if (f_c && f_c->size() != dim) throw ValidationError("f_c", "field does not match the mesh");

    const ElementField v = vel_.velocity(grad_p, ne);
    TransportStats st;
    for (std::size_t k = 0; k < ne; ++k) {
        const double speed = std::hypot(v[k].x1, v[k].x2);
        if (!std::isfinite(speed)) throw DomainError(fmt::format("convective velocity on element {} is not finite", k));
        st.max_speed = std::max(st.max_speed, speed);
        st.max_peclet = std::max(st.max_peclet, speed * diameter_[k] / (2.0 * vel_.d0));
        st.max_courant = std::max(st.max_courant, speed * dt_ / diameter_[k]);
    }
    if (st.max_peclet > 2.0 && !warned_peclet_) {
        spdlog::warn("transport: mesh Peclet number {:.3g} exceeds 2 at step {}; Galerkin solution may oscillate",
                     st.max_peclet, s.step + 1);
        warned_peclet_ = true;
    }
    if (st.max_courant > 1.0 && !warned_courant_) {
        spdlog::warn("transport: Courant number {:.3g} exceeds 1 at step {}; accuracy degrades", st.max_courant,
                     s.step + 1);
        warned_courant_ = true;
    }

    SparseMatrix a = fixed_;
    add_scaled(a, vel_.form == ConvectionForm::Divergence ? -dt_ : dt_, space_->convection(v));
    if (vel_.perturbation) {
        if (p_new.size() != dim || theta_new.size() != dim)
            throw ValidationError("transport.perturbation", "needs pressure and temperature fields");
        NodalField w(dim);
        for (Eigen::Index i = 0; i < dim; ++i) w[i] = vel_.perturbation(p_new[i], theta_new[i]);
        add_scaled(a, dt_, space_->diffusion(w));
    }

    Vector rhs = space_->mass() * s.c + inflow_load_;
    double source = 0.0;
    if (f_c) {
        rhs += dt_ * (space_->mass() * *f_c);
        source = space_->integrate(*f_c);
    }

    const Eigen::SparseMatrix<double> acol = a;
    if (!analyzed_) {
        lu_.analyzePattern(acol);
        analyzed_ = true;
    }
    lu_.factorize(acol);
    if (lu_.info() != Eigen::Success) throw ConvergenceError("transport: sparse LU factorization failed", 0.0, 0);
    Vector c_new = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success || !c_new.allFinite())
        throw ConvergenceError("transport: sparse LU solve failed", 0.0, 0);

    const double m_old = space_->integrate(s.c);
    const double m_new = space_->integrate(c_new);
    const double inflow = boundary_.inflow * space_->mesh().boundary_length(BoundaryTag::GammaB);
    const double outflow = boundary_.outflow * outflow_weights_.dot(c_new);
    st.budget.delta = m_new - m_old;
    st.budget.expected = dt_ * (inflow - outflow + source);
    st.budget.scale = dt_ * (std::abs(inflow) + std::abs(outflow) + std::abs(source));
    if (st.budget.scale == 0.0) st.budget.scale = std::abs(m_old);

    s.c = std::move(c_new);
    s.step += 1;
    s.time = static_cast<double>(s.step) * dt_;
    return st;
}

ConcentrationState transport_step(const ConcentrationState& conc, const NodalField& p_new, const ElementField& grad_p,
                                  const NodalField& theta_new, const VelocityModel& vel, const Mesh& mesh, double dt,
                                  const NodalField& f_c, const TransportBoundary& boundary) {
    auto space = std::make_shared<const FeSpace>(std::shared_ptr<const Mesh>(std::shared_ptr<const Mesh>{}, &mesh));
    TransportStepper stepper(space, vel, boundary, dt);
    ConcentrationState next = conc;
    stepper.step(next, grad_p, p_new, theta_new, f_c.size() ? &f_c : nullptr);
    return next;
}

std::string_view to_string(ConvectionForm form) {
    return form == ConvectionForm::Divergence ? "divergence" : "reversed";
}

ConvectionForm parse_convection_form(std::string_view name) {
    if (name == "divergence") return ConvectionForm::Divergence;
    if (name == "reversed") return ConvectionForm::Reversed;
    throw ValidationError("transport.convection", fmt::format("unknown convection form '{}'", name));
}

std::string_view to_string(MassRegion region) {
    return region == MassRegion::Whole ? "whole" : "focal";
}

MassRegion parse_mass_region(std::string_view name) {
    if (name == "whole") return MassRegion::Whole;
    if (name == "focal") return MassRegion::Focal;
    throw ValidationError("region", fmt::format("unknown region '{}' (expected whole or focal)", name));
}

double mass_integral(const ConcentrationState& conc, const Mesh& mesh, MassRegion region) {
    if (conc.c.size() != static_cast<Eigen::Index>(mesh.num_vertices()))
        throw ValidationError("c", "field does not match the mesh");
    double m = 0.0;
    for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
        if (region == MassRegion::Focal) {
            const double y = mesh.centroid(k).x2;
            if (!(y > DomainGeometry::focal_min_x2 && y < DomainGeometry::focal_max_x2)) continue;
        }
        const auto& t = mesh.triangles()[k];
        const double mean = (conc.c[static_cast<Eigen::Index>(t[0])] + conc.c[static_cast<Eigen::Index>(t[1])] +
                             conc.c[static_cast<Eigen::Index>(t[2])]) /
                            3.0;
        m += std::abs(mesh.signed_area(k)) * mean;
    }
    return m;
}

}  // namespace hifu

#include "hifu/materials.hpp"

#include "hifu/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace hifu {

namespace {
constexpr double kAbsoluteZero = -273.15;  // deg C
}  // namespace

double eval_polynomial(const std::vector<double>& coeffs, double s) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * s + *it;
    return acc;
}

ScalarFunction polynomial_omega_b(std::vector<double> coeffs) {
    return [c = std::move(coeffs)](double s) { return eval_polynomial(c, s); };
}

ScalarFunction power_omega_b(double a1, double a2, double a3, double a4) {
    if (!(a4 > 1.0)) throw DomainError("power-law perfusion needs a4 > 1");
    return [=](double s) { return s > a3 ? a1 + a2 * std::pow(s - a3, a4) : a1; };
}

ScalarFunction gaussian_omega_b(double a1, double a2, double a3, double a4, double s0, double s1) {
    if (!(s1 >= s0)) throw DomainError("gaussian perfusion needs s0 <= s1");
    return [=](double s) {
        const double x = std::min(std::max(s, s0), s1) - a4;
        return a1 + a2 * std::exp(-a3 * x * x);
    };
}

double MaterialModel::absorption_factor(double theta_abs) const {
    const double qv = q(theta_abs);
    return zeta_tilde / (rho_a * c_a) * b(theta_abs) / (qv * qv);
}

MaterialModel liver_model(double frequency) {
    if (!(frequency > 0.0)) throw DomainError("liver_model: frequency must be positive");
    MaterialModel m;
    m.name = "liver";
    const double omega = 2.0 * std::numbers::pi * frequency;
    m.alpha0 = 4.5e-6 * frequency;
    const auto speed = [](double t) {
        return 1529.3 + t * (1.6856 + t * (6.1131e-2 + t * (-2.2967e-3 + t * (2.2657e-5 + t * (-7.1795e-8)))));
    };
    m.q = [speed](double t) {
        const double c = speed(t);
        return c * c;
    };
    const double scale = 2.0 * m.alpha0 / (omega * omega);
    m.b = [speed, scale](double t) {
        const double c = std::abs(speed(t));
        return scale * c * c * c;
    };
    m.omega_b = [](double t) { return 1e-4 * (5.0 + t); };
    return m;
}

MaterialModel custom_model(const CustomMaterial& spec) {
    if (spec.q_coeffs.empty()) throw ValidationError("material.q", "at least one coefficient required");
    if (spec.b_coeffs.empty()) throw ValidationError("material.b", "at least one coefficient required");
    MaterialModel m = spec.constants;
    m.name = "custom";
    m.q = [c = spec.q_coeffs](double t) { return eval_polynomial(c, t); };
    m.b = [c = spec.b_coeffs](double t) { return eval_polynomial(c, t); };
    m.omega_b = spec.omega_b ? spec.omega_b : ScalarFunction([](double) { return 0.0; });
    if (!(m.q(m.theta_ambient) > 0.0)) throw ValidationError("material.q", "q must be positive at ambient temperature");
    if (!(m.b(m.theta_ambient) >= 0.0)) throw ValidationError("material.b", "b must be non-negative at ambient temperature");
    return m;
}

CoefficientFields eval_coefficient_fields(const MaterialModel& model, const NodalField& theta) {
    const Eigen::Index n = theta.size();
    CoefficientFields f{NodalField(n), NodalField(n), NodalField(n), NodalField(n)};
    const double q_floor = 1e-12 * model.q(model.theta_ambient);
    const double b_floor = 1e-12 * model.b(model.theta_ambient);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(theta[i])) throw DomainError(fmt::format("temperature at node {} is not finite", i));
        const double t = theta[i] + model.theta_ambient;
        if (!(t > kAbsoluteZero))
            throw DegeneracyError(fmt::format("Theta = {:.6g} C at node {} is below absolute zero", t, i));
        const double q = model.q(t);
        const double b = model.b(t);
        if (!(q > q_floor))
            throw DegeneracyError(fmt::format("q = {:.6g} at node {} (Theta = {:.6g} C) is not positive", q, i, t));
        if (b_floor > 0.0 ? !(b > b_floor) : !(b >= 0.0))
            throw DegeneracyError(fmt::format("b = {:.6g} at node {} (Theta = {:.6g} C) is not positive", b, i, t));
        f.q[i] = q;
        f.b[i] = b;
        f.k[i] = model.beta_a / (model.rho_a * q);
        f.omega_b[i] = model.omega_b(t);
    }
    return f;
}

NodalField absorption_coefficient(const MaterialModel& model, const NodalField& theta) {
    const auto c = eval_coefficient_fields(model, theta);
    const double scale = model.zeta_tilde / (model.rho_a * model.c_a);
    return (scale * c.b.array() / c.q.array().square()).matrix();
}

NodalField absorbed_energy(const MaterialModel& model, const NodalField& pt, const NodalField& theta) {
    if (pt.size() != theta.size()) throw ValidationError("pt", "field sizes differ");
    return (absorption_coefficient(model, theta).array() * pt.array().square()).matrix();
}

}  // namespace hifu

#pragma once

// Temperature-dependent medium coefficients. Temperatures are in degrees
// Celsius; nodal temperature fields store theta = Theta - Theta_a.

#include "hifu/fem.hpp"

#include <functional>
#include <string>
#include <vector>

namespace hifu {

using ScalarFunction = std::function<double(double)>;

/// sum_i coeffs[i] s^i (Horner).
[[nodiscard]] double eval_polynomial(const std::vector<double>& coeffs, double s);

/// omega_b(s) = a_1 + a_2 s + ... (coefficients in increasing degree).
[[nodiscard]] ScalarFunction polynomial_omega_b(std::vector<double> coeffs);
/// omega_b(s) = a1 + a2 (s - a3)^a4 for s > a3, a1 below.
[[nodiscard]] ScalarFunction power_omega_b(double a1, double a2, double a3, double a4);
/// omega_b(s) = a1 + a2 exp(-a3 (s - a4)^2) on [s0, s1], held constant outside.
[[nodiscard]] ScalarFunction gaussian_omega_b(double a1, double a2, double a3, double a4, double s0, double s1);

struct MaterialModel {
    std::string name;
    ScalarFunction q;        // squared sound speed, m^2/s^2
    ScalarFunction b;        // sound diffusivity
    ScalarFunction omega_b;  // perfusion rate, 1/s

    double theta_ambient = 37.0;  // deg C
    double rho_a = 1050.0;        // kg/m^3
    double rho_b = 1030.0;
    double c_a = 3600.0;          // J/(kg K)
    double c_b = 3620.0;
    double kappa_a = 0.512;       // W/(m K)
    double beta_a = 6.0;
    double alpha0 = 0.0;          // Np/m, informational for power-law damping
    double zeta_tilde = 2.0;

    /// k(Theta) = beta_a / (rho_a q(Theta)).
    [[nodiscard]] double k(double theta_abs) const { return beta_a / (rho_a * q(theta_abs)); }
    [[nodiscard]] double kappa() const { return kappa_a / (rho_a * c_a); }
    [[nodiscard]] double nu() const { return rho_b * c_b / (rho_a * c_a); }
    /// Factor in front of p_t^2 in the scaled absorbed energy.
    [[nodiscard]] double absorption_factor(double theta_abs) const;
};

/// Liver tissue at excitation frequency `frequency` (Hz):
///   q = (1529.3 + 1.6856 T + 6.1131e-2 T^2 - 2.2967e-3 T^3 + 2.2657e-5 T^4 - 7.1795e-8 T^5)^2
///   b = (2 alpha0 / omega^2) q^{3/2},  alpha0 = 4.5e-6 f,  omega = 2 pi f
///   omega_b = 1e-4 (5 + T)
[[nodiscard]] MaterialModel liver_model(double frequency);

/// Polynomial q and b (coefficients in increasing degree) with the given
/// perfusion law; scalar constants default to the liver values.
struct CustomMaterial {
    std::vector<double> q_coeffs;
    std::vector<double> b_coeffs;
    ScalarFunction omega_b;
    MaterialModel constants;  // only the scalar members are read
};
[[nodiscard]] MaterialModel custom_model(const CustomMaterial& spec);

/// Nodal q~, b~, k~, omega_b~ at theta + Theta_a.
struct CoefficientFields {
    NodalField q;
    NodalField b;
    NodalField k;
    NodalField omega_b;
};

/// Throws DegeneracyError at or below absolute zero and when q~ or b~ falls
/// to 1e-12 of its ambient value (or below) at any node, and DomainError on
/// non-finite theta.
[[nodiscard]] CoefficientFields eval_coefficient_fields(const MaterialModel& model, const NodalField& theta);

/// Nodal zeta~/(rho_a C_a) b~/q~^2 p_t^2.
[[nodiscard]] NodalField absorbed_energy(const MaterialModel& model, const NodalField& pt, const NodalField& theta);

/// Nodal zeta~/(rho_a C_a) b~/q~^2, the coefficient of p_t^2 in absorbed_energy.
[[nodiscard]] NodalField absorption_coefficient(const MaterialModel& model, const NodalField& theta);

}  // namespace hifu

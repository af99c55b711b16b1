#pragma once

// Implicit-Euler step of the drug concentration equation
//   c_t + div(v c) - div(D grad c) = f_c
// with v = v0 - k_D grad p, and mass functionals.

#include "hifu/fem.hpp"

#include <Eigen/SparseLU>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>

namespace hifu {

struct ConcentrationState {
    NodalField c;  // kg/m^3
    std::size_t step = 0;
    double time = 0.0;

    [[nodiscard]] static ConcentrationState uniform(std::size_t n, double c0);
};

/// Sign of the convection term in the weak form.
///   Divergence: (c^{n+1}, phi) - tau (c^{n+1} v, grad phi), integrated by parts
///               from div(v c); mass moves along v.
///   Reversed:   (c^{n+1}, phi) + tau (c^{n+1} v, grad phi); mass moves along -v.
/// Diffusion enters as + tau (D grad c, grad phi) in both.
enum class ConvectionForm { Divergence, Reversed };

[[nodiscard]] std::string_view to_string(ConvectionForm form);
[[nodiscard]] ConvectionForm parse_convection_form(std::string_view name);

struct VelocityModel {
    Vec2 v0{};          // m/s
    double k_d = 1e-6;  // m^2/(Pa s)
    double d0 = 5.0;    // m^2/s
    ConvectionForm form = ConvectionForm::Reversed;
    /// Optional bounded perturbation D(p, theta) - D0, evaluated per node.
    std::function<double(double p, double theta)> perturbation;

    /// Throws ValidationError unless d0 > 0 and k_d >= 0.
    void validate() const;
    /// v0 - k_D grad p; an empty grad_p means grad p = 0.
    [[nodiscard]] ElementField velocity(const ElementField& grad_p, std::size_t num_elements) const;
};

/// Phi_c . n = inflow on Gamma_b and -outflow c on Gamma_a, zero elsewhere.
/// outflow = 0 is the plain inflow mode.
struct TransportBoundary {
    double inflow = 0.0;   // g~, kg/m^2
    double outflow = 0.0;  // m/s

    [[nodiscard]] static TransportBoundary inflow_only(double g) { return {g, 0.0}; }
    [[nodiscard]] static TransportBoundary inflow_outflow(double g, double out) { return {g, out}; }
};

/// Discrete balance of one step: delta = m^{n+1} - m^n against
/// expected = tau (int Phi_c . n + int f_c), both evaluated at the new level.
struct MassBudget {
    double delta = 0.0;
    double expected = 0.0;
    double scale = 0.0;  // tau times the summed magnitudes of the flux terms
    [[nodiscard]] double relative_error() const;
};

struct TransportStats {
    double max_speed = 0.0;
    double max_peclet = 0.0;  // |v| h_K / (2 D0)
    double max_courant = 0.0;  // |v| tau / h_K
    MassBudget budget;
};

class TransportStepper {
public:
    TransportStepper(std::shared_ptr<const FeSpace> space, VelocityModel velocity, TransportBoundary boundary,
                     double dt);

    /// grad_p may be empty (p = 0). p_new and theta_new are read only by the
    /// diffusion perturbation and may be empty without one.
    TransportStats step(ConcentrationState& state, const ElementField& grad_p, const NodalField& p_new = {},
                        const NodalField& theta_new = {}, const NodalField* f_c = nullptr);

    [[nodiscard]] const TransportBoundary& boundary() const noexcept { return boundary_; }

private:
    std::shared_ptr<const FeSpace> space_;
    VelocityModel vel_;
    TransportBoundary boundary_;
    double dt_;
    SparseMatrix fixed_;  // M + tau D0 K + tau outflow B_a
    Vector inflow_load_;  // tau g~ int_{Gamma_b} v_i
    Vector outflow_weights_;  // int_{Gamma_a} v_i
    std::vector<double> diameter_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool analyzed_ = false;
    bool warned_peclet_ = false;
    bool warned_courant_ = false;
};

[[nodiscard]] ConcentrationState transport_step(const ConcentrationState& conc, const NodalField& p_new,
                                                const ElementField& grad_p, const NodalField& theta_new,
                                                const VelocityModel& vel, const Mesh& mesh, double dt,
                                                const NodalField& f_c, const TransportBoundary& boundary);

enum class MassRegion { Whole, Focal };

[[nodiscard]] std::string_view to_string(MassRegion region);
[[nodiscard]] MassRegion parse_mass_region(std::string_view name);

/// Sum over elements of |K| times the vertex mean of c; Focal keeps the
/// elements whose centroid has x2 in (0.02, 0.05).
[[nodiscard]] double mass_integral(const ConcentrationState& conc, const Mesh& mesh, MassRegion region);

}  // namespace hifu

#pragma once

// Semi-implicit step of the scaled Pennes equation.

#include "hifu/fem.hpp"
#include "hifu/materials.hpp"

#include <cstddef>
#include <memory>

namespace hifu {

struct ThermalState {
    NodalField theta;  // deg C above ambient
    std::size_t step = 0;
    double time = 0.0;

    [[nodiscard]] static ThermalState zeros(std::size_t n);
};

struct ThermalStats {
    int linear_iterations = 0;
    double min_theta = 0.0;
};

/// Solves
///   (theta^{n+1}, phi) + tau kappa (grad theta^{n+1}, grad phi)
///     + tau (nu omega_b(theta^n + Theta_a) theta^{n+1}, phi)
///   = (theta^n + tau G(p_t^{n+1}, theta^n) + tau f_theta, phi)
/// with homogeneous Neumann data, by preconditioned CG.
class PennesStepper {
public:
    PennesStepper(std::shared_ptr<const FeSpace> space, MaterialModel model, double dt, double linear_tol = 1e-12);

    /// Throws DefinitenessError when 1 + tau nu omega_b <= 0 at some node.
    ThermalStats step(ThermalState& state, const NodalField& pt_new, const NodalField* f_theta = nullptr);

private:
    std::shared_ptr<const FeSpace> space_;
    MaterialModel model_;
    double dt_;
    double linear_tol_;
    SparseMatrix diffusion_;  // tau kappa K
};

[[nodiscard]] ThermalState pennes_step(const ThermalState& thermal, const NodalField& pt_new, const MaterialModel& model,
                                       const Mesh& mesh, double dt, const NodalField& f_theta);

struct ThermalProbe {
    double max_theta = 0.0;
    std::size_t node = 0;  // lowest index among equal maxima
};

[[nodiscard]] ThermalProbe thermal_dose_probe(const ThermalState& thermal);

}  // namespace hifu

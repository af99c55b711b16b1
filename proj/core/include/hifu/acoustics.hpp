#pragma once

// Westervelt time stepping: Newmark predictor-corrector with an inner
// fixed-point iteration for the quasilinear mass term, and the L1 history
// term of the fractional damping.

#include "hifu/fem.hpp"
#include "hifu/kernels.hpp"
#include "hifu/materials.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace hifu {

struct NewmarkParams {
    double beta = 0.45;
    double gamma = 0.85;
    double tol = 1e-12;
    int max_iters = 200;

    /// Throws ValidationError unless 0 < beta <= 0.5, 0 < gamma <= 1,
    /// tol > 0 and max_iters >= 1.
    void validate() const;
};

/// Boundary datum g(t): g0 sin(wt) up to one period, then
/// g0 sin(wt) (1 + sin(wt/4)).
struct Excitation {
    double g0 = 1e9;
    double omega = 0.0;  // rad/s

    [[nodiscard]] static Excitation from_frequency(double g0, double frequency);
};

[[nodiscard]] double excitation_g(double t, const Excitation& exc);
[[nodiscard]] double excitation_g_prime(double t, const Excitation& exc);

struct AcousticState {
    NodalField p;
    NodalField p_t;
    NodalField p_tt;
    std::vector<NodalField> velocity_history;  // p_t^0 .. p_t^n
    std::size_t step = 0;
    double time = 0.0;

    /// Rest state with history [0].
    [[nodiscard]] static AcousticState zeros(std::size_t n);
};

struct NewmarkPredictor {
    NodalField p;
    NodalField p_t;
};

/// p~ = p + tau p_t + (1/2 - beta) tau^2 p_tt,  p~_t = p_t + (1 - gamma) tau p_tt.
[[nodiscard]] NewmarkPredictor predictor(const AcousticState& state, double dt, const NewmarkParams& params);

/// p = p~ + beta tau^2 p_tt,  p_t = p~_t + gamma tau p_tt.
[[nodiscard]] NewmarkPredictor corrector(const NewmarkPredictor& pred, const NodalField& p_tt_new, double dt,
                                         const NewmarkParams& params);

/// Upsilon = sum_{j=1}^{n+1} zeta_j history[n+1-j], the explicit part of the
/// L1 convolution. Throws ConsistencyError unless history holds n+1 entries
/// for weights built at step n.
[[nodiscard]] NodalField history_term(const AcousticState& state, const L1Weights& weights);

enum class CouplingMode { Full, FrozenTemperature, LinearAcoustics, NoUltrasound };

[[nodiscard]] std::string_view to_string(CouplingMode mode);
/// Accepts full, frozen_temperature, linear_acoustics, no_ultrasound.
[[nodiscard]] CouplingMode parse_coupling_mode(std::string_view name);

/// How the memory term -b K*Laplace(p_t) is discretised.
///   Fractional: Abel kernel through the L1 weights.
///   Strong:     Dirac kernel, an instantaneous -b Laplace(p_t).
///   None:       no damping.
enum class DampingModel { Fractional, Strong, None };

[[nodiscard]] std::string_view to_string(DampingModel model);
[[nodiscard]] DampingModel parse_damping_model(std::string_view name);

struct WesterveltOptions {
    NewmarkParams newmark;
    double alpha = 0.8;
    DampingModel damping = DampingModel::Fractional;
    bool nonlinear = true;         // false sets k = 0
    bool thermal_coupling = true;  // false evaluates every coefficient at Theta_a
    double linear_tol = 1e-13;     // relative residual of the inner solves
    std::size_t history_cap_bytes = std::size_t{8} << 30;
    /// Optional volume source f_p(t^{n+1}) as a nodal field; enters as (b~ f_p, phi).
    std::function<NodalField(double)> source;

    [[nodiscard]] static WesterveltOptions for_mode(CouplingMode mode);
};

struct WesterveltStats {
    int iterations = 0;          // fixed-point solves this step
    double last_change = 0.0;    // final relative L2 change of p_tt
    int linear_iterations = 0;   // summed Krylov iterations
    double min_mass_factor = 1.0;
    std::vector<double> changes;  // relative change after every solve
};

/// Owns the per-run state of the wave solver: cached operators, the L1
/// weight cache and the boundary load vector.
class WesterveltStepper {
public:
    WesterveltStepper(std::shared_ptr<const FeSpace> space, MaterialModel model, Excitation exc, double dt,
                      WesterveltOptions options);

    /// Solves for p_tt^0 from the initial data and resets the history to [p_t^0].
    void initialize(AcousticState& state, const NodalField& theta);

    /// Advances t^n -> t^{n+1} with coefficients frozen at theta^n.
    WesterveltStats step(AcousticState& state, const NodalField& theta);

    [[nodiscard]] const WesterveltOptions& options() const noexcept { return opts_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    /// Phi_p . n on Gamma_b for the step ending at t^{n+1}.
    [[nodiscard]] double boundary_flux(std::size_t n) const;

private:
    struct Operators {
        CoefficientFields coef;
        SparseMatrix kq;
        SparseMatrix kb;
        NodalField theta_key;
    };
    const Operators& operators(const NodalField& theta);
    [[nodiscard]] double damping_scale() const;  // tau^{1-alpha}, 1 or 0

    std::shared_ptr<const FeSpace> space_;
    MaterialModel model_;
    Excitation exc_;
    double dt_;
    WesterveltOptions opts_;
    std::optional<L1WeightCache> weights_;
    std::optional<Operators> ops_;
    double q_ambient_;
    double b_ambient_;
};

/// One step on a temporary stepper; convenient for tests, slow for runs
/// (weights and operators are rebuilt every call).
[[nodiscard]] AcousticState westervelt_step(const AcousticState& state, const NodalField& theta,
                                            const MaterialModel& model, const Mesh& mesh, const Excitation& exc,
                                            double dt, const NewmarkParams& params, double kernel_alpha,
                                            CouplingMode mode);

}  // namespace hifu

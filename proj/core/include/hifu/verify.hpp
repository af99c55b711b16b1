#pragma once

// Independent oracles and convergence studies: analytic Caputo derivatives,
// a scalar modal reference for the wave scheme, a manufactured Pennes
// solution, and the named check suites driven by `hifu verify`.

#include "hifu/acoustics.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace hifu {

struct ConvergenceReport {
    std::vector<double> resolutions;  // step or mesh sizes, decreasing
    std::vector<double> errors;
    double order = 0.0;   // least-squares slope of log(error) against log(resolution)
    bool exact = false;   // every error at round-off level; order is then +inf
};

/// Least-squares slope of log(errors) against log(resolutions). Needs at
/// least two points with positive errors.
[[nodiscard]] double fitted_order(const std::vector<double>& resolutions, const std::vector<double>& errors);

/// L1 approximation of D^alpha t^m at t = T from exact velocity samples
/// m t^{m-1}, against Gamma(m+1) T^{m-alpha} / Gamma(m+1-alpha). m in {0,1,2}.
[[nodiscard]] ConvergenceReport caputo_convergence(double alpha, int m, const std::vector<std::size_t>& steps,
                                                   double t_end = 1.0);

/// Scalar modal equation  a'' + q lambda a + b lambda D^alpha a = f(t)
/// advanced by the same Newmark / L1 scheme as the finite-element wave
/// solver, with M -> 1 and K -> lambda.
struct ModeProblem {
    double alpha = 0.8;
    double lambda = 1.0;
    double q = 1.0;
    double b = 0.0;
    DampingModel damping = DampingModel::Fractional;
    NewmarkParams newmark;
    double a0 = 1.0;
    double a1 = 0.0;
    double t_end = 1.0;
    std::function<double(double)> forcing;  // empty means f = 0
};

struct ModeTrajectory {
    double dt = 0.0;
    std::vector<double> a;    // a(t_i), i = 0..N
    std::vector<double> a_t;
};

[[nodiscard]] ModeTrajectory mode_trajectory(const ModeProblem& problem, std::size_t steps);
/// mode_trajectory at oracle resolution; DomainError unless steps >= 2^14.
[[nodiscard]] ModeTrajectory mode_reference(const ModeProblem& problem, std::size_t steps);

/// max_i |coarse.a_i - fine.a_{i r}| / max_i |fine.a_{i r}|, r = fine/coarse.
[[nodiscard]] double relative_linf_error(const ModeTrajectory& coarse, const ModeTrajectory& fine);

/// Runs the finite-element wave stepper on a structured mesh of [0,1] x [0,1/2]
/// (`cells` x `cells`/2 squares) with constant q and b, k = 0 and zero
/// boundary data. The initial shape is the discrete eigenvector of (K, M)
/// nearest cos(pi x1); its modal amplitude is compared with the scalar
/// reference `ratio` times finer at the discrete eigenvalue.
struct FeModeResult {
    double lambda_h = 0.0;
    double mode_residual = 0.0;  // largest deviation of the FE field from the mode shape
    double relative_error = 0.0;
};
[[nodiscard]] FeModeResult fe_mode_study(const ModeProblem& problem, std::size_t cells, std::size_t steps,
                                         std::size_t ratio);

/// Manufactured Pennes solution theta = A e^{-t} cos(pi x1 / w) cos(pi x2 / H)
/// on the box [-w, w] x [0, H] with liver constants and p_t = 0.
struct ManufacturedHeatConfig {
    double amplitude = 1.0;
    double half_width = 0.04;
    double height = 0.12;
    double t_end = 0.1;
    double frequency = 1e5;
};
/// L2 error at t_end against the exact solution for each mesh size, with a
/// time step small enough that the spatial error dominates.
[[nodiscard]] ConvergenceReport manufactured_heat_space(const ManufacturedHeatConfig& config,
                                                        const std::vector<double>& mesh_sizes, double dt);
/// Successive-difference (self-convergence) L2 errors for time steps
/// t_end / n, n in `steps`, on one mesh.
[[nodiscard]] ConvergenceReport manufactured_heat_time(const ManufacturedHeatConfig& config, double mesh_size,
                                                       const std::vector<std::size_t>& steps);

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// kernels, fem, steppers or all; ValidationError for other names.
[[nodiscard]] std::vector<CheckResult> run_suite(std::string_view suite);
[[nodiscard]] const std::vector<std::string>& suite_names();

}  // namespace hifu

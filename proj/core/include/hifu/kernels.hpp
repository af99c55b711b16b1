#pragma once

// Memory kernels of the nonlocal damping term, the Mittag-Leffler function,
// and the L1-type discretisation of the Caputo-Djrbashian derivative.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace hifu {

// -----------------------------------------------------------------------------
// Special functions
// -----------------------------------------------------------------------------

/// Gamma function for x > 0 (Lanczos, g = 7, nine coefficients).
/// Throws DomainError for x <= 0.
[[nodiscard]] double gamma_fn(double x);

/// log Gamma(x) for x > 0.
[[nodiscard]] double log_gamma(double x);

/// 1 / Gamma(x) for every real x; zero at the poles x = 0, -1, -2, ...
[[nodiscard]] double reciprocal_gamma(double x);

/// Generalised Mittag-Leffler function E_{a,b}(z) = sum_k z^k / Gamma(a k + b).
///
/// Plain power series, truncated once a term drops below 1e-16 of the running
/// sum (at most 500 terms). Throws AccuracyError when the cap is hit or when
/// cancellation between large terms leaves less than ~8 reliable digits,
/// which happens for strongly negative z.
[[nodiscard]] double mittag_leffler(double a, double b, double z);

// -----------------------------------------------------------------------------
// Kernels
// -----------------------------------------------------------------------------

struct AbelKernel {
    double alpha;
};
struct ExponentialKernel {
    double tau_relax;
};
struct MittagLefflerKernel {
    double a;
    double b;
    double tau_relax;
};
struct DiracDeltaKernel {};

/// One of the four supported memory kernels. Construct through the factories,
/// which validate the parameters.
class MemoryKernel {
public:
    using Variant = std::variant<AbelKernel, ExponentialKernel, MittagLefflerKernel, DiracDeltaKernel>;

    static MemoryKernel abel(double alpha);
    static MemoryKernel exponential(double tau_relax);
    static MemoryKernel mittag_leffler(double a, double b, double tau_relax);
    static MemoryKernel dirac_delta();

    [[nodiscard]] const Variant& variant() const noexcept { return v_; }
    [[nodiscard]] bool is_dirac() const noexcept { return std::holds_alternative<DiracDeltaKernel>(v_); }

private:
    explicit MemoryKernel(Variant v) : v_(v) {}
    Variant v_;
};

/// K(t) for t > 0. DiracDelta throws UnsupportedError: the steppers treat it
/// structurally as an instantaneous damping term.
[[nodiscard]] double kernel_eval(const MemoryKernel& k, double t);

/// First antiderivative K1(t) = int_0^t K(s) ds (Heaviside step for DiracDelta).
[[nodiscard]] double kernel_integral(const MemoryKernel& k, double t);

/// Second antiderivative K2(t) = int_0^t K1(s) ds.
[[nodiscard]] double kernel_double_integral(const MemoryKernel& k, double t);

// -----------------------------------------------------------------------------
// L1 weights
// -----------------------------------------------------------------------------

/// Discrete convolution weights zeta_0..zeta_{n+1} of the L1-type scheme for
/// the step t_n -> t_{n+1}:
///
///   zeta_0     = 1 / (2 Gamma(2-alpha))
///   zeta_j     = ((j+1)^{1-alpha} - (j-1)^{1-alpha}) / (2 Gamma(2-alpha)),  1 <= j <= n
///   zeta_{n+1} = ((n+1)^{1-alpha} - n^{1-alpha})     / (2 Gamma(2-alpha))
struct L1Weights {
    double alpha = 0.0;
    std::size_t n = 0;
    std::vector<double> weights;  // n + 2 entries

    [[nodiscard]] double operator[](std::size_t j) const { return weights[j]; }
    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

[[nodiscard]] L1Weights l1_weights(double alpha, std::size_t n);

/// Incremental L1 weight generator. Powers j^{1-alpha} are computed once and
/// reused as the step index grows, so advancing one step costs O(1) new pow()
/// calls plus the O(n) copy into the returned weights.
class L1WeightCache {
public:
    explicit L1WeightCache(double alpha);

    /// Weights for the step t_n -> t_{n+1}.
    const L1Weights& at_step(std::size_t n);

    [[nodiscard]] double alpha() const noexcept { return current_.alpha; }

private:
    double power(std::size_t j);

    double scale_;  // 1 / (2 Gamma(2 - alpha))
    std::vector<double> powers_;
    L1Weights current_;
    bool valid_ = false;
};

/// tau^{1-alpha} sum_{j=0}^{n+1} zeta_j^{n+1} history[n+1-j], the L1
/// approximation of D_t^alpha p(t_{n+1}) from p_t sampled at t_0..t_{n+1}.
/// A single sample (n+1 = 0) gives 0. Throws DomainError on empty history,
/// alpha outside (0,1), or tau <= 0.
[[nodiscard]] double caputo_l1_apply(std::span<const double> velocity_history, double alpha, double tau);

// -----------------------------------------------------------------------------
// Coercivity diagnostic
// -----------------------------------------------------------------------------

struct CoercivityForms {
    double lhs = 0.0;  // int_0^T (K*y) y dt
    double rhs = 0.0;  // int_0^T (K*y)^2 dt  (C_K = 1)
};

/// Discretised sides of the kernel coercivity inequality for a signal sampled
/// at t_i = i tau, i = 0..N. The signal is taken piecewise constant with the
/// interval mean of neighbouring samples; the quadratic form on the left is
/// integrated exactly, the right side by the trapezoidal rule on the nodes.
/// Requires signal.size() >= 2 and tau > 0.
[[nodiscard]] CoercivityForms coercivity_probe(const MemoryKernel& k, std::span<const double> signal, double tau);

namespace testing {

/// Verification hook: adds `delta` to every zeta_0 produced afterwards.
/// Lets the CLI demonstrate that the kernels suite detects a broken weight.
void set_zeta0_perturbation(double delta);

}  // namespace testing

}  // namespace hifu

#include "hifu/kernels.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hifu/error.hpp"

namespace hifu {
namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// Lanczos series A_g(x) with the shift x -> x - 1 already applied.
double lanczos_sum(double xm1) {
    double a = kLanczosCoeffs[0];
    for (std::size_t i = 1; i < kLanczosCoeffs.size(); ++i) a += kLanczosCoeffs[i] / (xm1 + static_cast<double>(i));
    return a;
}

std::atomic<double> g_zeta0_perturbation{0.0};

bool is_nonpositive_integer(double x) { return x <= 0.0 && std::floor(x) == x; }

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("fractional order alpha must lie in (0,1), got " + std::to_string(alpha));
}

}  // namespace

double gamma_fn(double x) {
    if (!(x > 0.0)) throw DomainError("gamma_fn: argument must be positive, got " + std::to_string(x));
    if (x < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
    if (x > 140.0) return std::exp(log_gamma(x));
    const double xm1 = x - 1.0;
    const double t = xm1 + kLanczosG + 0.5;
    // split the power to stay finite up to x ~ 171
    const double half = std::pow(t, 0.5 * (xm1 + 0.5));
    return std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) * lanczos_sum(xm1);
}

double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive, got " + std::to_string(x));
    if (x < 0.5) return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    const double xm1 = x - 1.0;
    const double t = xm1 + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (xm1 + 0.5) * std::log(t) - t + std::log(lanczos_sum(xm1));
}

double reciprocal_gamma(double x) {
    if (is_nonpositive_integer(x)) return 0.0;
    if (x < 0.5) return std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x) / std::numbers::pi;
    if (x > 140.0) return std::exp(-log_gamma(x));
    return 1.0 / gamma_fn(x);
}

double mittag_leffler(double a, double b, double z) {
    if (!(a > 0.0)) throw DomainError("mittag_leffler: a must be positive");
    if (z == 0.0) return reciprocal_gamma(b);

    constexpr int kMaxTerms = 500;
    constexpr double kCutoff = 1e-16;
    const double log_abs_z = std::log(std::abs(z));

    double sum = 0.0;
    double max_term = 0.0;
    double last_mag = 0.0;
    bool converged = false;
    for (int k = 0; k < kMaxTerms && !converged; ++k) {
        const double arg = a * k + b;
        double term;
        if (arg > 0.0 && arg <= 50.0 && k * log_abs_z < 600.0) {
            term = std::pow(z, k) / gamma_fn(arg);
        } else if (arg > 0.0) {
            const double mag = std::exp(k * log_abs_z - log_gamma(arg));
            term = (z < 0.0 && (k % 2 == 1)) ? -mag : mag;
        } else {
            term = std::pow(z, k) * reciprocal_gamma(arg);
        }
        if (!std::isfinite(term)) throw AccuracyError("mittag_leffler: series term overflowed", term);
        sum += term;
        const double mag = std::abs(term);
        max_term = std::max(max_term, mag);
        // terms grow until k ~ |z|^{1/a}; only stop on the decaying tail
        converged = k > 0 && arg > 1.0 && mag <= last_mag &&
                    mag <= kCutoff * std::max(std::abs(sum), std::numeric_limits<double>::min());
        last_mag = mag;
    }
    if (!converged) throw AccuracyError("mittag_leffler: series did not converge within 500 terms", last_mag);

    const double abs_error = 4.0 * std::numeric_limits<double>::epsilon() * max_term;
    if (abs_error > 1e-8 * std::max(std::abs(sum), 1.0))
        throw AccuracyError("mittag_leffler: cancellation in the power series (|z| too large for a negative argument)",
                            abs_error);
    return sum;
}

// -----------------------------------------------------------------------------

MemoryKernel MemoryKernel::abel(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("Abel kernel requires 0 < alpha < 1");
    return MemoryKernel(AbelKernel{alpha});
}

MemoryKernel MemoryKernel::exponential(double tau_relax) {
    if (!(tau_relax > 0.0)) throw DomainError("exponential kernel requires tau_relax > 0");
    return MemoryKernel(ExponentialKernel{tau_relax});
}

MemoryKernel MemoryKernel::mittag_leffler(double a, double b, double tau_relax) {
    if (!(a > 0.0)) throw DomainError("Mittag-Leffler kernel requires a > 0");
    if (!(tau_relax > 0.0)) throw DomainError("Mittag-Leffler kernel requires tau_relax > 0");
    return MemoryKernel(MittagLefflerKernel{a, b, tau_relax});
}

MemoryKernel MemoryKernel::dirac_delta() { return MemoryKernel(DiracDeltaKernel{}); }

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive_time(double t) {
    if (!(t > 0.0)) throw DomainError("kernel evaluation requires t > 0, got " + std::to_string(t));
}

void require_integrable(const MittagLefflerKernel& k) {
    if (!(k.b > 0.0)) throw DomainError("Mittag-Leffler kernel antiderivatives require b > 0");
}

}  // namespace

double kernel_eval(const MemoryKernel& k, double t) {
    return std::visit(
        Overloaded{
            [&](const AbelKernel& a) {
                require_positive_time(t);
                return std::pow(t, -a.alpha) * reciprocal_gamma(1.0 - a.alpha);
            },
            [&](const ExponentialKernel& e) {
                require_positive_time(t);
                return std::exp(-t / e.tau_relax) / e.tau_relax;
            },
            [&](const MittagLefflerKernel& m) {
                require_positive_time(t);
                // (1/tau)^{a-b} (1/tau^b) = tau^{-a}
                return std::pow(m.tau_relax, -m.a) * std::pow(t, m.b - 1.0) *
                       mittag_leffler(m.a, m.b, -std::pow(t / m.tau_relax, m.a));
            },
            [&](const DiracDeltaKernel&) -> double {
                throw UnsupportedError("the Dirac delta kernel has no pointwise values");
            },
        },
        k.variant());
}

double kernel_integral(const MemoryKernel& k, double t) {
    if (t <= 0.0) return 0.0;
    return std::visit(Overloaded{
                          [&](const AbelKernel& a) { return std::pow(t, 1.0 - a.alpha) * reciprocal_gamma(2.0 - a.alpha); },
                          [&](const ExponentialKernel& e) { return -std::expm1(-t / e.tau_relax); },
                          [&](const MittagLefflerKernel& m) {
                              require_integrable(m);
                              return std::pow(m.tau_relax, -m.a) * std::pow(t, m.b) *
                                     mittag_leffler(m.a, m.b + 1.0, -std::pow(t / m.tau_relax, m.a));
                          },
                          [&](const DiracDeltaKernel&) { return 1.0; },
                      },
                      k.variant());
}

double kernel_double_integral(const MemoryKernel& k, double t) {
    if (t <= 0.0) return 0.0;
    return std::visit(Overloaded{
                          [&](const AbelKernel& a) { return std::pow(t, 2.0 - a.alpha) * reciprocal_gamma(3.0 - a.alpha); },
                          [&](const ExponentialKernel& e) { return t + e.tau_relax * std::expm1(-t / e.tau_relax); },
                          [&](const MittagLefflerKernel& m) {
                              require_integrable(m);
                              return std::pow(m.tau_relax, -m.a) * std::pow(t, m.b + 1.0) *
                                     mittag_leffler(m.a, m.b + 2.0, -std::pow(t / m.tau_relax, m.a));
                          },
                          [&](const DiracDeltaKernel&) { return t; },
                      },
                      k.variant());
}

// -----------------------------------------------------------------------------

L1Weights l1_weights(double alpha, std::size_t n) {
    require_alpha(alpha);
    const double s = 1.0 - alpha;
    const double scale = 0.5 * reciprocal_gamma(2.0 - alpha);

    L1Weights w;
    w.alpha = alpha;
    w.n = n;
    w.weights.resize(n + 2);
    w.weights[0] = scale + g_zeta0_perturbation.load(std::memory_order_relaxed);
    double prev = 0.0;                 // (j-1)^s
    double cur = 1.0;                  // j^s
    for (std::size_t j = 1; j <= n; ++j) {
        const double next = std::pow(static_cast<double>(j + 1), s);
        w.weights[j] = scale * (next - prev);
        prev = cur;
        cur = next;
    }
    // j = n + 1: ((n+1)^s - n^s)
    w.weights[n + 1] = scale * (std::pow(static_cast<double>(n + 1), s) - std::pow(static_cast<double>(n), s));
    return w;
}

L1WeightCache::L1WeightCache(double alpha) {
    require_alpha(alpha);
    scale_ = 0.5 * reciprocal_gamma(2.0 - alpha);
    current_.alpha = alpha;
}

double L1WeightCache::power(std::size_t j) {
    const double s = 1.0 - current_.alpha;
    while (powers_.size() <= j) powers_.push_back(std::pow(static_cast<double>(powers_.size()), s));
    return powers_[j];
}

const L1Weights& L1WeightCache::at_step(std::size_t n) {
    auto& w = current_.weights;
    if (valid_ && current_.n == n) return current_;
    if (valid_ && n == current_.n + 1) {
        // zeta_n switches from the tail formula to the interior formula
        w[n] = scale_ * (power(n + 1) - power(n - 1));
        w.push_back(scale_ * (power(n + 1) - power(n)));
    } else {
        w.assign(n + 2, 0.0);
        w[0] = scale_ + g_zeta0_perturbation.load(std::memory_order_relaxed);
        for (std::size_t j = 1; j <= n; ++j) w[j] = scale_ * (power(j + 1) - power(j - 1));
        w[n + 1] = scale_ * (power(n + 1) - power(n));
    }
    current_.n = n;
    valid_ = true;
    return current_;
}

double caputo_l1_apply(std::span<const double> velocity_history, double alpha, double tau) {
    if (velocity_history.empty()) throw DomainError("caputo_l1_apply: empty velocity history");
    require_alpha(alpha);
    if (!(tau > 0.0)) throw DomainError("caputo_l1_apply: tau must be positive");
    if (velocity_history.size() == 1) return 0.0;

    const std::size_t n = velocity_history.size() - 2;
    const L1Weights w = l1_weights(alpha, n);
    double acc = 0.0;
    for (std::size_t j = 0; j <= n + 1; ++j) acc += w[j] * velocity_history[n + 1 - j];
    return std::pow(tau, 1.0 - alpha) * acc;
}

CoercivityForms coercivity_probe(const MemoryKernel& k, std::span<const double> signal, double tau) {
    if (signal.size() < 2) throw DomainError("coercivity_probe: signal needs at least two samples");
    if (!(tau > 0.0)) throw DomainError("coercivity_probe: tau must be positive");

    const std::size_t intervals = signal.size() - 1;
    std::vector<double> ybar(intervals);
    for (std::size_t i = 0; i < intervals; ++i) ybar[i] = 0.5 * (signal[i] + signal[i + 1]);

    // A_d = int_{I_i} int_{I_j} K(t - s) ds dt for d = i - j (s < t on the diagonal)
    std::vector<double> k2(intervals + 1);
    for (std::size_t d = 0; d <= intervals; ++d) k2[d] = kernel_double_integral(k, static_cast<double>(d) * tau);
    std::vector<double> block(intervals);
    block[0] = k2[1];
    for (std::size_t d = 1; d < intervals; ++d) block[d] = k2[d + 1] - 2.0 * k2[d] + k2[d - 1];

    CoercivityForms out;
    for (std::size_t i = 0; i < intervals; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j <= i; ++j) row += block[i - j] * ybar[j];
        out.lhs += ybar[i] * row;
    }

    // (K*y)(t_i) on the nodes, trapezoidal rule in time
    std::vector<double> k1(intervals + 1);
    for (std::size_t d = 0; d <= intervals; ++d) k1[d] = kernel_integral(k, static_cast<double>(d) * tau);
    for (std::size_t i = 1; i <= intervals; ++i) {
        double conv = 0.0;
        for (std::size_t j = 0; j < i; ++j) conv += ybar[j] * (k1[i - j] - k1[i - j - 1]);
        const double w = (i == intervals) ? 0.5 : 1.0;
        out.rhs += w * tau * conv * conv;
    }
    return out;
}

namespace testing {

void set_zeta0_perturbation(double delta) { g_zeta0_perturbation.store(delta, std::memory_order_relaxed); }

}  // namespace testing

}  // namespace hifu

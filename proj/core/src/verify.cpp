#include "hifu/verify.hpp"

#include "hifu/bioheat.hpp"
#include "hifu/error.hpp"
#include "hifu/fem.hpp"
#include "hifu/kernels.hpp"
#include "hifu/materials.hpp"
#include "hifu/scenario.hpp"

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace hifu {

double fitted_order(const std::vector<double>& resolutions, const std::vector<double>& errors) {
    if (resolutions.size() != errors.size() || resolutions.size() < 2)
        throw DomainError("fitted_order needs at least two (resolution, error) pairs");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const auto n = static_cast<double>(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !(resolutions[i] > 0.0))
            throw DomainError("fitted_order needs positive resolutions and errors");
        const double x = std::log(resolutions[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

ConvergenceReport finish_report(ConvergenceReport r, double scale) {
    r.exact = std::all_of(r.errors.begin(), r.errors.end(), [&](double e) { return e <= 1e-13 * scale; });
    r.order = r.exact ? std::numeric_limits<double>::infinity() : fitted_order(r.resolutions, r.errors);
    return r;
}

}  // namespace

ConvergenceReport caputo_convergence(double alpha, int m, const std::vector<std::size_t>& steps, double t_end) {
    if (m < 0 || m > 2) throw DomainError("caputo_convergence: monomial degree must be 0, 1 or 2");
    if (steps.size() < 3) throw DomainError("caputo_convergence: at least three resolutions required");
    if (!(t_end > 0.0)) throw DomainError("caputo_convergence: t_end must be positive");
    const double exact =
        m == 0 ? 0.0 : std::tgamma(m + 1.0) * std::pow(t_end, m - alpha) / std::tgamma(m + 1.0 - alpha);
    ConvergenceReport r;
    for (std::size_t n : steps) {
        if (n == 0) throw DomainError("caputo_convergence: step counts must be positive");
        const double tau = t_end / static_cast<double>(n);
        std::vector<double> v(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) * tau;
            v[i] = m == 0 ? 0.0 : m * std::pow(t, m - 1);
        }
        const double approx = caputo_l1_apply(v, alpha, tau);
        r.resolutions.push_back(tau);
        r.errors.push_back(std::abs(approx - exact));
    }
    return finish_report(std::move(r), std::max(1.0, std::abs(exact)));
}

// -----------------------------------------------------------------------------
// Scalar mode
// -----------------------------------------------------------------------------

ModeTrajectory mode_trajectory(const ModeProblem& pb, std::size_t steps) {
    if (steps == 0) throw DomainError("mode_trajectory: steps must be positive");
    if (!(pb.t_end > 0.0)) throw DomainError("mode_trajectory: t_end must be positive");
    pb.newmark.validate();
    const double tau = pb.t_end / static_cast<double>(steps);
    const double beta = pb.newmark.beta;
    const double gamma = pb.newmark.gamma;
    const double ql = pb.q * pb.lambda;
    const double bl = pb.b * pb.lambda;
    const auto f = [&](double t) { return pb.forcing ? pb.forcing(t) : 0.0; };

    ModeTrajectory out;
    out.dt = tau;
    out.a.reserve(steps + 1);
    out.a_t.reserve(steps + 1);
    double a = pb.a0, at = pb.a1;
    double att = f(0.0) - ql * a - (pb.damping == DampingModel::Strong ? bl * at : 0.0);
    out.a.push_back(a);
    out.a_t.push_back(at);

    std::optional<L1WeightCache> cache;
    double cs = 0.0;
    switch (pb.damping) {
        case DampingModel::Fractional:
            if (!(pb.alpha > 0.0 && pb.alpha < 1.0)) throw DomainError("mode_trajectory: alpha must lie in (0, 1)");
            cache.emplace(pb.alpha);
            cs = std::pow(tau, 1.0 - pb.alpha);
            break;
        case DampingModel::Strong: cs = 1.0; break;
        case DampingModel::None: cs = 0.0; break;
    }

    for (std::size_t n = 0; n < steps; ++n) {
        const double pa = a + tau * at + (0.5 - beta) * tau * tau * att;
        const double pat = at + (1.0 - gamma) * tau * att;
        double w0 = 0.0, ups = 0.0;
        if (cache) {
            const L1Weights& w = cache->at_step(n);
            w0 = w[0];
            for (std::size_t j = 1; j <= n + 1; ++j) ups += w[j] * out.a_t[n + 1 - j];
        } else if (pb.damping == DampingModel::Strong) {
            w0 = 1.0;
        }
        const double t1 = static_cast<double>(n + 1) * tau;
        const double lhs = 1.0 + beta * tau * tau * ql + gamma * tau * cs * w0 * bl;
        const double rhs = f(t1) - ql * pa - cs * bl * (w0 * pat + ups);
        att = rhs / lhs;
        a = pa + beta * tau * tau * att;
        at = pat + gamma * tau * att;
        out.a.push_back(a);
        out.a_t.push_back(at);
    }
    return out;
}

ModeTrajectory mode_reference(const ModeProblem& problem, std::size_t steps) {
    if (steps < (std::size_t{1} << 14)) throw DomainError("mode_reference: oracle resolution needs at least 2^14 steps");
    return mode_trajectory(problem, steps);
}

double relative_linf_error(const ModeTrajectory& coarse, const ModeTrajectory& fine) {
    const std::size_t nc = coarse.a.size() - 1;
    const std::size_t nf = fine.a.size() - 1;
    if (nc == 0 || nf % nc != 0) throw DomainError("relative_linf_error: fine grid must refine the coarse grid");
    const std::size_t r = nf / nc;
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i <= nc; ++i) {
        err = std::max(err, std::abs(coarse.a[i] - fine.a[i * r]));
        ref = std::max(ref, std::abs(fine.a[i * r]));
    }
    return ref > 0.0 ? err / ref : err;
}

FeModeResult fe_mode_study(const ModeProblem& pb, std::size_t cells, std::size_t steps, std::size_t ratio) {
    if (cells < 2 || steps == 0 || ratio < 2) throw DomainError("fe_mode_study: invalid resolution");
    if (pb.forcing) throw UnsupportedError("fe_mode_study: forcing is not supported");
    auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(0.0, 1.0, 0.0, 0.5, cells, cells / 2));
    auto space = std::make_shared<const FeSpace>(mesh);
    const auto n = static_cast<Eigen::Index>(mesh->num_vertices());
    NodalField mode(n);
    for (Eigen::Index i = 0; i < n; ++i) mode[i] = std::cos(std::numbers::pi * mesh->vertices()[static_cast<std::size_t>(i)].x1);
    const SparseMatrix k = space->weighted_stiffness(NodalField::Ones(n));
    const SparseMatrix& m = space->mass();
    FeModeResult res;
    // Shift-invert iteration from cos(pi x1) to the discrete eigenvector of (K, M).
    const double shift = 0.9 * mode.dot(k * mode) / mode.dot(m * mode);
    const SparseMatrix shifted = k - shift * m;
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) throw DegeneracyError("fe_mode_study: shifted pencil is singular");
    for (int it = 0; it < 60; ++it) {
        NodalField next = lu.solve(m * mode);
        next /= next.lpNorm<Eigen::Infinity>();
        if (next[0] * mode[0] < 0.0) next = -next;
        const double change = (next - mode).lpNorm<Eigen::Infinity>();
        mode = next;
        if (change < 1e-15) break;
    }
    const double mm = mode.dot(m * mode);
    res.lambda_h = mode.dot(k * mode) / mm;

    CustomMaterial spec;
    spec.q_coeffs = {pb.q};
    spec.b_coeffs = {pb.b};
    spec.constants = liver_model(1e5);
    spec.omega_b = spec.constants.omega_b;
    const MaterialModel model = custom_model(spec);
    WesterveltOptions opts = WesterveltOptions::for_mode(CouplingMode::LinearAcoustics);
    opts.thermal_coupling = false;
    opts.newmark = pb.newmark;
    opts.alpha = pb.alpha;
    opts.damping = pb.damping;
    const double tau = pb.t_end / static_cast<double>(steps);
    WesterveltStepper stepper(space, model, Excitation{0.0, 1.0}, tau, opts);

    AcousticState s = AcousticState::zeros(static_cast<std::size_t>(n));
    s.p = pb.a0 * mode;
    s.p_t = pb.a1 * mode;
    const NodalField theta = NodalField::Zero(n);
    stepper.initialize(s, theta);

    ModeTrajectory fe;
    fe.dt = tau;
    const auto record = [&] {
        const double amp = mode.dot(space->mass() * s.p) / mm;
        fe.a.push_back(amp);
        res.mode_residual = std::max(res.mode_residual, (s.p - amp * mode).lpNorm<Eigen::Infinity>());
    };
    record();
    for (std::size_t i = 0; i < steps; ++i) {
        stepper.step(s, theta);
        record();
    }
    ModeProblem ref = pb;
    ref.lambda = res.lambda_h;
    const ModeTrajectory fine = mode_trajectory(ref, steps * ratio);
    res.relative_error = relative_linf_error(fe, fine);
    return res;
}

// -----------------------------------------------------------------------------
// Manufactured heat
// -----------------------------------------------------------------------------

namespace {

struct HeatSolution {
    const ManufacturedHeatConfig& cfg;
    double kx, ky;

    [[nodiscard]] double shape(Point2 p) const { return std::cos(kx * p.x1) * std::cos(ky * p.x2); }
    [[nodiscard]] double exact(Point2 p, double t) const { return cfg.amplitude * std::exp(-t) * shape(p); }
};

// Degree-4 Dunavant rule: barycentric points and weights (summing to one).
constexpr double kQa[2] = {0.445948490915965, 0.091576213509771};
constexpr double kQw[2] = {0.223381589678011, 0.109951743655322};

double l2_error(const Mesh& mesh, const NodalField& uh, const HeatSolution& sol, double t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
        const auto& tri = mesh.triangles()[k];
        const Point2 v[3] = {mesh.vertices()[tri[0]], mesh.vertices()[tri[1]], mesh.vertices()[tri[2]]};
        const double u[3] = {uh[static_cast<Eigen::Index>(tri[0])], uh[static_cast<Eigen::Index>(tri[1])],
                             uh[static_cast<Eigen::Index>(tri[2])]};
        const double area = std::abs(mesh.signed_area(k));
        double s = 0.0;
        for (int g = 0; g < 2; ++g) {
            const double a = kQa[g], b = 1.0 - 2.0 * a;
            const double pts[3][3] = {{a, a, b}, {a, b, a}, {b, a, a}};
            for (const auto& l : pts) {
                const Point2 p{l[0] * v[0].x1 + l[1] * v[1].x1 + l[2] * v[2].x1,
                               l[0] * v[0].x2 + l[1] * v[1].x2 + l[2] * v[2].x2};
                const double e = l[0] * u[0] + l[1] * u[1] + l[2] * u[2] - sol.exact(p, t);
                s += kQw[g] * e * e;
            }
        }
        acc += area * s;
    }
    return std::sqrt(acc);
}

NodalField solve_heat(const ManufacturedHeatConfig& cfg, const std::shared_ptr<const Mesh>& mesh, std::size_t steps) {
    const HeatSolution sol{cfg, std::numbers::pi / cfg.half_width, std::numbers::pi / cfg.height};
    const MaterialModel model = liver_model(cfg.frequency);
    auto space = std::make_shared<const FeSpace>(mesh);
    const double dt = cfg.t_end / static_cast<double>(steps);
    PennesStepper stepper(space, model, dt, 1e-13);
    const auto n = static_cast<Eigen::Index>(mesh->num_vertices());
    ThermalState s = ThermalState::zeros(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) s.theta[i] = sol.exact(mesh->vertices()[static_cast<std::size_t>(i)], 0.0);
    const NodalField zero = NodalField::Zero(n);
    const double lap = sol.kx * sol.kx + sol.ky * sol.ky;
    NodalField f(n);
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double th = sol.exact(mesh->vertices()[static_cast<std::size_t>(i)], t);
            // theta_t - kappa Laplace(theta) + nu omega_b(theta + Theta_a) theta
            f[i] = -th + model.kappa() * lap * th + model.nu() * model.omega_b(th + model.theta_ambient) * th;
        }
        stepper.step(s, zero, &f);
    }
    return s.theta;
}

std::shared_ptr<const Mesh> heat_mesh(const ManufacturedHeatConfig& cfg, double h) {
    const auto nx = static_cast<std::size_t>(std::llround(2.0 * cfg.half_width / h));
    const auto ny = static_cast<std::size_t>(std::llround(cfg.height / h));
    if (nx < 2 || ny < 2) throw DomainError("manufactured heat: mesh size too coarse for the box");
    return std::make_shared<const Mesh>(build_rectangle_mesh(-cfg.half_width, cfg.half_width, 0.0, cfg.height, nx, ny));
}

}  // namespace

ConvergenceReport manufactured_heat_space(const ManufacturedHeatConfig& cfg, const std::vector<double>& mesh_sizes,
                                          double dt) {
    if (mesh_sizes.size() < 3) throw DomainError("manufactured_heat_space: at least three mesh sizes required");
    if (!(dt > 0.0)) throw DomainError("manufactured_heat_space: dt must be positive");
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(cfg.t_end / dt)));
    const HeatSolution sol{cfg, std::numbers::pi / cfg.half_width, std::numbers::pi / cfg.height};
    ConvergenceReport r;
    for (double h : mesh_sizes) {
        const auto mesh = heat_mesh(cfg, h);
        const NodalField th = solve_heat(cfg, mesh, steps);
        r.resolutions.push_back(h);
        r.errors.push_back(l2_error(*mesh, th, sol, cfg.t_end));
    }
    return finish_report(std::move(r), std::abs(cfg.amplitude));
}

ConvergenceReport manufactured_heat_time(const ManufacturedHeatConfig& cfg, double mesh_size,
                                         const std::vector<std::size_t>& steps) {
    if (steps.size() < 4) throw DomainError("manufactured_heat_time: at least four step counts required");
    const auto mesh = heat_mesh(cfg, mesh_size);
    auto space = std::make_shared<const FeSpace>(mesh);
    std::vector<NodalField> sols;
    for (std::size_t n : steps) sols.push_back(solve_heat(cfg, mesh, n));
    ConvergenceReport r;
    for (std::size_t i = 0; i + 1 < sols.size(); ++i) {
        r.resolutions.push_back(cfg.t_end / static_cast<double>(steps[i]));
        r.errors.push_back(space->l2_norm(sols[i] - sols[i + 1]));
    }
    return finish_report(std::move(r), std::abs(cfg.amplitude));
}

// -----------------------------------------------------------------------------
// Suites
// -----------------------------------------------------------------------------

namespace {

CheckResult check(std::string suite, std::string name, bool ok, std::string detail) {
    return {std::move(suite), std::move(name), ok, std::move(detail)};
}

template <class Fn>
CheckResult guarded(const char* suite, const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return check(suite, name, false, fmt::format("error: {}", e.what()));
    }
}

std::vector<CheckResult> kernels_suite() {
    std::vector<CheckResult> out;
    out.push_back(guarded("kernels", "l1_weight_identities", [] {
        double worst = 0.0;
        bool positive = true, monotone = true;
        for (double alpha : {0.3, 0.5, 0.8}) {
            for (std::size_t n : {0, 1, 2, 10, 100, 1000, 10000}) {
                const L1Weights w = l1_weights(alpha, n);
                double sum = 0.0;
                for (std::size_t j = 0; j < w.size(); ++j) {
                    positive = positive && w[j] > 0.0;
                    if (j >= 2) monotone = monotone && w[j] <= w[j - 1];
                    sum += w[j];
                }
                const double exact = std::pow(static_cast<double>(n + 1), 1.0 - alpha) / std::tgamma(2.0 - alpha);
                worst = std::max(worst, std::abs(sum - exact) / exact);
            }
        }
        return check("kernels", "l1_weight_identities", positive && monotone && worst <= 1e-12,
                     fmt::format("positive={} monotone={} max relative sum error {:.2e}", positive, monotone, worst));
    }));
    out.push_back(guarded("kernels", "caputo_order", [] {
        std::string detail;
        bool ok = true;
        for (double alpha : {0.5, 0.8}) {
            const auto r = caputo_convergence(alpha, 2, {128, 256, 512, 1024});
            ok = ok && r.order >= 2.0 - alpha - 0.15;
            detail += fmt::format("{}alpha={} order {:.3f}", detail.empty() ? "" : ", ", alpha, r.order);
        }
        return check("kernels", "caputo_order", ok, detail);
    }));
    out.push_back(guarded("kernels", "mittag_leffler_identities", [] {
        const double e1 = std::abs(mittag_leffler(1.0, 1.0, 1.0) - std::numbers::e);
        const double e2 = std::abs(mittag_leffler(2.0, 1.0, -std::pow(std::numbers::pi / 2.0, 2)));
        const double e3 = std::abs(mittag_leffler(1.0, 2.0, 1.0) - (std::numbers::e - 1.0));
        const double worst = std::max({e1, e2, e3});
        return check("kernels", "mittag_leffler_identities", worst <= 1e-10, fmt::format("max error {:.2e}", worst));
    }));
    out.push_back(guarded("kernels", "abel_coercivity", [] {
        std::mt19937_64 rng(20240531);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        double worst = std::numeric_limits<double>::infinity();
        for (double alpha : {0.3, 0.5, 0.8}) {
            const MemoryKernel k = MemoryKernel::abel(alpha);
            for (int trial = 0; trial < 100; ++trial) {
                std::vector<double> y(65);
                for (double& v : y) v = dist(rng);
                worst = std::min(worst, coercivity_probe(k, y, 1.0 / 64.0).lhs);
            }
        }
        return check("kernels", "abel_coercivity", worst >= -1e-10, fmt::format("min lhs {:.3e}", worst));
    }));
    return out;
}

Mesh reference_triangle() {
    return Mesh({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {{0, 1, 2}},
                {{{0, 1}, BoundaryTag::GammaB}, {{1, 2}, BoundaryTag::Wall}, {{2, 0}, BoundaryTag::GammaA}});
}

std::vector<CheckResult> fem_suite() {
    std::vector<CheckResult> out;
    out.push_back(guarded("fem", "reference_element_matrices", [] {
        const auto mesh = std::make_shared<const Mesh>(reference_triangle());
        const FeSpace space(mesh);
        const Eigen::MatrixXd m = Eigen::MatrixXd(space.mass());
        const Eigen::MatrixXd k = Eigen::MatrixXd(space.weighted_stiffness(NodalField::Ones(3)));
        const double a = 0.7, b = -1.3;
        const Eigen::MatrixXd c = Eigen::MatrixXd(space.convection({{a, b}}));
        Eigen::Matrix3d me, ke, ce;
        me << 2, 1, 1, 1, 2, 1, 1, 1, 2;
        me /= 24.0;
        ke << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
        const double r0 = -(a + b) / 6.0, r1 = a / 6.0, r2 = b / 6.0;
        ce << r0, r0, r0, r1, r1, r1, r2, r2, r2;
        const double err = std::max({(m - me).cwiseAbs().maxCoeff(), (k - ke).cwiseAbs().maxCoeff(),
                                     (c - ce).cwiseAbs().maxCoeff()});
        return check("fem", "reference_element_matrices", err <= 1e-14, fmt::format("max entry error {:.2e}", err));
    }));
    out.push_back(guarded("fem", "linear_reproduction", [] {
        const auto mesh = std::make_shared<const Mesh>(build_domain_mesh(0.006));
        const FeSpace space(mesh);
        const auto n = static_cast<Eigen::Index>(mesh->num_vertices());
        NodalField u(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Point2 p = mesh->vertices()[static_cast<std::size_t>(i)];
            u[i] = 1.0 + 3.0 * p.x1 - 2.0 * p.x2;
        }
        std::vector<bool> on_boundary(static_cast<std::size_t>(n), false);
        for (const auto& e : mesh->boundary_edges()) on_boundary[e.v[0]] = on_boundary[e.v[1]] = true;
        const SparseMatrix k = space.weighted_stiffness(NodalField::Ones(n));
        const NodalField r = k * u;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!on_boundary[static_cast<std::size_t>(i)]) worst = std::max(worst, std::abs(r[i]));
        return check("fem", "linear_reproduction", worst <= 1e-12, fmt::format("max interior residual {:.2e}", worst));
    }));
    out.push_back(guarded("fem", "transport_mass_budget", [] {
        ScenarioConfig c = preset("example3");
        c.mesh_h = 0.01;
        c.steps = 20;
        c.axis_samples = 2;
        const RunReport r = run(c);
        return check("fem", "transport_mass_budget", r.max_budget_error <= 1e-8,
                     fmt::format("max relative budget error {:.2e} over {} steps", r.max_budget_error, r.steps));
    }));
    return out;
}

std::vector<CheckResult> steppers_suite() {
    std::vector<CheckResult> out;
    out.push_back(guarded("steppers", "linear_fixed_point", [] {
        ScenarioConfig c = preset("example1");
        c.mesh_h = 0.01;
        c.steps = 20;
        c.mode = CouplingMode::LinearAcoustics;
        c.axis_samples = 2;
        const RunReport r = run(c);
        bool ok = true;
        for (const auto& h : r.history) ok = ok && h.fixed_point_iterations == 2 && h.fixed_point_change == 0.0;
        return check("steppers", "linear_fixed_point", ok,
                     fmt::format("{} steps, max {} iterations per step", r.steps, r.max_fixed_point_iterations));
    }));
    out.push_back(guarded("steppers", "harmonic_mode_reference", [] {
        ModeProblem pb;
        pb.damping = DampingModel::None;
        pb.newmark.beta = 0.25;
        pb.newmark.gamma = 0.5;
        pb.t_end = 1.0;
        const ModeTrajectory tr = mode_reference(pb, std::size_t{1} << 16);
        double err = 0.0;
        for (std::size_t i = 0; i < tr.a.size(); ++i)
            err = std::max(err, std::abs(tr.a[i] - std::cos(static_cast<double>(i) * tr.dt)));
        return check("steppers", "harmonic_mode_reference", err <= 1e-8, fmt::format("max error {:.2e}", err));
    }));
    out.push_back(guarded("steppers", "fe_single_mode", [] {
        ModeProblem pb;
        pb.alpha = 0.8;
        pb.q = 1.0;
        pb.b = 0.01;
        pb.newmark.beta = 0.25;
        pb.newmark.gamma = 0.5;
        pb.t_end = 2.0;
        const FeModeResult r = fe_mode_study(pb, 32, 512, 64);
        return check("steppers", "fe_single_mode", r.relative_error <= 1e-3 && r.mode_residual <= 1e-9,
                     fmt::format("relative error {:.2e}, mode residual {:.1e}", r.relative_error, r.mode_residual));
    }));
    out.push_back(guarded("steppers", "manufactured_heat_space", [] {
        ManufacturedHeatConfig cfg;
        cfg.t_end = 0.01;
        const auto r = manufactured_heat_space(cfg, {0.008, 0.004, 0.002}, 1e-4);
        return check("steppers", "manufactured_heat_space", r.order >= 1.8 && r.order <= 2.2,
                     fmt::format("L2 order {:.3f}", r.order));
    }));
    out.push_back(guarded("steppers", "manufactured_heat_time", [] {
        ManufacturedHeatConfig cfg;
        cfg.t_end = 1.0;
        const auto r = manufactured_heat_time(cfg, 0.008, {10, 20, 40, 80, 160});
        return check("steppers", "manufactured_heat_time", r.order >= 0.8 && r.order <= 1.2,
                     fmt::format("L2 order {:.3f}", r.order));
    }));
    return out;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"kernels", "fem", "steppers", "all"};
    return names;
}

std::vector<CheckResult> run_suite(std::string_view suite) {
    if (suite == "kernels") return kernels_suite();
    if (suite == "fem") return fem_suite();
    if (suite == "steppers") return steppers_suite();
    if (suite == "all") {
        auto out = kernels_suite();
        for (auto part : {fem_suite(), steppers_suite()}) out.insert(out.end(), part.begin(), part.end());
        return out;
    }
    throw ValidationError("suite", fmt::format("unknown suite '{}' (expected kernels, fem, steppers or all)", suite));
}

}  // namespace hifu

#include "hifu/scenario.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace hifu {

RunError::RunError(const std::string& what, std::size_t step) : Error(what), step_(step) {}

// -----------------------------------------------------------------------------
// Config
// -----------------------------------------------------------------------------

std::size_t ScenarioConfig::num_steps() const {
    if (steps) return *steps;
    if (!(dt > 0.0) || !(t_end > 0.0)) return 0;
    auto n = static_cast<std::size_t>(std::llround(t_end / dt));
    if (static_cast<double>(n) * dt < t_end * (1.0 - 1e-12)) ++n;
    return std::max<std::size_t>(n, 1);
}

bool ScenarioConfig::is_output_step(std::size_t step) const {
    if (step == 0) return false;
    if (output_every > 0 && step % output_every == 0) return true;
    return std::find(snapshot_steps.begin(), snapshot_steps.end(), step) != snapshot_steps.end();
}

namespace {

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw ValidationError(field, what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

constexpr std::pair<const char*, double MaterialModel::*> kMaterialConstants[] = {
    {"theta_ambient", &MaterialModel::theta_ambient}, {"rho_a", &MaterialModel::rho_a},
    {"rho_b", &MaterialModel::rho_b},                 {"c_a", &MaterialModel::c_a},
    {"c_b", &MaterialModel::c_b},                     {"kappa_a", &MaterialModel::kappa_a},
    {"beta_a", &MaterialModel::beta_a},               {"zeta_tilde", &MaterialModel::zeta_tilde},
};

}  // namespace

void ScenarioConfig::validate() const {
    if (dt == 0.0) throw ValidationError("time.dt", "is required");
    require(finite_positive(dt), "time.dt", "must be positive");
    if (steps) {
        require(*steps >= 1, "time.steps", "must be at least 1");
    } else {
        require(std::isfinite(t_end) && t_end >= dt, "time.t_end", "must be at least time.dt");
    }
    require(output_every >= 1, "time.output_every", "must be at least 1");
    if (mesh_file.empty())
        require(finite_positive(mesh_h) && mesh_h <= 0.02, "mesh.h", "must lie in (0, 0.02]");
    require(finite_positive(frequency), "excitation.frequency", "must be positive");
    require(std::isfinite(g0), "excitation.g0", "must be finite");
    if (damping == DampingModel::Fractional)
        require(alpha > 0.0 && alpha < 1.0, "acoustics.alpha", "must lie in (0, 1)");
    newmark.validate();
    require(finite_positive(linear_tol), "acoustics.linear_tol", "must be positive");
    require(finite_positive(d0), "transport.D0", "must be positive");
    require(std::isfinite(k_d) && k_d >= 0.0, "transport.k_D", "must be non-negative");
    require(std::isfinite(v0.x1) && std::isfinite(v0.x2), "transport.v0", "must be finite");
    require(std::isfinite(g_tilde), "transport.g_tilde", "must be finite");
    require(std::isfinite(outflow) && outflow >= 0.0, "transport.outflow", "must be non-negative");
    require(std::isfinite(c0), "transport.c0", "must be finite");
    require(axis_samples >= 2, "probes.axis_samples", "must be at least 2");
    require(peak_fraction > 0.0 && peak_fraction <= 1.0, "probes.peak_fraction", "must lie in (0, 1]");
    if (material == MaterialKind::Custom) {
        require(!q_coeffs.empty(), "material.q", "custom material needs q coefficients");
        require(!b_coeffs.empty(), "material.b", "custom material needs b coefficients");
    }
    if (perfusion) {
        const std::size_t n = perfusion_params.size();
        switch (*perfusion) {
            case PerfusionKind::Polynomial: require(n >= 1, "material.perfusion_params", "needs at least one coefficient"); break;
            case PerfusionKind::Power: require(n == 4, "material.perfusion_params", "power law needs a1..a4"); break;
            case PerfusionKind::Gaussian:
                require(n == 6, "material.perfusion_params", "gaussian law needs a1..a4, s0, s1");
                break;
        }
    }
    for (const auto& [key, value] : material_constants) {
        if (key == "theta_ambient") require(std::isfinite(value), "material.theta_ambient", "must be finite");
        else if (key == "beta_a" || key == "zeta_tilde")
            require(std::isfinite(value) && value >= 0.0, "material", "beta_a and zeta_tilde must be non-negative");
        else if (!finite_positive(value))
            throw ValidationError("material." + key, "must be positive");
    }
    if (paired_mode) require(*paired_mode != mode, "coupling.paired", "must differ from coupling.mode");
}

ScenarioConfig preset(std::string_view name) {
    ScenarioConfig c;
    c.name = std::string(name);
    c.mesh_h = 7.85e-4;
    c.g0 = 1e9;
    c.frequency = 1e5;
    c.dt = 6.67e-8;
    c.t_end = 1e-4;
    c.g_tilde = 0.01;
    c.k_d = 1e-6;
    c.d0 = 5.0;
    c.c0 = 0.0;
    c.output_every = 500;
    if (name == "example1") {
        c.snapshot_steps = {500, 750, 1000, 1500};
    } else if (name == "example2") {
        c.output_every = 250;
        c.paired_mode = CouplingMode::FrozenTemperature;
    } else if (name == "example3") {
        c.dt = 1e-6;
        c.t_end = 5e-4;
        c.g_tilde = 5e-3;
        c.v0 = {0.0, 10.0};
        c.outflow = 100.0;
        c.c0 = 1e-4;
        c.paired_mode = CouplingMode::NoUltrasound;
    } else {
        throw ValidationError("preset", fmt::format("unknown preset '{}' (expected example1, example2 or example3)", name));
    }
    return c;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"example1", "example2", "example3"};
    return names;
}

namespace {

double as_number(const ConfigValue& v, std::string_view key) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw ValidationError(std::string(key), fmt::format("expected a number, got a {}", type_name(v)));
}

std::size_t as_count(const ConfigValue& v, std::string_view key) {
    const double d = as_number(v, key);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1e15)
        throw ValidationError(std::string(key), "expected a non-negative integer");
    return static_cast<std::size_t>(d);
}

bool as_bool(const ConfigValue& v, std::string_view key) {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw ValidationError(std::string(key), fmt::format("expected true or false, got a {}", type_name(v)));
}

const std::string& as_string(const ConfigValue& v, std::string_view key) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw ValidationError(std::string(key), fmt::format("expected a string, got a {}", type_name(v)));
}

std::vector<double> as_array(const ConfigValue& v, std::string_view key) {
    if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
    if (const auto* d = std::get_if<double>(&v)) return {*d};
    throw ValidationError(std::string(key), fmt::format("expected an array of numbers, got a {}", type_name(v)));
}

using Setter = std::function<void(ScenarioConfig&, const ConfigValue&, std::string_view)>;

template <class T>
Setter number_field(T ScenarioConfig::* m) {
    return [m](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.*m = as_number(v, k); };
}

Setter material_constant(const char* name) {
    return [name](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
        c.material_constants[name] = as_number(v, k);
    };
}

PerfusionKind parse_perfusion(const std::string& s) {
    if (s == "polynomial") return PerfusionKind::Polynomial;
    if (s == "power") return PerfusionKind::Power;
    if (s == "gaussian") return PerfusionKind::Gaussian;
    throw ValidationError("material.perfusion", fmt::format("unknown perfusion law '{}'", s));
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = [] {
        std::map<std::string, Setter, std::less<>> t;
        t["name"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.name = as_string(v, k); };
        t["mesh.h"] = number_field(&ScenarioConfig::mesh_h);
        t["mesh.file"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.mesh_file = as_string(v, k); };

        t["material.model"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            const auto& s = as_string(v, k);
            if (s == "liver") c.material = MaterialKind::Liver;
            else if (s == "custom") c.material = MaterialKind::Custom;
            else throw ValidationError("material.model", fmt::format("unknown material '{}'", s));
        };
        t["material.q"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.q_coeffs = as_array(v, k); };
        t["material.b"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.b_coeffs = as_array(v, k); };
        t["material.perfusion"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            c.perfusion = parse_perfusion(as_string(v, k));
        };
        t["material.perfusion_params"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            c.perfusion_params = as_array(v, k);
        };
        for (const auto& [name, member] : kMaterialConstants) t[fmt::format("material.{}", name)] = material_constant(name);

        t["excitation.g0"] = number_field(&ScenarioConfig::g0);
        t["excitation.frequency"] = number_field(&ScenarioConfig::frequency);

        t["acoustics.alpha"] = number_field(&ScenarioConfig::alpha);
        t["acoustics.beta"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.newmark.beta = as_number(v, k); };
        t["acoustics.gamma"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.newmark.gamma = as_number(v, k); };
        t["acoustics.tol"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.newmark.tol = as_number(v, k); };
        t["acoustics.max_iters"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            c.newmark.max_iters = static_cast<int>(std::min<std::size_t>(as_count(v, k), 1000000));
        };
        t["acoustics.damping"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            c.damping = parse_damping_model(as_string(v, k));
        };
        t["acoustics.linear_tol"] = number_field(&ScenarioConfig::linear_tol);

        t["time.dt"] = number_field(&ScenarioConfig::dt);
        t["time.t_end"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            c.t_end = as_number(v, k);
            c.steps.reset();
        };
        t["time.steps"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.steps = as_count(v, k); };
        t["time.output_every"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            c.output_every = as_count(v, k);
        };
        t["time.snapshots"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            c.snapshot_steps.clear();
            for (double d : as_array(v, k)) c.snapshot_steps.push_back(as_count(d, k));
        };

        t["coupling.mode"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            c.mode = parse_coupling_mode(as_string(v, k));
        };
        t["coupling.paired"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            const auto& s = as_string(v, k);
            if (s == "none") c.paired_mode.reset();
            else c.paired_mode = parse_coupling_mode(s);
        };

        t["transport.v0"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            const auto a = as_array(v, k);
            if (a.size() != 2) throw ValidationError("transport.v0", "expected [v1, v2]");
            c.v0 = {a[0], a[1]};
        };
        t["transport.k_D"] = number_field(&ScenarioConfig::k_d);
        t["transport.D0"] = number_field(&ScenarioConfig::d0);
        t["transport.g_tilde"] = number_field(&ScenarioConfig::g_tilde);
        t["transport.outflow"] = number_field(&ScenarioConfig::outflow);
        t["transport.c0"] = number_field(&ScenarioConfig::c0);
        t["transport.convection"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            c.convection = parse_convection_form(as_string(v, k));
        };

        t["probes.axis_samples"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) {
            c.axis_samples = as_count(v, k);
        };
        t["probes.peak_fraction"] = number_field(&ScenarioConfig::peak_fraction);

        t["output.vtk"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.write_vtk = as_bool(v, k); };
        t["output.csv"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.write_csv = as_bool(v, k); };
        t["output.svg"] = [](ScenarioConfig& c, const ConfigValue& v, std::string_view k) { c.write_svg = as_bool(v, k); };
        return t;
    }();
    return table;
}

bool is_substep_key(std::string_view key) {
    if (key == "time.dt") return false;
    const bool dt_suffix = key.size() >= 3 && (key.ends_with(".dt") || key.ends_with("_dt"));
    return dt_suffix || key.find("substep") != std::string_view::npos || key.ends_with("time_step");
}

void apply_value(ScenarioConfig& c, std::string_view key, const ConfigValue& value, std::size_t line) {
    const auto& t = setters();
    const auto it = t.find(key);
    if (it == t.end()) {
        const std::string where = line ? fmt::format(" (line {})", line) : std::string();
        if (is_substep_key(key))
            throw ValidationError(std::string(key),
                                  "per-physics time steps are not supported; every field advances with time.dt" + where);
        throw ValidationError(std::string(key), "unknown key" + where);
    }
    it->second(c, value, key);
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
    const auto entries = parse_document(text);
    ScenarioConfig c;
    for (const auto& e : entries) {
        if (e.key == "preset") {
            c = preset(as_string(e.value, "preset"));
            break;
        }
    }
    for (const auto& e : entries)
        if (e.key != "preset") apply_value(c, e.key, e.value, e.line);
    c.validate();
    return c;
}

void apply_override(ScenarioConfig& config, std::string_view key, std::string_view value) {
    if (key == "preset") throw ValidationError("preset", "cannot be overridden; pass --preset instead");
    apply_value(config, key, parse_value(value, 0, true), 0);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out{"preset"};
    for (const auto& [k, s] : setters()) out.push_back(k);
    return out;
}

namespace {

std::string num(double v) { return fmt::format("{}", v); }

std::string array(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
    return out + "]";
}

std::string quote_string(std::string_view s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

std::string_view perfusion_name(PerfusionKind k) {
    switch (k) {
        case PerfusionKind::Polynomial: return "polynomial";
        case PerfusionKind::Power: return "power";
        case PerfusionKind::Gaussian: return "gaussian";
    }
    return "polynomial";
}

}  // namespace

std::string config_document(const ScenarioConfig& c) {
    std::string d = fmt::format("name = {}\n", quote_string(c.name));
    d += "\n[mesh]\n";
    d += fmt::format("h = {}\n", num(c.mesh_h));
    if (!c.mesh_file.empty()) d += fmt::format("file = {}\n", quote_string(c.mesh_file));

    d += "\n[material]\n";
    d += fmt::format("model = \"{}\"\n", c.material == MaterialKind::Liver ? "liver" : "custom");
    if (!c.q_coeffs.empty()) d += fmt::format("q = {}\n", array(c.q_coeffs));
    if (!c.b_coeffs.empty()) d += fmt::format("b = {}\n", array(c.b_coeffs));
    if (c.perfusion) d += fmt::format("perfusion = \"{}\"\n", perfusion_name(*c.perfusion));
    if (!c.perfusion_params.empty()) d += fmt::format("perfusion_params = {}\n", array(c.perfusion_params));
    for (const auto& [k, v] : c.material_constants) d += fmt::format("{} = {}\n", k, num(v));

    d += "\n[excitation]\n";
    d += fmt::format("g0 = {}\nfrequency = {}\n", num(c.g0), num(c.frequency));

    d += "\n[acoustics]\n";
    d += fmt::format("alpha = {}\nbeta = {}\ngamma = {}\ntol = {}\nmax_iters = {}\ndamping = \"{}\"\nlinear_tol = {}\n",
                     num(c.alpha), num(c.newmark.beta), num(c.newmark.gamma), num(c.newmark.tol), c.newmark.max_iters,
                     to_string(c.damping), num(c.linear_tol));

    d += "\n[time]\n";
    d += fmt::format("dt = {}\n", num(c.dt));
    if (c.steps) d += fmt::format("steps = {}\n", *c.steps);
    else d += fmt::format("t_end = {}\n", num(c.t_end));
    d += fmt::format("output_every = {}\n", c.output_every);
    std::vector<double> snaps(c.snapshot_steps.begin(), c.snapshot_steps.end());
    d += fmt::format("snapshots = {}\n", array(snaps));

    d += "\n[coupling]\n";
    d += fmt::format("mode = \"{}\"\npaired = \"{}\"\n", to_string(c.mode),
                     c.paired_mode ? to_string(*c.paired_mode) : std::string_view("none"));

    d += "\n[transport]\n";
    d += fmt::format("v0 = {}\nk_D = {}\nD0 = {}\ng_tilde = {}\noutflow = {}\nc0 = {}\nconvection = \"{}\"\n",
                     array({c.v0.x1, c.v0.x2}), num(c.k_d), num(c.d0), num(c.g_tilde), num(c.outflow), num(c.c0),
                     to_string(c.convection));

    d += "\n[probes]\n";
    d += fmt::format("axis_samples = {}\npeak_fraction = {}\n", c.axis_samples, num(c.peak_fraction));

    d += "\n[output]\n";
    d += fmt::format("vtk = {}\ncsv = {}\nsvg = {}\n", c.write_vtk, c.write_csv, c.write_svg);
    return d;
}

std::shared_ptr<const Mesh> build_mesh(const ScenarioConfig& config) {
    if (!config.mesh_file.empty()) return std::make_shared<const Mesh>(load_mesh(config.mesh_file));
    return std::make_shared<const Mesh>(build_domain_mesh(config.mesh_h));
}

MaterialModel build_material(const ScenarioConfig& config) {
    MaterialModel base = liver_model(config.frequency);
    for (const auto& [name, member] : kMaterialConstants) {
        const auto it = config.material_constants.find(name);
        if (it != config.material_constants.end()) base.*member = it->second;
    }
    if (config.perfusion) {
        const auto& a = config.perfusion_params;
        switch (*config.perfusion) {
            case PerfusionKind::Polynomial: base.omega_b = polynomial_omega_b(a); break;
            case PerfusionKind::Power: base.omega_b = power_omega_b(a.at(0), a.at(1), a.at(2), a.at(3)); break;
            case PerfusionKind::Gaussian:
                base.omega_b = gaussian_omega_b(a.at(0), a.at(1), a.at(2), a.at(3), a.at(4), a.at(5));
                break;
        }
    }
    if (config.material == MaterialKind::Liver) return base;
    CustomMaterial spec{config.q_coeffs, config.b_coeffs, base.omega_b, base};
    return custom_model(spec);
}

std::optional<ScenarioConfig> paired_config(const ScenarioConfig& config) {
    if (!config.paired_mode) return std::nullopt;
    ScenarioConfig p = config;
    p.mode = *config.paired_mode;
    p.paired_mode.reset();
    return p;
}

// -----------------------------------------------------------------------------
// Simulation
// -----------------------------------------------------------------------------

namespace {

ScenarioConfig validated(ScenarioConfig c) {
    c.validate();
    return c;
}

}  // namespace

Simulation::Simulation(ScenarioConfig config, std::shared_ptr<const Mesh> mesh)
    : config_(validated(std::move(config))),
      mesh_(mesh ? std::move(mesh) : build_mesh(config_)),
      space_(std::make_shared<const FeSpace>(mesh_)),
      material_(build_material(config_)),
      axis_(*mesh_, config_.axis_samples, DomainGeometry::bottom(), DomainGeometry::top) {
    const std::size_t n = mesh_->num_vertices();
    const bool wave = config_.mode != CouplingMode::NoUltrasound;
    if (wave && config_.g0 != 0.0 && !mesh_->has_tag(BoundaryTag::GammaB))
        throw ValidationError("mesh", "excitation needs a Gamma_b boundary");
    if (config_.g_tilde != 0.0 && !mesh_->has_tag(BoundaryTag::GammaB))
        throw ValidationError("transport.g_tilde", "inflow needs a Gamma_b boundary");
    if (config_.outflow > 0.0 && !mesh_->has_tag(BoundaryTag::GammaA))
        throw ValidationError("transport.outflow", "outflow needs a Gamma_a boundary");

    state_.acoustic = AcousticState::zeros(n);
    state_.thermal = ThermalState::zeros(n);
    state_.conc = ConcentrationState::uniform(n, config_.c0);
    if (wave) {
        WesterveltOptions opts = WesterveltOptions::for_mode(config_.mode);
        opts.newmark = config_.newmark;
        opts.alpha = config_.alpha;
        opts.damping = config_.damping;
        opts.linear_tol = config_.linear_tol;
        wave_.emplace(space_, material_, Excitation::from_frequency(config_.g0, config_.frequency), config_.dt, opts);
        wave_->initialize(state_.acoustic, state_.thermal.theta);
        heat_.emplace(space_, material_, config_.dt);
    }
    VelocityModel vel;
    vel.v0 = config_.v0;
    vel.k_d = config_.k_d;
    vel.d0 = config_.d0;
    vel.form = config_.convection;
    transport_ = std::make_unique<TransportStepper>(
        space_, vel, TransportBoundary::inflow_outflow(config_.g_tilde, config_.outflow), config_.dt);

    record_.mass_whole = mass_integral(state_.conc, *mesh_, MassRegion::Whole);
    record_.mass_focal = mass_integral(state_.conc, *mesh_, MassRegion::Focal);
}

const StepRecord& Simulation::step() {
    const std::size_t n = state_.step;
    const double dt = config_.dt;
    StepRecord r;
    r.step = n + 1;
    r.time = static_cast<double>(n + 1) * dt;
    TransportStats ts;
    if (wave_) {
        if (state_.acoustic.step != n || state_.thermal.step != n)
            throw ConsistencyError(fmt::format("step counters diverged before step {}", n + 1));
        const WesterveltStats ws = wave_->step(state_.acoustic, state_.thermal.theta);
        r.fixed_point_iterations = ws.iterations;
        r.fixed_point_change = ws.last_change;
        r.linear_iterations = ws.linear_iterations;
        // The heat solve consumes p_t^{n+1}: one step ahead of the theta the wave used.
        if (state_.acoustic.step != state_.thermal.step + 1)
            throw ConsistencyError(fmt::format("heat step {} does not follow wave step {}", state_.thermal.step + 1,
                                               state_.acoustic.step));
        const ThermalStats hs = heat_->step(state_.thermal, state_.acoustic.p_t);
        r.linear_iterations += hs.linear_iterations;
        const ElementField grad = space_->gradient(state_.acoustic.p);
        ts = transport_->step(state_.conc, grad, state_.acoustic.p, state_.thermal.theta);
    } else {
        state_.acoustic.step = state_.thermal.step = n + 1;
        state_.acoustic.time = state_.thermal.time = r.time;
        ts = transport_->step(state_.conc, {});
    }
    state_.step = n + 1;
    state_.time = r.time;

    r.max_pressure = state_.acoustic.p.maxCoeff();
    r.max_theta = state_.thermal.theta.maxCoeff();
    r.mass_whole = mass_integral(state_.conc, *mesh_, MassRegion::Whole);
    r.mass_focal = mass_integral(state_.conc, *mesh_, MassRegion::Focal);
    r.budget_error = ts.budget.relative_error();
    r.max_peclet = ts.max_peclet;
    record_ = r;
    return record_;
}

std::vector<NamedField> Simulation::fields() const {
    return {{"p", state_.acoustic.p},
            {"p_t", state_.acoustic.p_t},
            {"theta", state_.thermal.theta},
            {"c", state_.conc.c},
            {"absorbed_energy", absorbed_energy(material_, state_.acoustic.p_t, state_.thermal.theta)}};
}

RunReport make_report(const Simulation& sim, const std::vector<StepRecord>& history, double wall_seconds) {
    const auto& cfg = sim.config();
    const auto& st = sim.state();
    RunReport r;
    r.name = cfg.name;
    r.mode = cfg.mode;
    r.steps = st.step;
    r.vertices = sim.mesh().num_vertices();
    r.triangles = sim.mesh().num_triangles();
    r.dt = cfg.dt;
    r.wall_seconds = wall_seconds;
    for (const auto& h : history) {
        r.total_fixed_point_iterations += h.fixed_point_iterations;
        r.max_fixed_point_iterations = std::max(r.max_fixed_point_iterations, h.fixed_point_iterations);
        r.max_budget_error = std::max(r.max_budget_error, h.budget_error);
    }
    r.final_time = st.time;
    r.max_pressure = st.acoustic.p.maxCoeff();
    const auto slice = sim.axis(st.acoustic.p);
    r.max_axis_pressure = slice_max(slice).value_or(0.0);
    r.leading_peak = leading_peak(slice, cfg.peak_fraction);
    r.thermal = thermal_dose_probe(st.thermal);
    r.thermal_location = sim.mesh().vertices()[r.thermal.node];
    r.mass_whole = mass_integral(st.conc, sim.mesh(), MassRegion::Whole);
    r.mass_focal = mass_integral(st.conc, sim.mesh(), MassRegion::Focal);
    r.history = history;
    return r;
}

RunReport run(const ScenarioConfig& config, const RunSinks& sinks, std::shared_ptr<const Mesh> mesh) {
    const auto t0 = std::chrono::steady_clock::now();
    Simulation sim(config, std::move(mesh));
    const std::size_t steps = sim.config().num_steps();
    spdlog::info("run '{}' ({}): {} vertices, {} triangles, {} steps of {:.4g} s", sim.config().name,
                 to_string(sim.config().mode), sim.mesh().num_vertices(), sim.mesh().num_triangles(), steps,
                 sim.config().dt);
    std::vector<StepRecord> history;
    history.reserve(steps);
    for (std::size_t s = 1; s <= steps; ++s) {
        try {
            history.push_back(sim.step());
        } catch (const Error& e) {
            if (sinks.on_failure) sinks.on_failure(sim, e);
            throw RunError(fmt::format("step {}: {}", s, e.what()), s);
        }
        if (sinks.on_output && sim.config().is_output_step(s)) sinks.on_output(sim);
    }
    if (sinks.on_finish) sinks.on_finish(sim);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return make_report(sim, history, wall);
}

}  // namespace hifu

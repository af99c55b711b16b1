#pragma once

// Scenario configuration, the three experiment presets and the coupled
// wave -> heat -> transport time loop.

#include "hifu/acoustics.hpp"
#include "hifu/bioheat.hpp"
#include "hifu/config.hpp"
#include "hifu/error.hpp"
#include "hifu/output.hpp"
#include "hifu/transport.hpp"

#include <cstddef>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hifu {

enum class MaterialKind { Liver, Custom };
enum class PerfusionKind { Polynomial, Power, Gaussian };

struct ScenarioConfig {
    std::string name = "custom";

    double mesh_h = 0.006;
    std::string mesh_file;  // overrides mesh_h when set

    MaterialKind material = MaterialKind::Liver;
    std::vector<double> q_coeffs;  // custom material, increasing degree
    std::vector<double> b_coeffs;
    std::optional<PerfusionKind> perfusion;  // unset keeps the material's own law
    std::vector<double> perfusion_params;
    std::map<std::string, double> material_constants;  // rho_a, c_a, ... overrides

    double g0 = 1e9;
    double frequency = 1e5;

    double alpha = 0.8;
    NewmarkParams newmark;
    DampingModel damping = DampingModel::Fractional;
    double linear_tol = 1e-13;

    double dt = 0.0;  // required; 0 means unset
    double t_end = 0.0;
    std::optional<std::size_t> steps;  // wins over t_end when set
    std::size_t output_every = 500;
    std::vector<std::size_t> snapshot_steps;

    CouplingMode mode = CouplingMode::Full;
    std::optional<CouplingMode> paired_mode;

    Vec2 v0{};
    double k_d = 1e-6;
    double d0 = 5.0;
    double g_tilde = 0.01;
    double outflow = 0.0;
    double c0 = 0.0;
    ConvectionForm convection = ConvectionForm::Reversed;

    std::size_t axis_samples = 1401;
    double peak_fraction = 0.5;

    bool write_vtk = true;
    bool write_csv = true;
    bool write_svg = true;

    /// Step count: `steps` when set, else t_end / dt rounded up to a whole step.
    [[nodiscard]] std::size_t num_steps() const;
    [[nodiscard]] bool is_output_step(std::size_t step) const;
    /// Throws ValidationError naming the first offending field.
    void validate() const;
};

/// example1, example2 or example3; ValidationError otherwise.
[[nodiscard]] ScenarioConfig preset(std::string_view name);
[[nodiscard]] const std::vector<std::string>& preset_names();

/// Parses a configuration document. A top-level `preset = "name"` seeds the
/// defaults; later keys override. Unknown keys and per-physics time steps are
/// rejected with ValidationError naming the key.
[[nodiscard]] ScenarioConfig parse_config(std::string_view text);

/// Applies one `key = value` assignment (value in configuration syntax, or a
/// bare word). Does not validate the whole config.
void apply_override(ScenarioConfig& config, std::string_view key, std::string_view value);

/// The full config as a document that parse_config reads back to an equal
/// config. Numbers use the shortest round-trip form.
[[nodiscard]] std::string config_document(const ScenarioConfig& config);

/// Every key accepted by parse_config and apply_override.
[[nodiscard]] std::vector<std::string> config_keys();

[[nodiscard]] std::shared_ptr<const Mesh> build_mesh(const ScenarioConfig& config);
[[nodiscard]] MaterialModel build_material(const ScenarioConfig& config);

/// Wave, heat and concentration states on one mesh and one clock.
struct CoupledState {
    AcousticState acoustic;
    ThermalState thermal;
    ConcentrationState conc;
    std::size_t step = 0;
    double time = 0.0;
};

struct StepRecord {
    std::size_t step = 0;
    double time = 0.0;
    int fixed_point_iterations = 0;
    double fixed_point_change = 0.0;
    int linear_iterations = 0;
    double max_pressure = 0.0;
    double max_theta = 0.0;
    double mass_whole = 0.0;
    double mass_focal = 0.0;
    double budget_error = 0.0;
    double max_peclet = 0.0;
};

/// One coupled run, advanced a step at a time.
class Simulation {
public:
    Simulation(ScenarioConfig config, std::shared_ptr<const Mesh> mesh);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Westervelt with theta^n, Pennes with p_t^{n+1}, transport with p^{n+1}.
    const StepRecord& step();

    [[nodiscard]] const CoupledState& state() const noexcept { return state_; }
    [[nodiscard]] const ScenarioConfig& config() const noexcept { return config_; }
    [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
    [[nodiscard]] const FeSpace& space() const noexcept { return *space_; }
    [[nodiscard]] const MaterialModel& material() const noexcept { return material_; }
    [[nodiscard]] const StepRecord& last_record() const noexcept { return record_; }
    [[nodiscard]] std::vector<SliceSample> axis(const NodalField& field) const { return axis_.sample(field); }
    /// p, p_t, theta, c, absorbed energy.
    [[nodiscard]] std::vector<NamedField> fields() const;

private:
    ScenarioConfig config_;
    std::shared_ptr<const Mesh> mesh_;
    std::shared_ptr<const FeSpace> space_;
    MaterialModel material_;
    std::optional<WesterveltStepper> wave_;
    std::optional<PennesStepper> heat_;
    std::unique_ptr<TransportStepper> transport_;
    AxisSampler axis_;
    CoupledState state_;
    StepRecord record_;
};

struct RunReport {
    std::string name;
    CouplingMode mode = CouplingMode::Full;
    std::size_t steps = 0;
    std::size_t vertices = 0;
    std::size_t triangles = 0;
    double dt = 0.0;
    double wall_seconds = 0.0;
    long long total_fixed_point_iterations = 0;
    int max_fixed_point_iterations = 0;
    double max_budget_error = 0.0;

    double final_time = 0.0;
    double max_pressure = 0.0;
    double max_axis_pressure = 0.0;
    std::optional<PeakEstimate> leading_peak;
    ThermalProbe thermal;
    Point2 thermal_location{};
    double mass_whole = 0.0;
    double mass_focal = 0.0;

    std::vector<StepRecord> history;
};

/// Observers of a run. `on_output` fires after every output step,
/// `on_finish` once after the last step, `on_failure` before a stepper error
/// propagates.
struct RunSinks {
    std::function<void(const Simulation&)> on_output;
    std::function<void(const Simulation&)> on_finish;
    std::function<void(const Simulation&, const std::exception&)> on_failure;
};

/// A stepper failure during run(); `step()` is the step being attempted.
class RunError : public Error {
public:
    RunError(const std::string& what, std::size_t step);
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Runs the configured number of steps. A null mesh is built from the
/// config. Stepper errors are reported to the sinks and rethrown as RunError.
[[nodiscard]] RunReport run(const ScenarioConfig& config, const RunSinks& sinks = {},
                            std::shared_ptr<const Mesh> mesh = nullptr);

[[nodiscard]] RunReport make_report(const Simulation& sim, const std::vector<StepRecord>& history,
                                    double wall_seconds);

/// The config with its mode replaced by the paired mode; nothing if unpaired.
[[nodiscard]] std::optional<ScenarioConfig> paired_config(const ScenarioConfig& config);

}  // namespace hifu

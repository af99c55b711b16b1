#include "hifu_cli/cli.hpp"

#include "hifu/error.hpp"
#include "hifu/kernels.hpp"
#include "hifu/mesh.hpp"
#include "hifu/output.hpp"
#include "hifu/parallel.hpp"
#include "hifu/scenario.hpp"
#include "hifu/verify.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hifu::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Raised for bad flags or bad configuration contents (exit 1).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// -----------------------------------------------------------------------------
// run
// -----------------------------------------------------------------------------

struct RunOptions {
    std::string config_path;
    std::string preset_name;
    std::vector<std::string> overrides;
    std::string out_dir = "hifu-out";
    bool no_paired = false;
};

ScenarioConfig load_config(const RunOptions& o) {
    ScenarioConfig c;
    try {
        if (!o.config_path.empty()) {
            std::ifstream in(o.config_path);
            if (!in) throw UsageError(fmt::format("cannot read config file '{}'", o.config_path));
            std::ostringstream text;
            text << in.rdbuf();
            c = parse_config(text.str());
        } else {
            c = preset(o.preset_name);
        }
        for (const auto& kv : o.overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) throw UsageError(fmt::format("--set expects key=value, got '{}'", kv));
            apply_override(c, kv.substr(0, eq), kv.substr(eq + 1));
        }
        c.validate();
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
    return c;
}

ordered_json peak_json(const std::optional<PeakEstimate>& p) {
    if (!p) return nullptr;
    return ordered_json{{"x2", p->x2}, {"value", p->value}};
}

ordered_json report_json(const RunReport& r, const Mesh& mesh) {
    ordered_json j;
    j["name"] = r.name;
    j["mode"] = std::string(to_string(r.mode));
    j["steps"] = r.steps;
    j["dt"] = r.dt;
    j["final_time"] = r.final_time;
    j["wall_seconds"] = r.wall_seconds;
    j["mesh"] = {{"vertices", r.vertices}, {"triangles", r.triangles}, {"min_angle_degrees", mesh.min_angle_degrees()}};
    j["fixed_point"] = {{"total_iterations", r.total_fixed_point_iterations},
                        {"max_iterations", r.max_fixed_point_iterations}};
    j["max_budget_error"] = r.max_budget_error;
    j["pressure"] = {{"max", r.max_pressure}, {"max_axis", r.max_axis_pressure}, {"leading_peak", peak_json(r.leading_peak)}};
    j["temperature"] = {{"max_theta", r.thermal.max_theta},
                        {"node", r.thermal.node},
                        {"x1", r.thermal_location.x1},
                        {"x2", r.thermal_location.x2}};
    j["mass"] = {{"whole", r.mass_whole}, {"focal", r.mass_focal}};
    return j;
}

double relative_change(double a, double b) { return b != 0.0 ? (a - b) / std::abs(b) : 0.0; }

ordered_json comparison_json(const RunReport& primary, const RunReport& paired) {
    ordered_json j;
    j["primary_mode"] = std::string(to_string(primary.mode));
    j["paired_mode"] = std::string(to_string(paired.mode));
    j["max_axis_pressure_change"] = relative_change(primary.max_axis_pressure, paired.max_axis_pressure);
    if (primary.leading_peak && paired.leading_peak)
        j["leading_peak_shift"] = primary.leading_peak->x2 - paired.leading_peak->x2;
    else
        j["leading_peak_shift"] = nullptr;
    j["focal_mass_change"] = relative_change(primary.mass_focal, paired.mass_focal);
    j["whole_mass_change"] = relative_change(primary.mass_whole, paired.mass_whole);
    j["max_theta_change"] = primary.thermal.max_theta - paired.thermal.max_theta;
    return j;
}

void write_axis(const Simulation& sim, const fs::path& path) {
    const auto& st = sim.state();
    write_text_file(path, slice_csv_document({{"p", sim.axis(st.acoustic.p)},
                                              {"theta", sim.axis(st.thermal.theta)},
                                              {"c", sim.axis(st.conc.c)}}));
}

std::vector<ProbeSeries> probe_series(const RunReport& r) {
    std::vector<ProbeSeries> s{{"max_pressure", {}, {}}, {"max_theta", {}, {}},  {"mass_whole", {}, {}},
                               {"mass_focal", {}, {}},   {"budget_error", {}, {}}, {"fixed_point_iterations", {}, {}}};
    for (const auto& h : r.history) {
        s[0].push(h.time, h.max_pressure);
        s[1].push(h.time, h.max_theta);
        s[2].push(h.time, h.mass_whole);
        s[3].push(h.time, h.mass_focal);
        s[4].push(h.time, h.budget_error);
        s[5].push(h.time, h.fixed_point_iterations);
    }
    return s;
}

RunReport run_into(const ScenarioConfig& config, const std::shared_ptr<const Mesh>& mesh, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError(fmt::format("cannot create output directory '{}'", dir.string()));
    write_text_file(dir / "config.toml", config_document(config));

    RunSinks sinks;
    sinks.on_output = [&](const Simulation& sim) {
        const std::size_t step = sim.state().step;
        if (config.write_vtk) write_vtk(sim.mesh(), sim.fields(), dir / fmt::format("snapshot_{:06d}.vtk", step));
        if (config.write_csv) write_axis(sim, dir / fmt::format("axis_{:06d}.csv", step));
        spdlog::info("[{}] step {} t = {:.6g} s", to_string(sim.config().mode), step, sim.state().time);
    };
    sinks.on_finish = [&](const Simulation& sim) {
        write_vtk(sim.mesh(), sim.fields(), dir / "final.vtk");
        if (config.write_csv) write_axis(sim, dir / "axis_final.csv");
    };
    sinks.on_failure = [&](const Simulation& sim, const std::exception& e) {
        const std::size_t step = sim.state().step + 1;
        try {
            write_vtk(sim.mesh(), sim.fields(), dir / fmt::format("failure_step_{:06d}.vtk", step));
            ordered_json j{{"step", step}, {"time", sim.state().time}, {"error", e.what()}};
            write_text_file(dir / "failure.json", j.dump(2) + "\n");
        } catch (const std::exception& inner) {
            spdlog::error("could not write the failure snapshot: {}", inner.what());
        }
    };
    RunReport report = run(config, sinks, mesh);

    const auto series = probe_series(report);
    if (config.write_csv && !series.front().t.empty()) write_csv(series, dir / "probes.csv");
    if (config.write_svg && !series.front().t.empty()) {
        write_svg_lineplot({series[2], series[3]}, dir / "mass.svg", {.title = "Drug mass", .y_label = "m"});
        write_svg_lineplot({series[0]}, dir / "pressure.svg", {.title = "Maximum pressure", .y_label = "p [Pa]"});
    }
    return report;
}

int cmd_run(const RunOptions& o, std::ostream& out) {
    if (o.config_path.empty() == o.preset_name.empty())
        throw UsageError("run: exactly one of --config and --preset is required");
    const ScenarioConfig config = load_config(o);
    const fs::path dir(o.out_dir);
    const auto mesh = build_mesh(config);

    const RunReport primary = run_into(config, mesh, dir);
    ordered_json j = report_json(primary, *mesh);
    if (const auto paired = paired_config(config); paired && !o.no_paired) {
        const fs::path sub = dir / fmt::format("paired_{}", to_string(paired->mode));
        const RunReport second = run_into(*paired, mesh, sub);
        j["paired"] = report_json(second, *mesh);
        j["comparison"] = comparison_json(primary, second);
    }
    write_text_file(dir / "report.json", j.dump(2) + "\n");
    fmt::print(out, "{}: {} steps, max axis pressure {:.6g} Pa, max theta {:.6g} K, focal mass {:.6g}\n", config.name,
               primary.steps, primary.max_axis_pressure, primary.thermal.max_theta, primary.mass_focal);
    fmt::print(out, "wrote {}\n", (dir / "report.json").string());
    return kSuccess;
}

// -----------------------------------------------------------------------------
// preset, verify, kernel, mesh
// -----------------------------------------------------------------------------

int cmd_preset(const std::string& name, std::ostream& out) {
    if (name.empty()) {
        for (const auto& n : preset_names()) fmt::print(out, "{}\n", n);
        return kSuccess;
    }
    try {
        fmt::print(out, "{}", config_document(preset(name)));
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    return kSuccess;
}

int cmd_verify(const std::string& suite, double perturb, const std::string& csv_path, std::ostream& out) {
    if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
        throw UsageError(fmt::format("verify: unknown suite '{}'", suite));
    testing::set_zeta0_perturbation(perturb);
    const auto results = run_suite(suite);
    testing::set_zeta0_perturbation(0.0);

    std::size_t w_suite = 5, w_name = 5;
    for (const auto& r : results) {
        w_suite = std::max(w_suite, r.suite.size());
        w_name = std::max(w_name, r.name.size());
    }
    fmt::print(out, "{:<{}}  {:<{}}  {:<6}  {}\n", "suite", w_suite, "check", w_name, "result", "detail");
    std::size_t failed = 0;
    std::string csv = "suite,check,result,detail\r\n";
    for (const auto& r : results) {
        const char* verdict = r.passed ? "PASS" : "FAIL";
        failed += r.passed ? 0 : 1;
        fmt::print(out, "{:<{}}  {:<{}}  {:<6}  {}\n", r.suite, w_suite, r.name, w_name, verdict, r.detail);
        std::string detail = r.detail;
        for (std::size_t p = 0; (p = detail.find('"', p)) != std::string::npos; p += 2) detail.insert(p, "\"");
        csv += fmt::format("{},{},{},\"{}\"\r\n", r.suite, r.name, verdict, detail);
    }
    fmt::print(out, "{} of {} checks passed\n", results.size() - failed, results.size());
    if (!csv_path.empty()) write_text_file(csv_path, csv);
    return failed ? kVerifyFailed : kSuccess;
}

struct KernelOptions {
    std::string kind = "abel";
    double alpha = 0.5;
    double tau = 1.0;
    std::optional<std::size_t> weights;
    std::vector<double> at;
    std::vector<double> ml;
};

int cmd_kernel(const KernelOptions& o, std::ostream& out) {
    const int modes = (o.weights ? 1 : 0) + (o.at.empty() ? 0 : 1) + (o.ml.empty() ? 0 : 1);
    if (modes != 1) throw UsageError("kernel: give exactly one of --weights, --at and --ml");
    try {
        if (!o.ml.empty()) {
            fmt::print(out, "a,b,z,E\n{:.17g},{:.17g},{:.17g},{:.17g}\n", o.ml[0], o.ml[1], o.ml[2],
                       mittag_leffler(o.ml[0], o.ml[1], o.ml[2]));
            return kSuccess;
        }
        const MemoryKernel k = o.kind == "abel" ? MemoryKernel::abel(o.alpha) : MemoryKernel::exponential(o.tau);
        if (o.weights) {
            if (o.kind != "abel") throw UsageError("kernel: --weights needs --kind abel");
            const L1Weights w = l1_weights(o.alpha, *o.weights);
            fmt::print(out, "j,zeta\n");
            for (std::size_t j = 0; j < w.size(); ++j) fmt::print(out, "{},{:.17g}\n", j, w[j]);
            return kSuccess;
        }
        fmt::print(out, "t,kernel,integral\n");
        for (double t : o.at) fmt::print(out, "{:.17g},{:.17g},{:.17g}\n", t, kernel_eval(k, t), kernel_integral(k, t));
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    return kSuccess;
}

struct MeshOptions {
    double h = 0.0;
    std::string input;
    std::string output;
};

int cmd_mesh(const MeshOptions& o, std::ostream& out) {
    if ((o.h > 0.0) == !o.input.empty()) throw UsageError("mesh: give exactly one of --size and --input");
    Mesh mesh;
    try {
        mesh = o.input.empty() ? build_domain_mesh(o.h) : load_mesh(o.input);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    fmt::print(out, "vertices: {}\ntriangles: {}\nedges: {}\narea: {:.10g}\nmin_angle_degrees: {:.4f}\n",
               mesh.num_vertices(), mesh.num_triangles(), mesh.num_edges(), mesh.total_area(), mesh.min_angle_degrees());
    for (BoundaryTag tag : {BoundaryTag::GammaA, BoundaryTag::GammaB, BoundaryTag::Wall})
        fmt::print(out, "length_{}: {:.10g}\n", to_string(tag), mesh.boundary_length(tag));
    if (!o.output.empty()) {
        const fs::path path(o.output);
        if (path.extension() == ".vtk") {
            NodalField tag = NodalField::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
            for (const auto& e : mesh.boundary_edges())
                for (std::size_t v : e.v) tag[static_cast<Eigen::Index>(v)] = 1.0 + static_cast<double>(e.tag);
            write_vtk(mesh, {{"boundary_tag", tag}}, path);
        } else {
            save_mesh(mesh, path);
        }
    }
    return kSuccess;
}

void configure_logging(bool quiet, bool verbose) {
    static const auto logger = [] {
        auto l = spdlog::stderr_color_mt("hifu");
        l->set_pattern("[%l] %v");
        return l;
    }();
    spdlog::set_default_logger(logger);
    spdlog::set_level(quiet ? spdlog::level::warn : verbose ? spdlog::level::debug : spdlog::level::info);
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Focused-ultrasound wave, heat and drug-transport simulator", "hifu"};
    app.require_subcommand(1);
    unsigned threads = 0;
    bool quiet = false, verbose = false;
    app.add_option("--threads", threads, "Worker threads (default: HIFU_THREADS or all cores)");
    app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");
    app.add_flag("-v,--verbose", verbose, "Log debug messages");

    RunOptions run_opts;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write fields, probes and a report");
    auto* cfg_opt = run_cmd->add_option("--config", run_opts.config_path, "Scenario configuration file");
    auto* pre_opt = run_cmd->add_option("--preset", run_opts.preset_name, "Named preset: example1, example2, example3");
    cfg_opt->excludes(pre_opt);
    run_cmd->add_option("--set", run_opts.overrides, "Override one key, e.g. --set mesh.h=0.004 (repeatable)");
    run_cmd->add_option("--out", run_opts.out_dir, "Output directory")->capture_default_str();
    run_cmd->add_flag("--no-paired", run_opts.no_paired, "Skip the paired comparison run");

    std::string preset_name;
    auto* preset_cmd = app.add_subcommand("preset", "List presets, or print one as a configuration document");
    preset_cmd->add_option("name", preset_name, "Preset to print");

    std::string suite = "all";
    double perturb = 0.0;
    std::string verify_csv;
    auto* verify_cmd = app.add_subcommand("verify", "Run the verification suites");
    verify_cmd->add_option("--suite", suite, "kernels, fem, steppers or all")->capture_default_str();
    verify_cmd->add_option("--csv", verify_csv, "Also write the results as CSV");
    verify_cmd->add_option("--perturb-zeta0", perturb, "Test hook: add DELTA to every L1 weight zeta_0");

    KernelOptions kopts;
    auto* kernel_cmd = app.add_subcommand("kernel", "Print memory-kernel values, L1 weights or Mittag-Leffler values");
    kernel_cmd->add_option("--kind", kopts.kind, "Kernel family")
        ->check(CLI::IsMember({"abel", "exponential"}))
        ->capture_default_str();
    kernel_cmd->add_option("--alpha", kopts.alpha, "Abel order in (0, 1)")->capture_default_str();
    kernel_cmd->add_option("--tau", kopts.tau, "Exponential relaxation time")->capture_default_str();
    kernel_cmd->add_option("--weights", kopts.weights, "Print zeta_0..zeta_{N+1} for step N");
    kernel_cmd->add_option("--at", kopts.at, "Print kernel value and integral at these times");
    kernel_cmd->add_option("--ml", kopts.ml, "Evaluate E_{a,b}(z)")->expected(3);

    MeshOptions mopts;
    auto* mesh_cmd = app.add_subcommand("mesh", "Build or load a mesh and print its statistics");
    mesh_cmd->add_option("--size", mopts.h, "Target edge length in metres");
    mesh_cmd->add_option("--input", mopts.input, "Read a mesh file instead of building one");
    mesh_cmd->add_option("--out", mopts.output, "Write the mesh (.vtk for VTK, anything else for the native format)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }
    configure_logging(quiet, verbose);
    if (threads > 0) set_worker_count(threads);

    try {
        if (run_cmd->parsed()) return cmd_run(run_opts, out);
        if (preset_cmd->parsed()) return cmd_preset(preset_name, out);
        if (verify_cmd->parsed()) return cmd_verify(suite, perturb, verify_csv, out);
        if (kernel_cmd->parsed()) return cmd_kernel(kopts, out);
        if (mesh_cmd->parsed()) return cmd_mesh(mopts, out);
    } catch (const UsageError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kRuntime;
    }
    return kUsage;
}

}  // namespace hifu::cli

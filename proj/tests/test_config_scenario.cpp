#include "hifu/config.hpp"
#include "hifu/error.hpp"
#include "hifu/scenario.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <string>

using namespace hifu;

namespace {

ScenarioConfig small(const char* name, std::size_t steps) {
    auto c = preset(name);
    c.mesh_h = 0.01;
    c.steps = steps;
    return c;
}

}  // namespace

TEST(ConfigReader, ValuesAndSections) {
    const auto e = parse_document(
        "# comment\n"
        "name = \"x\"  # trailing\n"
        "[time]\n"
        "dt = 1e-6\n"
        "steps = 10\n"
        "[output]\n"
        "vtk = false\n"
        "[transport]\n"
        "v0 = [0, 10.5]\n");
    ASSERT_EQ(e.size(), 5u);
    EXPECT_EQ(e[0].key, "name");
    EXPECT_EQ(std::get<std::string>(e[0].value), "x");
    EXPECT_EQ(e[1].key, "time.dt");
    EXPECT_EQ(std::get<double>(e[1].value), 1e-6);
    EXPECT_EQ(e[1].line, 4u);
    EXPECT_EQ(std::get<bool>(e[3].value), false);
    EXPECT_EQ(std::get<std::vector<double>>(e[4].value), (std::vector<double>{0, 10.5}));
}

TEST(ConfigReader, Errors) {
    try {
        (void)parse_document("a = 1\nb 2\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW((void)parse_document("a = 1\na = 2\n"), ParseError);
    EXPECT_THROW((void)parse_document("a = \"open\n"), ParseError);
    EXPECT_THROW((void)parse_document("[time\n"), ParseError);
    EXPECT_EQ(std::get<std::string>(parse_value("linear_acoustics", 0, true)), "linear_acoustics");
    EXPECT_THROW((void)parse_value("linear_acoustics", 0, false), ParseError);
}

TEST(ScenarioConfig, Presets) {
    EXPECT_EQ(preset("example1").dt, 6.67e-8);
    EXPECT_EQ(preset("example1").num_steps(), 1500u);
    EXPECT_EQ(preset("example3").dt, 1e-6);
    EXPECT_EQ(preset("example3").v0.x2, 10.0);
    EXPECT_EQ(preset("example3").v0.x1, 0.0);
    EXPECT_EQ(preset("example2").paired_mode, CouplingMode::FrozenTemperature);
    EXPECT_EQ(preset("example3").paired_mode, CouplingMode::NoUltrasound);
    EXPECT_THROW((void)preset("example4"), ValidationError);
    for (const auto& n : preset_names()) EXPECT_NO_THROW(preset(n).validate());
}

TEST(ScenarioConfig, MissingOrZeroDt) {
    try {
        (void)parse_config("[time]\nsteps = 10\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "time.dt");
    }
    EXPECT_THROW((void)parse_config("[time]\ndt = 0\nsteps = 10\n"), ValidationError);
}

TEST(ScenarioConfig, UnknownAndSubstepKeys) {
    try {
        (void)parse_config("preset = \"example1\"\n[time]\nheat_dt = 1e-3\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "time.heat_dt");
        EXPECT_NE(std::string(e.what()).find("per-physics"), std::string::npos);
    }
    try {
        (void)parse_config("preset = \"example1\"\n[mesh]\nsize = 1\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "mesh.size");
    }
}

TEST(ScenarioConfig, PresetThenOverrides) {
    const auto c = parse_config("preset = \"example3\"\n[time]\nsteps = 7\n[coupling]\npaired = \"none\"\n");
    EXPECT_EQ(c.name, "example3");
    EXPECT_EQ(c.num_steps(), 7u);
    EXPECT_FALSE(c.paired_mode);
    EXPECT_EQ(c.dt, 1e-6);
}

TEST(ScenarioConfig, CommandLineOverride) {
    auto c = preset("example1");
    apply_override(c, "mesh.h", "0.004");
    apply_override(c, "coupling.mode", "linear_acoustics");
    apply_override(c, "transport.v0", "[1, 2]");
    EXPECT_EQ(c.mesh_h, 0.004);
    EXPECT_EQ(c.mode, CouplingMode::LinearAcoustics);
    EXPECT_EQ(c.v0.x2, 2.0);
    EXPECT_THROW(apply_override(c, "preset", "example2"), ValidationError);
    EXPECT_THROW(apply_override(c, "time.steps", "1.5"), ValidationError);
    EXPECT_THROW(apply_override(c, "acoustics.damping", "viscous"), ValidationError);
}

TEST(ScenarioConfig, ValidationNamesField) {
    auto c = preset("example1");
    c.alpha = 1.2;
    try {
        c.validate();
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "acoustics.alpha");
    }
    c = preset("example1");
    c.mesh_h = -1;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(ScenarioConfig, DocumentRoundTrip) {
    for (const auto& n : preset_names()) {
        auto c = preset(n);
        c.steps = 123;
        c.material_constants["rho_a"] = 1000.5;
        const auto text = config_document(c);
        const auto r = parse_config(text);
        EXPECT_EQ(config_document(r), text) << n;
        EXPECT_EQ(r.dt, c.dt);
        EXPECT_EQ(r.num_steps(), 123u);
        EXPECT_EQ(r.snapshot_steps, c.snapshot_steps);
        EXPECT_EQ(r.paired_mode, c.paired_mode);
        EXPECT_EQ(r.convection, c.convection);
    }
    auto custom = preset("example1");
    custom.material = MaterialKind::Custom;
    custom.q_coeffs = {2.25e6, 100.0};
    custom.b_coeffs = {1e-3};
    custom.perfusion = PerfusionKind::Gaussian;
    custom.perfusion_params = {1e-3, 2e-3, 0.1, 45, 37, 60};
    const auto text = config_document(custom);
    EXPECT_EQ(config_document(parse_config(text)), text);
}

TEST(ScenarioConfig, EveryKeyIsDocumented) {
    const auto keys = config_keys();
    EXPECT_NE(std::find(keys.begin(), keys.end(), "transport.convection"), keys.end());
    EXPECT_NE(std::find(keys.begin(), keys.end(), "time.dt"), keys.end());
    EXPECT_NE(std::find(keys.begin(), keys.end(), "preset"), keys.end());
}

TEST(Simulation, ZeroDataGivesZeroFields) {
    auto c = small("example1", 5);
    c.g0 = 0.0;
    c.g_tilde = 0.0;
    c.c0 = 0.0;
    Simulation sim(c, build_mesh(c));
    for (int i = 0; i < 5; ++i) sim.step();
    for (const auto& [name, f] : sim.fields()) EXPECT_EQ(f.lpNorm<Eigen::Infinity>(), 0.0) << name;
    EXPECT_EQ(sim.state().step, 5u);
    EXPECT_NEAR(sim.state().time, 5 * c.dt, 1e-20);
}

TEST(Simulation, StepsAdvanceEveryField) {
    auto c = small("example3", 10);
    Simulation sim(c, build_mesh(c));
    const StepRecord* r = nullptr;
    for (int i = 0; i < 10; ++i) r = &sim.step();
    EXPECT_GT(r->max_pressure, 0.0);
    EXPECT_GT(r->max_theta, 0.0);
    EXPECT_GT(r->mass_whole, 0.0);
    EXPECT_LE(r->budget_error, 1e-8);
    EXPECT_EQ(sim.state().acoustic.step, 10u);
    EXPECT_EQ(sim.state().thermal.step, 10u);
    EXPECT_EQ(sim.state().conc.step, 10u);
}

TEST(Run, SinksAndReport) {
    auto c = small("example1", 12);
    c.output_every = 5;
    c.snapshot_steps = {7};
    std::vector<std::size_t> outputs;
    int finished = 0;
    RunSinks sinks;
    sinks.on_output = [&](const Simulation& s) { outputs.push_back(s.state().step); };
    sinks.on_finish = [&](const Simulation&) { ++finished; };
    const auto report = run(c, sinks);
    EXPECT_EQ(outputs, (std::vector<std::size_t>{5, 7, 10}));
    EXPECT_EQ(finished, 1);
    EXPECT_EQ(report.steps, 12u);
    EXPECT_EQ(report.history.size(), 12u);
    EXPECT_EQ(report.max_fixed_point_iterations >= 2, true);
    EXPECT_GT(report.max_axis_pressure, 0.0);
}

TEST(Run, PairedConfigSharesMesh) {
    const auto c = small("example2", 3);
    const auto p = paired_config(c);
    ASSERT_TRUE(p);
    EXPECT_EQ(p->mode, CouplingMode::FrozenTemperature);
    EXPECT_FALSE(p->paired_mode);
    EXPECT_FALSE(paired_config(small("example1", 3)));
    auto mesh = build_mesh(c);
    Simulation a(c, mesh), b(*p, mesh);
    EXPECT_EQ(&a.mesh(), &b.mesh());
}

TEST(Run, StepperFailureBecomesRunError) {
    auto c = small("example1", 20);
    c.g0 = 1e16;
    bool reported = false;
    RunSinks sinks;
    sinks.on_failure = [&](const Simulation&, const std::exception&) { reported = true; };
    try {
        (void)run(c, sinks);
        FAIL();
    } catch (const RunError& e) {
        EXPECT_GE(e.step(), 1u);
        EXPECT_TRUE(reported);
    }
}

TEST(Run, Deterministic) {
    const auto c = small("example2", 15);
    const auto mesh = build_mesh(c);
    Simulation a(c, mesh), b(c, mesh);
    for (int i = 0; i < 15; ++i) {
        a.step();
        b.step();
    }
    const auto fa = a.fields(), fb = b.fields();
    for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_TRUE((fa[i].second.array() == fb[i].second.array()).all());
}

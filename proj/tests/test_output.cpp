#include "hifu/error.hpp"
#include "hifu/output.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hifu;

namespace {

const Mesh& mesh() {
    static const Mesh m = build_domain_mesh(0.01);
    return m;
}

NodalField coordinate(int which) {
    NodalField f(Eigen::Index(mesh().num_vertices()));
    for (std::size_t i = 0; i < mesh().num_vertices(); ++i)
        f[Eigen::Index(i)] = which == 0 ? mesh().vertices()[i].x1 : mesh().vertices()[i].x2;
    return f;
}

// Reads the values of SCALARS block `name` back from a legacy VTK document.
std::vector<double> read_scalars(const std::string& doc, const std::string& name) {
    std::istringstream in(doc);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("SCALARS " + name + " ", 0) == 0) break;
    std::getline(in, line);  // LOOKUP_TABLE
    std::vector<double> out;
    for (std::size_t i = 0; i < mesh().num_vertices(); ++i) {
        double v;
        in >> v;
        out.push_back(v);
    }
    return out;
}

}  // namespace

TEST(Vtk, StructureAndRoundTrip) {
    NodalField wild = coordinate(0);
    for (Eigen::Index i = 0; i < wild.size(); ++i) wild[i] = std::sin(1e3 * wild[i]) * 1e7 / 3.0;
    const auto doc = vtk_document(mesh(), {{"wild", wild}, {"x2", coordinate(1)}});
    EXPECT_EQ(doc.rfind("# vtk DataFile Version 2.0\n", 0), 0u);
    EXPECT_NE(doc.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
    EXPECT_NE(doc.find("CELL_TYPES " + std::to_string(mesh().num_triangles())), std::string::npos);
    EXPECT_NE(doc.find("POINT_DATA " + std::to_string(mesh().num_vertices())), std::string::npos);
    const auto back = read_scalars(doc, "wild");
    for (std::size_t i = 0; i < back.size(); ++i)
        EXPECT_NEAR(back[i], wild[Eigen::Index(i)], 1e-15 * std::abs(wild[Eigen::Index(i)]));
}

TEST(Vtk, Rejections) {
    EXPECT_THROW((void)vtk_document(mesh(), {}), ValidationError);
    EXPECT_THROW((void)vtk_document(mesh(), {{"bad name", coordinate(0)}}), ValidationError);
    EXPECT_THROW((void)vtk_document(mesh(), {{"short", NodalField::Zero(3)}}), ValidationError);
    EXPECT_THROW(write_vtk(mesh(), {{"x", coordinate(0)}}, "/nonexistent-dir/x.vtk"), IoError);
}

TEST(Vtk, WriteMatchesDocument) {
    const auto path = std::filesystem::temp_directory_path() / "hifu_test_output.vtk";
    write_vtk(mesh(), {{"x2", coordinate(1)}}, path);
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), vtk_document(mesh(), {{"x2", coordinate(1)}}));
    std::filesystem::remove(path);
}

TEST(AxisSlice, ReproducesLinearField) {
    const auto s = axis_slice(mesh(), coordinate(1), 141);
    ASSERT_EQ(s.size(), 141u);
    EXPECT_NEAR(s.front().x2, -0.02, 1e-15);
    EXPECT_NEAR(s.back().x2, 0.12, 1e-15);
    for (const auto& p : s) {
        ASSERT_TRUE(p.value) << p.x2;
        EXPECT_NEAR(*p.value, p.x2, 1e-12);
    }
}

TEST(AxisSlice, OutsideSamplesAreAbsent) {
    const auto s = axis_slice(mesh(), coordinate(1), 11, -0.03, 0.02);
    EXPECT_FALSE(s.front().value);
    EXPECT_TRUE(s.back().value);
    EXPECT_THROW((void)axis_slice(mesh(), coordinate(1), 1), DomainError);
    EXPECT_THROW((void)axis_slice(mesh(), coordinate(1), 5, 0.1, 0.0), DomainError);
}

TEST(AxisSampler, MatchesFreeFunction) {
    const AxisSampler sampler(mesh(), 57, DomainGeometry::bottom(), DomainGeometry::top);
    const auto a = sampler.sample(coordinate(1));
    const auto b = axis_slice(mesh(), coordinate(1), 57);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].x2, b[i].x2);
        EXPECT_EQ(a[i].value, b[i].value);
    }
}

TEST(PointLocator, LocatesAndInterpolates) {
    const PointLocator loc(mesh());
    EXPECT_FALSE(loc.locate({0.05, 0.05}));
    const auto v = loc.interpolate(coordinate(0), {0.013, 0.071});
    ASSERT_TRUE(v);
    EXPECT_NEAR(*v, 0.013, 1e-14);
}

TEST(LeadingPeak, ParabolicRefinement) {
    std::vector<SliceSample> s;
    for (int i = 0; i <= 100; ++i) {
        const double x = i * 0.01;
        s.push_back({x, 1.0 - (x - 0.7234) * (x - 0.7234) + 0.3 * std::exp(-std::pow((x - 0.2) / 0.02, 2))});
    }
    const auto p = leading_peak(s);
    ASSERT_TRUE(p);
    EXPECT_NEAR(p->x2, 0.7234, 1e-9);
    EXPECT_NEAR(p->value, 1.0, 1e-9);
    std::vector<SliceSample> none{{0.0, std::nullopt}, {1.0, std::nullopt}};
    EXPECT_FALSE(leading_peak(none));
    EXPECT_FALSE(slice_max(none));
}

TEST(LeadingPeak, PrefersLargestX2AboveThreshold) {
    std::vector<SliceSample> s;
    for (int i = 0; i <= 200; ++i) {
        const double x = i * 0.005;
        s.push_back({x, std::exp(-std::pow((x - 0.3) / 0.05, 2)) + 0.6 * std::exp(-std::pow((x - 0.8) / 0.05, 2)) +
                            0.3 * std::exp(-std::pow((x - 0.95) / 0.01, 2))});
    }
    const auto p = leading_peak(s, 0.5);
    ASSERT_TRUE(p);
    EXPECT_NEAR(p->x2, 0.8, 5e-3);
}

TEST(Csv, TwoPointSeries) {
    ProbeSeries a{"max_p", {}, {}};
    a.push(0.0, 1.0);
    a.push(0.5, 2.5);
    const auto doc = csv_document({a});
    EXPECT_EQ(std::count(doc.begin(), doc.end(), '\n'), 3);
    EXPECT_EQ(doc, "t,max_p\r\n0,1\r\n0.5,2.5\r\n");
    EXPECT_THROW(a.push(0.5, 3.0), ValidationError);
}

TEST(Csv, QuotingAndMismatch) {
    ProbeSeries a{"a,b", {}, {}}, b{"plain", {}, {}};
    a.push(1, 1);
    b.push(2, 1);
    EXPECT_THROW((void)csv_document({a, b}), ValidationError);
    EXPECT_THROW((void)csv_document({}), ValidationError);
    EXPECT_EQ(csv_document({a}).rfind("t,\"a,b\"\r\n", 0), 0u);
}

TEST(SliceCsv, AbsentSamplesAreEmptyCells) {
    std::vector<SliceSample> s{{-0.03, std::nullopt}, {0.0, 2.0}};
    const auto doc = slice_csv_document({{"p", s}});
    EXPECT_EQ(doc, "x2,p\r\n-0.029999999999999999,\r\n0,2\r\n");
}

TEST(Svg, Document) {
    ProbeSeries a{"mass", {}, {}};
    for (int i = 0; i < 10; ++i) a.push(i, i * i);
    PlotStyle style;
    style.title = "mass & more";
    const auto doc = svg_document({a}, style);
    EXPECT_NE(doc.find("<svg"), std::string::npos);
    EXPECT_NE(doc.find("<polyline"), std::string::npos);
    EXPECT_NE(doc.find("mass &amp; more"), std::string::npos);
    EXPECT_EQ(svg_document({a}, style), doc);
}

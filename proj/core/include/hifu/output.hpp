#pragma once

// Field snapshots (legacy VTK), axis slices, probe time series (CSV) and
// diagnostic line plots (SVG). Writers are pure: equal inputs give
// byte-identical files.

#include "hifu/fem.hpp"
#include "hifu/mesh.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hifu {

using NamedField = std::pair<std::string, NodalField>;

/// VTK legacy 2.0 ASCII unstructured grid with one SCALARS block per field,
/// 17 significant digits. Throws ValidationError for an empty field set, a
/// field of the wrong size or a name containing whitespace; IoError when the
/// file cannot be written.
void write_vtk(const Mesh& mesh, const std::vector<NamedField>& fields, const std::filesystem::path& path);
[[nodiscard]] std::string vtk_document(const Mesh& mesh, const std::vector<NamedField>& fields);

/// Finds the triangle containing a point, bucketed on a uniform grid.
class PointLocator {
public:
    explicit PointLocator(const Mesh& mesh);

    struct Hit {
        std::size_t triangle = 0;
        std::array<double, 3> bary{};
    };
    /// Lowest-index triangle containing p (boundary inclusive, 1e-12 relative
    /// slack), or nothing.
    [[nodiscard]] std::optional<Hit> locate(Point2 p) const;
    /// P1 interpolation of `field` at p.
    [[nodiscard]] std::optional<double> interpolate(const NodalField& field, Point2 p) const;

private:
    const Mesh* mesh_;
    double x0_, y0_, cell_;
    std::size_t nx_, ny_;
    std::vector<std::vector<std::size_t>> buckets_;
};

struct SliceSample {
    double x2 = 0.0;
    std::optional<double> value;  // empty outside the mesh
};

/// Fixed sample points on the symmetry axis with their containing triangles
/// located once; sampling a field is then a gather.
class AxisSampler {
public:
    /// `samples` equispaced points on {0} x [x2_min, x2_max].
    /// Throws DomainError when samples < 2 or the interval is empty.
    AxisSampler(const Mesh& mesh, std::size_t samples, double x2_min, double x2_max);

    [[nodiscard]] std::vector<SliceSample> sample(const NodalField& field) const;
    [[nodiscard]] std::size_t size() const noexcept { return x2_.size(); }

private:
    const Mesh* mesh_;
    std::vector<double> x2_;
    std::vector<std::optional<PointLocator::Hit>> hits_;
};

/// `samples` equispaced points on {0} x [x2_min, x2_max].
/// Throws DomainError when samples < 2 or the interval is empty.
[[nodiscard]] std::vector<SliceSample> axis_slice(const Mesh& mesh, const NodalField& field, std::size_t samples,
                                                  double x2_min, double x2_max);
/// The same on {0} x [-0.02, 0.12], the symmetry axis of the focused domain.
[[nodiscard]] std::vector<SliceSample> axis_slice(const Mesh& mesh, const NodalField& field, std::size_t samples);

/// Axis position of the leading (largest-x2) local maximum whose value is at
/// least `fraction` of the slice maximum, refined by a parabola through the
/// sample and its two neighbours.
struct PeakEstimate {
    double x2 = 0.0;
    double value = 0.0;
};
[[nodiscard]] std::optional<PeakEstimate> leading_peak(const std::vector<SliceSample>& slice, double fraction = 0.5);

/// Largest present value of a slice, or nothing if every sample is absent.
[[nodiscard]] std::optional<double> slice_max(const std::vector<SliceSample>& slice);

/// Header `x2,<name>...`; absent samples are empty cells. All slices must
/// share their abscissae.
[[nodiscard]] std::string slice_csv_document(const std::vector<std::pair<std::string, std::vector<SliceSample>>>& slices);

struct ProbeSeries {
    std::string name;
    std::vector<double> t;
    std::vector<double> values;

    /// Appends a sample; throws ValidationError unless t exceeds the last stamp.
    void push(double time, double value);
};

/// Header `t,<name>...`, one row per stamp, RFC-4180 quoting of names.
/// Throws ValidationError on no series, an empty series, differing lengths
/// or differing time stamps.
void write_csv(const std::vector<ProbeSeries>& series, const std::filesystem::path& path);
[[nodiscard]] std::string csv_document(const std::vector<ProbeSeries>& series);

struct PlotStyle {
    std::string title;
    std::string x_label = "t [s]";
    std::string y_label;
    int width = 720;
    int height = 440;
};

/// SVG 1.1 line plot, linear auto-scaled axes, one polyline per series.
void write_svg_lineplot(const std::vector<ProbeSeries>& series, const std::filesystem::path& path,
                        const PlotStyle& style = {});
[[nodiscard]] std::string svg_document(const std::vector<ProbeSeries>& series, const PlotStyle& style = {});

/// Writes `text` to `path`, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hifu

#include "hifu/output.hpp"

#include "hifu/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

namespace hifu {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    os.flush();
    if (!os) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

// -----------------------------------------------------------------------------
// VTK
// -----------------------------------------------------------------------------

std::string vtk_document(const Mesh& mesh, const std::vector<NamedField>& fields) {
    if (fields.empty()) throw ValidationError("fields", "at least one field is required");
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    for (const auto& [name, f] : fields) {
        if (name.empty() || std::any_of(name.begin(), name.end(), [](unsigned char c) { return std::isspace(c); }))
            throw ValidationError("fields", fmt::format("field name '{}' is empty or contains whitespace", name));
        if (f.size() != n)
            throw ValidationError(name, fmt::format("{} values for {} vertices", f.size(), mesh.num_vertices()));
    }
    fmt::memory_buffer out;
    auto it = std::back_inserter(out);
    fmt::format_to(it, "# vtk DataFile Version 2.0\nhifu snapshot\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    fmt::format_to(it, "POINTS {} double\n", mesh.num_vertices());
    for (const auto& v : mesh.vertices()) fmt::format_to(it, "{:.17g} {:.17g} 0.0\n", v.x1, v.x2);
    const std::size_t nt = mesh.num_triangles();
    fmt::format_to(it, "CELLS {} {}\n", nt, 4 * nt);
    for (const auto& t : mesh.triangles()) fmt::format_to(it, "3 {} {} {}\n", t[0], t[1], t[2]);
    fmt::format_to(it, "CELL_TYPES {}\n", nt);
    for (std::size_t k = 0; k < nt; ++k) fmt::format_to(it, "5\n");
    fmt::format_to(it, "POINT_DATA {}\n", mesh.num_vertices());
    for (const auto& [name, f] : fields) {
        fmt::format_to(it, "SCALARS {} double 1\nLOOKUP_TABLE default\n", name);
        for (Eigen::Index i = 0; i < n; ++i) fmt::format_to(it, "{:.17g}\n", f[i]);
    }
    return fmt::to_string(out);
}

void write_vtk(const Mesh& mesh, const std::vector<NamedField>& fields, const std::filesystem::path& path) {
    write_text_file(path, vtk_document(mesh, fields));
}

// -----------------------------------------------------------------------------
// Point location and slices
// -----------------------------------------------------------------------------

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
    const auto& vs = mesh.vertices();
    double xmin = vs[0].x1, xmax = vs[0].x1, ymin = vs[0].x2, ymax = vs[0].x2;
    for (const auto& v : vs) {
        xmin = std::min(xmin, v.x1);
        xmax = std::max(xmax, v.x1);
        ymin = std::min(ymin, v.x2);
        ymax = std::max(ymax, v.x2);
    }
    const double span = std::max(xmax - xmin, ymax - ymin);
    const double cells = std::max(1.0, std::sqrt(static_cast<double>(mesh.num_triangles())));
    cell_ = span > 0.0 ? span / cells : 1.0;
    x0_ = xmin;
    y0_ = ymin;
    nx_ = static_cast<std::size_t>(std::floor((xmax - xmin) / cell_)) + 1;
    ny_ = static_cast<std::size_t>(std::floor((ymax - ymin) / cell_)) + 1;
    buckets_.assign(nx_ * ny_, {});
    const auto clampi = [](double v, std::size_t n) {
        return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n - 1)));
    };
    for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
        const auto& t = mesh.triangles()[k];
        double a = vs[t[0]].x1, b = a, c = vs[t[0]].x2, d = c;
        for (int j = 1; j < 3; ++j) {
            a = std::min(a, vs[t[static_cast<std::size_t>(j)]].x1);
            b = std::max(b, vs[t[static_cast<std::size_t>(j)]].x1);
            c = std::min(c, vs[t[static_cast<std::size_t>(j)]].x2);
            d = std::max(d, vs[t[static_cast<std::size_t>(j)]].x2);
        }
        const std::size_t i0 = clampi(std::floor((a - x0_) / cell_), nx_), i1 = clampi(std::floor((b - x0_) / cell_), nx_);
        const std::size_t j0 = clampi(std::floor((c - y0_) / cell_), ny_), j1 = clampi(std::floor((d - y0_) / cell_), ny_);
        for (std::size_t j = j0; j <= j1; ++j)
            for (std::size_t i = i0; i <= i1; ++i) buckets_[j * nx_ + i].push_back(k);
    }
}

std::optional<PointLocator::Hit> PointLocator::locate(Point2 p) const {
    const double fi = std::floor((p.x1 - x0_) / cell_);
    const double fj = std::floor((p.x2 - y0_) / cell_);
    if (!std::isfinite(fi) || !std::isfinite(fj)) return std::nullopt;
    const auto i = static_cast<std::size_t>(std::clamp(fi, 0.0, static_cast<double>(nx_ - 1)));
    const auto j = static_cast<std::size_t>(std::clamp(fj, 0.0, static_cast<double>(ny_ - 1)));
    const auto& vs = mesh_->vertices();
    for (std::size_t k : buckets_[j * nx_ + i]) {
        const auto& t = mesh_->triangles()[k];
        const Point2 a = vs[t[0]], b = vs[t[1]], c = vs[t[2]];
        const double det = (b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2);
        const double l1 = ((p.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (p.x2 - a.x2)) / det;
        const double l2 = ((b.x1 - a.x1) * (p.x2 - a.x2) - (p.x1 - a.x1) * (b.x2 - a.x2)) / det;
        const double l0 = 1.0 - l1 - l2;
        const double eps = -1e-12;
        if (l0 >= eps && l1 >= eps && l2 >= eps) return Hit{k, {l0, l1, l2}};
    }
    return std::nullopt;
}

std::optional<double> PointLocator::interpolate(const NodalField& field, Point2 p) const {
    const auto hit = locate(p);
    if (!hit) return std::nullopt;
    const auto& t = mesh_->triangles()[hit->triangle];
    return hit->bary[0] * field[static_cast<Eigen::Index>(t[0])] + hit->bary[1] * field[static_cast<Eigen::Index>(t[1])] +
           hit->bary[2] * field[static_cast<Eigen::Index>(t[2])];
}

AxisSampler::AxisSampler(const Mesh& mesh, std::size_t samples, double x2_min, double x2_max) : mesh_(&mesh) {
    if (samples < 2) throw DomainError("axis_slice needs at least two samples");
    if (!(x2_max > x2_min)) throw DomainError("axis_slice needs x2_min < x2_max");
    const PointLocator loc(mesh);
    const double step = (x2_max - x2_min) / static_cast<double>(samples - 1);
    x2_.resize(samples);
    hits_.resize(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        x2_[s] = s + 1 == samples ? x2_max : x2_min + static_cast<double>(s) * step;
        hits_[s] = loc.locate({0.0, x2_[s]});
    }
}

std::vector<SliceSample> AxisSampler::sample(const NodalField& field) const {
    if (field.size() != static_cast<Eigen::Index>(mesh_->num_vertices()))
        throw ValidationError("field", "field does not match the mesh");
    std::vector<SliceSample> out(x2_.size());
    for (std::size_t s = 0; s < x2_.size(); ++s) {
        out[s].x2 = x2_[s];
        if (!hits_[s]) continue;
        const auto& t = mesh_->triangles()[hits_[s]->triangle];
        const auto& l = hits_[s]->bary;
        out[s].value = l[0] * field[static_cast<Eigen::Index>(t[0])] + l[1] * field[static_cast<Eigen::Index>(t[1])] +
                       l[2] * field[static_cast<Eigen::Index>(t[2])];
    }
    return out;
}

std::vector<SliceSample> axis_slice(const Mesh& mesh, const NodalField& field, std::size_t samples, double x2_min,
                                    double x2_max) {
    return AxisSampler(mesh, samples, x2_min, x2_max).sample(field);
}

std::vector<SliceSample> axis_slice(const Mesh& mesh, const NodalField& field, std::size_t samples) {
    return axis_slice(mesh, field, samples, DomainGeometry::bottom(), DomainGeometry::top);
}

std::optional<double> slice_max(const std::vector<SliceSample>& slice) {
    std::optional<double> m;
    for (const auto& s : slice)
        if (s.value && (!m || *s.value > *m)) m = s.value;
    return m;
}

std::optional<PeakEstimate> leading_peak(const std::vector<SliceSample>& slice, double fraction) {
    const auto top = slice_max(slice);
    if (!top || !(*top > 0.0)) return std::nullopt;
    const double threshold = fraction * *top;
    for (std::size_t i = slice.size() - 1; i-- > 1;) {
        const auto& l = slice[i - 1].value;
        const auto& c = slice[i].value;
        const auto& r = slice[i + 1].value;
        if (!l || !c || !r) continue;
        if (!(*c >= threshold && *c >= *l && *c > *r)) continue;
        const double h = slice[i + 1].x2 - slice[i].x2;
        const double curv = *l - 2.0 * *c + *r;
        double off = 0.0;
        if (curv < 0.0) off = 0.5 * (*l - *r) / curv;
        return PeakEstimate{slice[i].x2 + off * h, *c - 0.25 * (*l - *r) * off};
    }
    return std::nullopt;
}

// -----------------------------------------------------------------------------
// Probe series, CSV and SVG
// -----------------------------------------------------------------------------

void ProbeSeries::push(double time, double value) {
    if (!t.empty() && !(time > t.back()))
        throw ValidationError(name, fmt::format("time stamp {:.17g} does not exceed {:.17g}", time, t.back()));
    t.push_back(time);
    values.push_back(value);
}

namespace {

void check_series(const std::vector<ProbeSeries>& series) {
    if (series.empty()) throw ValidationError("series", "at least one series is required");
    for (const auto& s : series) {
        if (s.t.empty()) throw ValidationError(s.name, "series is empty");
        if (s.t.size() != s.values.size()) throw ValidationError(s.name, "time and value counts differ");
        if (s.t.size() != series.front().t.size())
            throw ValidationError(s.name, fmt::format("{} samples, expected {}", s.t.size(), series.front().t.size()));
        if (s.t != series.front().t) throw ValidationError(s.name, "time stamps differ from the first series");
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::vector<double> nice_ticks(double lo, double hi) {
    const double range = hi - lo;
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double step = (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
    std::vector<double> out;
    for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step)
        out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return out;
}

}  // namespace

std::string slice_csv_document(const std::vector<std::pair<std::string, std::vector<SliceSample>>>& slices) {
    if (slices.empty()) throw ValidationError("slices", "at least one slice is required");
    const auto& ref = slices.front().second;
    for (const auto& [name, s] : slices) {
        if (s.size() != ref.size()) throw ValidationError(name, "slice lengths differ");
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s[i].x2 != ref[i].x2) throw ValidationError(name, "slice abscissae differ");
    }
    fmt::memory_buffer out;
    auto it = std::back_inserter(out);
    fmt::format_to(it, "x2");
    for (const auto& sl : slices) fmt::format_to(it, ",{}", csv_field(sl.first));
    fmt::format_to(it, "\r\n");
    for (std::size_t i = 0; i < ref.size(); ++i) {
        fmt::format_to(it, "{:.17g}", ref[i].x2);
        for (const auto& sl : slices) {
            if (sl.second[i].value) fmt::format_to(it, ",{:.17g}", *sl.second[i].value);
            else fmt::format_to(it, ",");
        }
        fmt::format_to(it, "\r\n");
    }
    return fmt::to_string(out);
}

std::string csv_document(const std::vector<ProbeSeries>& series) {
    check_series(series);
    fmt::memory_buffer out;
    auto it = std::back_inserter(out);
    fmt::format_to(it, "t");
    for (const auto& s : series) fmt::format_to(it, ",{}", csv_field(s.name));
    fmt::format_to(it, "\r\n");
    for (std::size_t i = 0; i < series.front().t.size(); ++i) {
        fmt::format_to(it, "{:.17g}", series.front().t[i]);
        for (const auto& s : series) fmt::format_to(it, ",{:.17g}", s.values[i]);
        fmt::format_to(it, "\r\n");
    }
    return fmt::to_string(out);
}

void write_csv(const std::vector<ProbeSeries>& series, const std::filesystem::path& path) {
    write_text_file(path, csv_document(series));
}

std::string svg_document(const std::vector<ProbeSeries>& series, const PlotStyle& style) {
    check_series(series);
    static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            if (!std::isfinite(s.values[i])) continue;
            xmin = std::min(xmin, s.t[i]);
            xmax = std::max(xmax, s.t[i]);
            ymin = std::min(ymin, s.values[i]);
            ymax = std::max(ymax, s.values[i]);
        }
    }
    if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
    if (ymax == ymin) {
        const double pad = ymin == 0.0 ? 1.0 : 0.05 * std::abs(ymin);
        ymin -= pad;
        ymax += pad;
    }
    const double pad_y = 0.05 * (ymax - ymin);
    ymin -= pad_y;
    ymax += pad_y;

    const double w = style.width, h = style.height;
    const double left = 80, right = 20.0, top = style.title.empty() ? 20 : 40, bottom = 50;
    const double pw = w - left - right - 130, ph = h - top - bottom;
    const auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    const auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    fmt::memory_buffer out;
    auto it = std::back_inserter(out);
    fmt::format_to(it,
                   "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                   "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
                   "viewBox=\"0 0 {0} {1}\">\n"
                   "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
                   style.width, style.height);
    if (!style.title.empty())
        fmt::format_to(it, "<text x=\"{:.2f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
                           "text-anchor=\"middle\">{}</text>\n",
                       left + pw / 2, xml_escape(style.title));
    fmt::format_to(it, "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
                       "stroke=\"black\"/>\n",
                   left, top, pw, ph);
    for (double x : nice_ticks(xmin, xmax)) {
        fmt::format_to(it, "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
                       sx(x), top + ph, top + ph + 5);
        fmt::format_to(it, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
                           "text-anchor=\"middle\">{:.4g}</text>\n",
                       sx(x), top + ph + 18, x);
    }
    for (double y : nice_ticks(ymin, ymax)) {
        fmt::format_to(it, "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n",
                       left - 5, sy(y), left);
        fmt::format_to(it, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
                           "text-anchor=\"end\">{:.4g}</text>\n",
                       left - 8, sy(y) + 4, y);
    }
    fmt::format_to(it, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\" "
                       "text-anchor=\"middle\">{}</text>\n",
                   left + pw / 2, h - 12, xml_escape(style.x_label));
    if (!style.y_label.empty())
        fmt::format_to(it, "<text x=\"16\" y=\"{0:.2f}\" font-family=\"sans-serif\" font-size=\"12\" "
                           "text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.2f})\">{1}</text>\n",
                       top + ph / 2, xml_escape(style.y_label));
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % std::size(palette)];
        fmt::format_to(it, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", color);
        bool first = true;
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            if (!std::isfinite(s.values[i])) continue;
            fmt::format_to(it, "{}{:.2f},{:.2f}", first ? "" : " ", sx(s.t[i]), sy(s.values[i]));
            first = false;
        }
        fmt::format_to(it, "\"/>\n");
        const double ly = top + 14 + 18 * static_cast<double>(k);
        fmt::format_to(it, "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
                           "stroke-width=\"2\"/>\n",
                       left + pw + 12, ly, left + pw + 32, ly, color);
        fmt::format_to(it, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                       left + pw + 36, ly + 4, xml_escape(s.name));
    }
    fmt::format_to(it, "</svg>\n");
    return fmt::to_string(out);
}

void write_svg_lineplot(const std::vector<ProbeSeries>& series, const std::filesystem::path& path,
                        const PlotStyle& style) {
    write_text_file(path, svg_document(series, style));
}

}  // namespace hifu

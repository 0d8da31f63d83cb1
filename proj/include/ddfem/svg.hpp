#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include "ddfem/mesh.hpp"
#include "ddfem/spaces.hpp"

namespace ddfem {

struct SvgOptions {
    int size = 640;       // drawing area, square
    int margin = 40;
    std::string title;
};

namespace detail {

/// Diverging blue-white-red ramp on [0,1].
inline std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    auto lerp = [](double a, double b, double s) { return a + (b - a) * s; };
    double r, g, b;
    if (t < 0.5) {
        const double s = t / 0.5;
        r = lerp(0.231, 0.865, s);
        g = lerp(0.298, 0.865, s);
        b = lerp(0.753, 0.865, s);
    } else {
        const double s = (t - 0.5) / 0.5;
        r = lerp(0.865, 0.706, s);
        g = lerp(0.865, 0.016, s);
        b = lerp(0.865, 0.150, s);
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(r * 255.0 + 0.5),
                  static_cast<int>(g * 255.0 + 0.5), static_cast<int>(b * 255.0 + 0.5));
    return buf;
}

inline std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace detail

/// Flat-shaded rendering of the vertex values: each triangle is filled with
/// the ramp color of its mean value. Writes a standalone SVG 1.1 document.
inline void write_field_svg(const Mesh& mesh, const std::vector<double>& nodal, std::ostream& out,
                            const SvgOptions& opts = {}) {
    if (nodal.size() != static_cast<std::size_t>(mesh.n_vertices()))
        throw std::invalid_argument("write_field_svg: need one value per vertex");
    double lo = 0.0, hi = 0.0;
    if (!nodal.empty()) {
        lo = *std::min_element(nodal.begin(), nodal.end());
        hi = *std::max_element(nodal.begin(), nodal.end());
    }
    const double span = hi - lo > 0.0 ? hi - lo : 1.0;

    const int total = opts.size + 2 * opts.margin;
    const int legend_w = 70;
    auto px = [&](double x) { return opts.margin + x * opts.size; };
    auto py = [&](double y) { return opts.margin + (1.0 - y) * opts.size; };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << total + legend_w
        << "\" height=\"" << total << "\" viewBox=\"0 0 " << total + legend_w << " " << total << "\">\n";
    if (!opts.title.empty())
        out << "<text x=\"" << opts.margin << "\" y=\"" << opts.margin - 12 << "\" font-family=\"sans-serif\" font-size=\"14\">"
            << opts.title << "</text>\n";
    for (const auto& tri : mesh.triangles) {
        const Vec2 a = mesh.vertices[static_cast<std::size_t>(tri[0])];
        const Vec2 b = mesh.vertices[static_cast<std::size_t>(tri[1])];
        const Vec2 c = mesh.vertices[static_cast<std::size_t>(tri[2])];
        const double mean = (nodal[static_cast<std::size_t>(tri[0])] + nodal[static_cast<std::size_t>(tri[1])] +
                             nodal[static_cast<std::size_t>(tri[2])]) / 3.0;
        out << "<polygon points=\"" << detail::fmt2(px(a.x)) << "," << detail::fmt2(py(a.y)) << " "
            << detail::fmt2(px(b.x)) << "," << detail::fmt2(py(b.y)) << " " << detail::fmt2(px(c.x)) << ","
            << detail::fmt2(py(c.y)) << "\" fill=\"" << detail::ramp_color((mean - lo) / span)
            << "\" stroke=\"none\"/>\n";
    }
    out << "<rect x=\"" << opts.margin << "\" y=\"" << opts.margin << "\" width=\"" << opts.size << "\" height=\""
        << opts.size << "\" fill=\"none\" stroke=\"black\"/>\n";

    const int steps = 32;
    const double cell = static_cast<double>(opts.size) / steps;
    for (int i = 0; i < steps; ++i) {
        const double t = 1.0 - (i + 0.5) / steps;
        out << "<rect x=\"" << total + 10 << "\" y=\"" << detail::fmt2(opts.margin + i * cell) << "\" width=\"18\" height=\""
            << detail::fmt2(cell + 0.5) << "\" fill=\"" << detail::ramp_color(t) << "\"/>\n";
    }
    out << "<text x=\"" << total + 32 << "\" y=\"" << opts.margin + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::fmt4(hi) << "</text>\n";
    out << "<text x=\"" << total + 32 << "\" y=\"" << opts.margin + opts.size << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::fmt4(lo) << "</text>\n";
    out << "</svg>\n";
}

}  // namespace ddfem

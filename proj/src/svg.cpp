#include "simsurf/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace simsurf {

namespace {

std::string fx(double x) {
    char buf[48];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 3);
    std::string s(buf, r.ptr);
    if (s == "-0.000") s = "0.000";
    return s;
}

struct Frame {
    double x0, y1, scale;
    double px(cplx z) const { return (z.real() - x0) * scale; }
    double py(cplx z) const { return (y1 - z.imag()) * scale; }
};

std::string polyline(const Frame& fr, const std::vector<cplx>& pts, const char* cls) {
    std::string d;
    for (size_t i = 0; i < pts.size(); ++i) {
        d += i ? " L" : "M";
        d += fx(fr.px(pts[i])) + "," + fx(fr.py(pts[i]));
    }
    return std::string("<path class=\"") + cls + "\" d=\"" + d + "\"/>\n";
}

}  // namespace

std::string render_svg(const StraighteningMap& map, const Skeleton& sk, const RenderStyle& st) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (cplx v : sk.vertices) {
        x0 = std::min(x0, v.real());
        x1 = std::max(x1, v.real());
        y0 = std::min(y0, v.imag());
        y1 = std::max(y1, v.imag());
    }
    if (!(x1 >= x0)) x0 = y0 = -1, x1 = y1 = 1;
    double span = std::max({x1 - x0, y1 - y0, 1e-12});
    if (sk.hasInfinity) span *= 2.0;  // room for the rays to infinity
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    const double half = 0.5 * span * (1 + 2 * st.margin);
    Frame fr{cx - half, cy + half, st.width / (2 * half)};

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(st.width) + "\" height=\"" +
           std::to_string(st.width) + "\" viewBox=\"0 0 " + std::to_string(st.width) + " " +
           std::to_string(st.width) + "\">\n";
    out += "<style>.hatch{fill:none;stroke:#9bb;stroke-width:0.6}.edge{fill:none;stroke:#222;stroke-width:1.2}"
           ".fail{fill:none;stroke:#c22;stroke-width:1.2;stroke-dasharray:4 2}.pole{fill:#c60}</style>\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (st.hatching && map.grid) {
        const GridSpec& g = *map.grid;
        const int lines = g.cellsPerSide * std::max(1, st.hatchPerCell);
        const int samples = g.cellsPerSide * std::max(2, st.hatchSamples);
        out += "<g id=\"hatching\">\n";
        for (int dir = 0; dir < 2; ++dir)
            for (int k = 1; k < lines; ++k) {
                std::vector<cplx> pts;
                double t = -g.halfWidth + 2 * g.halfWidth * k / lines;
                for (int i = 0; i <= samples; ++i) {
                    double u = -g.halfWidth + 2 * g.halfWidth * i / samples;
                    cplx z = g.origin + (dir == 0 ? cplx(u, t) : cplx(t, u));
                    pts.push_back(evaluate_straightening(map, z));
                }
                out += polyline(fr, pts, "hatch");
            }
        out += "</g>\n";
    }

    out += "<g id=\"skeleton\">\n";
    for (const auto& e : sk.edges) {
        if (e.path.vertices.size() < 2) continue;
        out += polyline(fr, e.path.vertices, e.ok ? "edge" : "fail");
    }
    out += "</g>\n<g id=\"poles\">\n";
    for (size_t k = 0; k < sk.vertices.size(); ++k) {
        cplx v = sk.vertices[k];
        out += "<circle class=\"pole\" cx=\"" + fx(fr.px(v)) + "\" cy=\"" + fx(fr.py(v)) + "\" r=\"" +
               fx(st.poleRadius) + "\"/>\n";
    }
    out += "</g>\n</svg>\n";
    return out;
}

}  // namespace simsurf

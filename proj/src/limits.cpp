#include "simsurf/limits.hpp"

#include "simsurf/quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace simsurf {

namespace {

Jet numeric_jet(const BeltramiField& field, cplx c, double h) {
    auto mu = [&](double dx, double dy) { return field.value(c + cplx(dx, dy)); };
    // 5-point weights paired by sign, so fields constant along a direction difference to exactly 0
    const double w[2] = {8.0 / 12, -1.0 / 12};
    const double o[2] = {1.0, 2.0};
    Jet j{};
    j.v = mu(0, 0);
    for (int a = 0; a < 2; ++a) {
        const double p = o[a] * h;
        j.x += w[a] * (mu(p, 0) - mu(-p, 0)) / h;
        j.y += w[a] * (mu(0, p) - mu(0, -p)) / h;
        for (int b = 0; b < 2; ++b) {
            const double q = o[b] * h;
            j.xy += w[a] * w[b] * ((mu(p, q) - mu(p, -q)) - (mu(-p, q) - mu(-p, -q))) / (h * h);
        }
    }
    return j;
}

}  // namespace

cplx limit_density(const BeltramiField& field, cplx c, double fdScale) {
    Jet j;
    if (field.hasExactDerivatives()) {
        j = field.jet(c);
    } else {
        double scale = field.kind() == FieldKind::VerticalStrips ? field.stripWidth() : 1.0;
        if (field.samples()) scale = field.samples()->grid.cellSide();
        j = numeric_jet(field, c, fdScale * scale);
    }
    const cplx one = 1.0 - j.v * j.v;
    if (std::abs(one) < 1e-14) throw Error(ErrorCode::InvalidArgument, "|mu| = 1 at the density point");
    return -(2.0 * j.xy / one + 4.0 * j.v * j.x * j.y / (one * one)) / kTwoPi;
}

std::vector<LambdaExpansionRow> lambda_expansion_check(const BeltramiField& field, cplx c,
                                                       const std::vector<double>& epsList) {
    std::vector<LambdaExpansionRow> rows;
    const cplx expected = kTwoPi * limit_density(field, c);
    for (double eps : epsList) {
        if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
        PiecewiseField q = average_field(field, GridSpec{eps, 2, c});
        // cells: (0,0) SW, (1,0) SE, (0,1) NW, (1,1) NE
        CornerMonodromy cm = corner_monodromy(q.at(1, 1), q.at(0, 1), q.at(0, 0), q.at(1, 0));
        LambdaExpansionRow r;
        r.eps = eps;
        r.logLambda = cm.logLambda;
        r.scaled = cm.logLambda / (eps * eps);
        r.expected = expected;
        r.defect = std::abs(r.scaled - expected);
        rows.push_back(r);
    }
    return rows;
}

double AtomicMeasure::totalMass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += std::abs(a.weight);
    return s;
}

cplx AtomicMeasure::totalWeight() const {
    cplx s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
}

AtomicMeasure atomic_measure(const StraighteningMap& map, bool pushforward, double minWeight) {
    AtomicMeasure m;
    m.provenance = pushforward ? "pushforward" : "source";
    for (size_t k = 0; k < map.symbol.poles.size(); ++k) {
        const Pole& p = map.symbol.poles[k];
        if (std::abs(p.res) <= minWeight) continue;
        cplx loc = p.z;
        if (!pushforward && map.grid) {
            const int n = map.grid->cornersPerSide();
            loc = map.grid->corner(static_cast<int>(k) % n, static_cast<int>(k) / n);
        }
        m.atoms.push_back({loc, p.res});
    }
    return m;
}

cplx weak_pairing(const AtomicMeasure& m, const std::function<cplx(cplx)>& tau) {
    cplx s = 0.0;
    for (const auto& a : m.atoms) s += a.weight * tau(a.location);
    return s;
}

cplx weak_pairing(const std::function<cplx(cplx)>& density, const Rect& region, int resolution,
                  const std::function<cplx(cplx)>& tau) {
    if (resolution < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
    const double hx = (region.x1 - region.x0) / resolution, hy = (region.y1 - region.y0) / resolution;
    cplx s = 0.0;
    for (int j = 0; j < resolution; ++j)
        for (int i = 0; i < resolution; ++i) {
            cplx z(region.x0 + (i + 0.5) * hx, region.y0 + (j + 0.5) * hy);
            s += density(z) * tau(z);
        }
    return s * hx * hy;
}

double density_mass(const std::function<cplx(cplx)>& density, const Rect& region, int resolution) {
    const double hx = (region.x1 - region.x0) / resolution, hy = (region.y1 - region.y0) / resolution;
    double s = 0.0;
    for (int j = 0; j < resolution; ++j)
        for (int i = 0; i < resolution; ++i)
            s += std::abs(density(cplx(region.x0 + (i + 0.5) * hx, region.y0 + (j + 0.5) * hy)));
    return s * hx * hy;
}

TruncatedSymbol truncated_symbol(const ChristoffelSymbol& sym, cplx a, cplx b, double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "cutoff radius must be positive");
    TruncatedSymbol t;
    t.cutoff = r;
    t.pathStart = a;
    t.pathEnd = b;
    t.symbol.impliedInfinityResidue = sym.impliedInfinityResidue;
    for (size_t k = 0; k < sym.poles.size(); ++k) {
        const Pole& p = sym.poles[k];
        if (std::abs(p.z - a) < r || std::abs(p.z - b) < r) {
            t.removed.push_back(static_cast<int>(k));
            continue;
        }
        t.symbol.poles.push_back(p);
    }
    return t;
}

LimitConnection make_limit_connection(const std::function<cplx(cplx)>& density,
                                      const std::function<cplx(cplx)>& f, const Rect& region, int n,
                                      bool coversSupport) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
    LimitConnection c;
    c.coversSupport = coversSupport;
    const double hx = (region.x1 - region.x0) / n, hy = (region.y1 - region.y0) / n;
    std::vector<cplx> img((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) img[j * (n + 1) + i] = f(cplx(region.x0 + i * hx, region.y0 + j * hy));
    c.x0 = c.y0 = std::numeric_limits<double>::infinity();
    c.x1 = c.y1 = -c.x0;
    for (cplx z : img) {
        c.x0 = std::min(c.x0, z.real());
        c.x1 = std::max(c.x1, z.real());
        c.y0 = std::min(c.y0, z.imag());
        c.y1 = std::max(c.y1, z.imag());
    }
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            cplx src(region.x0 + (i + 0.5) * hx, region.y0 + (j + 0.5) * hy);
            cplx mass = density(src) * hx * hy;
            if (mass == 0.0) continue;
            std::array<cplx, 4> q = {img[j * (n + 1) + i], img[j * (n + 1) + i + 1], img[(j + 1) * (n + 1) + i + 1],
                                     img[(j + 1) * (n + 1) + i]};
            c.centres.push_back(f(src));
            c.masses.push_back(mass);
            double r = 0.0;
            for (cplx v : q) r = std::max(r, std::abs(v - c.centres.back()));
            c.radii.push_back(r);
            c.cells.push_back(q);
        }
    return c;
}

namespace {

double quad_area(const std::array<cplx, 4>& q) {
    double a = 0.0;
    for (int k = 0; k < 4; ++k) a += cross(q[k], q[(k + 1) % 4]);
    return 0.5 * a;
}

// int over triangle (z, a, b) of 1/(z - s) dA, signed by orientation; exact in the radius
cplx polar_triangle(cplx z, cplx a, cplx b, const GaussRule& g) {
    const cplx da = a - z, db = b - z;
    if (std::abs(da) == 0.0 || std::abs(db) == 0.0) return 0.0;
    const double sweep = std::arg(db / da);
    const cplx e = b - a;
    const double num = cross(e, a - z);
    if (num == 0.0 || sweep == 0.0) return 0.0;
    const double phi0 = std::arg(da);
    cplx s = 0.0;
    for (size_t k = 0; k < g.nodes.size(); ++k) {
        double phi = phi0 + 0.5 * sweep * (1.0 + g.nodes[k]);
        cplx dir = std::polar(1.0, phi);
        double R = num / cross(e, dir);
        s += g.weights[k] * (-std::conj(dir)) * R;
    }
    return 0.5 * sweep * s;
}

}  // namespace

cplx limit_symbol(const LimitConnection& conn, cplx z) {
    if (!conn.coversSupport && z.real() >= conn.x0 && z.real() <= conn.x1 && z.imag() >= conn.y0 &&
        z.imag() <= conn.y1)
        throw Error(ErrorCode::InsufficientData, "probe inside the support hull of an incomplete sampling");
    const GaussRule& g = gauss_legendre(8);
    cplx s = 0.0;
    for (size_t k = 0; k < conn.centres.size(); ++k) {
        const double d = std::abs(z - conn.centres[k]);
        if (d > 2.0 * conn.radii[k]) {
            s += conn.masses[k] / (z - conn.centres[k]);
            continue;
        }
        const auto& q = conn.cells[k];
        const double area = quad_area(q);
        if (std::abs(area) == 0.0) continue;
        const cplx density = conn.masses[k] / std::abs(area);
        cplx t = 0.0;
        for (int e = 0; e < 4; ++e) t += polar_triangle(z, q[e], q[(e + 1) % 4], g);
        s += density * (area > 0.0 ? t : -t);
    }
    return s;
}

namespace {

struct Derivs {
    cplx fx, fy, fxy;
};

Derivs central(const std::function<cplx(cplx)>& f, cplx p, double h) {
    const cplx hx(h, 0.0), hy(0.0, h);
    Derivs d;
    d.fx = (f(p + hx) - f(p - hx)) / (2.0 * h);
    d.fy = (f(p + hy) - f(p - hy)) / (2.0 * h);
    d.fxy = (f(p + hx + hy) - f(p + hx - hy) - f(p - hx + hy) + f(p - hx - hy)) / (4.0 * h * h);
    return d;
}

}  // namespace

cplx frame_connection(const std::function<cplx(cplx)>& f, cplx z, double h, cplx seed) {
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
    cplx p = seed;
    for (int it = 0; it < 50; ++it) {
        cplx r = f(p) - z;
        if (std::abs(r) <= 1e-14 * (1.0 + std::abs(z))) break;
        Derivs d = central(f, p, h);
        double a = d.fx.real(), b = d.fy.real(), c = d.fx.imag(), e = d.fy.imag();
        double det = a * e - b * c;
        if (std::abs(det) < 1e-14 * std::norm(d.fx))
            throw Error(ErrorCode::DegenerateGeometry, "Jacobian near-singular");
        double dx = (e * r.real() - b * r.imag()) / det, dy = (-c * r.real() + a * r.imag()) / det;
        p -= cplx(dx, dy);
        if (std::hypot(dx, dy) <= 1e-15 * (1.0 + std::abs(p))) break;
    }
    Derivs d1 = central(f, p, h), d2 = central(f, p, 0.5 * h);
    auto rich = [](cplx a, cplx b) { return (4.0 * b - a) / 3.0; };
    cplx fx = rich(d1.fx, d2.fx), fy = rich(d1.fy, d2.fy), fxy = rich(d1.fxy, d2.fxy);
    double jac = cross(fx, fy);
    if (std::abs(jac) < 1e-12 * std::abs(fx) * std::abs(fy))
        throw Error(ErrorCode::DegenerateGeometry, "Jacobian near-singular");
    return -fxy / (fx * fy);
}

cplx frame_connection(const std::function<cplx(cplx)>& f, cplx z, double h) {
    return frame_connection(f, z, h, z);
}

PolylinePath probe_path(const StraighteningMap& map, const ProbeSegment& seg, double* rowY) {
    if (!map.grid) throw Error(ErrorCode::InvalidArgument, "probe paths need a grid map");
    const GridSpec& g = *map.grid;
    const double s = g.cellSide();
    const double rel = seg.y - (g.origin.imag() - g.halfWidth);
    const double y = g.origin.imag() - g.halfWidth + (std::floor(rel / s) + 0.5) * s;
    if (rowY) *rowY = y;
    PolylinePath p;
    for (int k = 0; k <= seg.samples; ++k) {
        double x = seg.xStart + (seg.xEnd - seg.xStart) * k / seg.samples;
        p.vertices.push_back(evaluate_straightening(map, cplx(x, y)));
    }
    return p;
}

std::vector<TransportLimitRow> transport_limit_compare(const std::vector<const StraighteningMap*>& maps,
                                                       const ProbeSegment& seg, const LimitConnection& reference,
                                                       double cutoffFraction) {
    std::vector<TransportLimitRow> rows;
    for (const StraighteningMap* m : maps) {
        auto t0 = std::chrono::steady_clock::now();
        TransportLimitRow r;
        r.refinement = m->grid ? m->grid->cellsPerSide : 0;
        PolylinePath path = probe_path(*m, seg, &r.rowY);
        TruncatedSymbol ts = truncated_symbol(m->symbol, path.vertices.front(), path.vertices.back(),
                                              cutoffFraction * m->grid->cellSide());
        r.removed = static_cast<int>(ts.removed.size());
        r.discrete = segment_log_integral(ts.symbol, path).tau;
        r.limit = line_integral([&](cplx z) { return limit_symbol(reference, z); }, path, 4);
        r.defect = std::abs(r.discrete - r.limit);
        r.runtimeMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(r);
    }
    return rows;
}

}  // namespace simsurf

#include "simsurf/gluing.hpp"

#include <cmath>
#include <map>

namespace simsurf {

namespace {

struct SlotInfo {
    int pairing = -1;
    bool isFirst = true;
};

std::vector<std::vector<SlotInfo>> slot_table(const GluingComplex& c) {
    std::vector<std::vector<SlotInfo>> t(c.polygons.size());
    for (size_t p = 0; p < c.polygons.size(); ++p) t[p].resize(c.polygons[p].vertices.size());
    auto mark = [&](const EdgeSlot& s, int idx, bool first) {
        if (s.polygon < 0 || s.polygon >= static_cast<int>(t.size()) || s.edge < 0 ||
            s.edge >= static_cast<int>(t[s.polygon].size()))
            throw Error(ErrorCode::StructuralError, "edge slot out of range");
        if (t[s.polygon][s.edge].pairing >= 0)
            throw Error(ErrorCode::StructuralError, "edge slot paired twice");
        t[s.polygon][s.edge] = {idx, first};
    };
    for (size_t i = 0; i < c.pairings.size(); ++i) {
        mark(c.pairings[i].first, static_cast<int>(i), true);
        mark(c.pairings[i].second, static_cast<int>(i), false);
    }
    return t;
}

double wrap_positive(double a) {
    a = std::fmod(a, kTwoPi);
    if (a <= 0.0) a += kTwoPi;
    return a;
}

}  // namespace

double sector_angle(const PlanarPolygon& p, int i) {
    const int n = static_cast<int>(p.vertices.size());
    cplx v = p.vertices[i];
    cplx out = p.vertices[(i + 1) % n] - v;
    cplx in = p.vertices[(i + n - 1) % n] - v;
    return wrap_positive(std::arg(in / out));
}

int GluingComplex::eulerCharacteristic() const {
    return static_cast<int>(cycles.size()) - static_cast<int>(pairings.size()) +
           static_cast<int>(polygons.size());
}

int GluingComplex::cycleOf(int polygon, int vertex) const {
    for (size_t c = 0; c < cycles.size(); ++c)
        for (const auto& f : cycles[c].flags)
            if (f.polygon == polygon && f.vertex == vertex) return static_cast<int>(c);
    return -1;
}

cplx GluingComplex::finiteResidueSum() const {
    cplx s = 0.0;
    for (const auto& c : cycles) s += c.residue;
    return s;
}

cplx residue_of_cycle(const VertexCycle& cycle) {
    if (!(cycle.dilation > 0.0)) throw Error(ErrorCode::StructuralError, "non-positive dilation");
    return (std::log(cycle.dilation) + kI * cycle.signedAngle) / (kTwoPi * kI) - 1.0;
}

cplx principal_residue(const VertexCycle& cycle) {
    if (!(cycle.dilation > 0.0)) throw Error(ErrorCode::StructuralError, "non-positive dilation");
    cplx L = cycle.dilation * std::exp(kI * cycle.signedAngle);
    if (!cycle.transitions.empty()) {
        // same number, but exact when every transition is the identity
        L = 1.0;
        for (cplx a : cycle.transitions) L /= a;
    }
    return std::log(L) / (kTwoPi * kI);
}

std::vector<VertexCycle> vertex_cycles(const GluingComplex& complex) {
    auto table = slot_table(complex);
    for (size_t p = 0; p < table.size(); ++p)
        for (size_t e = 0; e < table[p].size(); ++e)
            if (table[p][e].pairing < 0)
                throw Error(ErrorCode::StructuralError, "open cycle: edge " + std::to_string(e) +
                                                            " of polygon " + std::to_string(p) +
                                                            " is not paired");

    std::vector<std::vector<char>> seen(complex.polygons.size());
    for (size_t p = 0; p < seen.size(); ++p) seen[p].assign(complex.polygons[p].vertices.size(), 0);

    std::vector<VertexCycle> out;
    for (size_t p0 = 0; p0 < complex.polygons.size(); ++p0)
        for (size_t v0 = 0; v0 < complex.polygons[p0].vertices.size(); ++v0) {
            if (seen[p0][v0]) continue;
            VertexCycle cyc;
            int p = static_cast<int>(p0), v = static_cast<int>(v0);
            double logModulus = 0.0;
            while (!seen[p][v]) {
                seen[p][v] = 1;
                const auto& poly = complex.polygons[p];
                const int n = static_cast<int>(poly.vertices.size());
                cyc.flags.push_back({p, v, v});
                cyc.sectorAngles.push_back(sector_angle(poly, v));
                int after = (v + n - 1) % n;
                const SlotInfo& si = table[p][after];
                const EdgePairing& pr = complex.pairings[si.pairing];
                AffineMap s = si.isFirst ? pr.map : pr.map.inverse();
                EdgeSlot other = si.isFirst ? pr.second : pr.first;
                cyc.transitions.push_back(s.a);
                logModulus += std::log(std::abs(s.a));
                p = other.polygon;
                v = other.edge;
            }
            if (p != static_cast<int>(p0) || v != static_cast<int>(v0))
                throw Error(ErrorCode::StructuralError, "flag successor map is not a permutation");
            for (double a : cyc.sectorAngles) cyc.totalAngle += a;
            cyc.dilation = std::exp(-logModulus);
            cyc.signedAngle = cyc.totalAngle;
            cyc.monodromyFactor = cyc.dilation * std::exp(kI * cyc.signedAngle);
            cyc.residue = residue_of_cycle(cyc);
            out.push_back(std::move(cyc));
        }
    return out;
}

GluingComplex make_complex(std::vector<PlanarPolygon> polygons, std::vector<EdgePairing> pairings) {
    GluingComplex c;
    c.polygons = std::move(polygons);
    c.pairings = std::move(pairings);
    for (size_t i = 0; i < c.polygons.size(); ++i) {
        const auto& p = c.polygons[i];
        if (p.bounded && p.vertices.size() < 3)
            throw Error(ErrorCode::StructuralError, "bounded polygon with fewer than 3 vertices");
    }
    c.cycles = vertex_cycles(c);
    return c;
}

GluingComplex build_grid_complex(const PiecewiseField& pw) {
    const GridSpec& g = pw.grid;
    g.validate();
    const int m = g.cellsPerSide;
    std::vector<PlanarPolygon> polys;
    polys.reserve(m * m + 1);
    for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix < m; ++ix) {
            cplx mu = pw.at(ix, iy);
            if (!(std::abs(mu) < 1.0 - 1e-12))
                throw Error(ErrorCode::DegenerateGeometry, "degenerate parallelogram, |mu| = 1");
            auto a = [mu](cplx z) { return z + mu * std::conj(z); };
            PlanarPolygon P;
            P.id = g.cellIndex(ix, iy);
            P.vertices = {a(g.corner(ix, iy)), a(g.corner(ix + 1, iy)), a(g.corner(ix + 1, iy + 1)),
                          a(g.corner(ix, iy + 1))};
            polys.push_back(std::move(P));
        }

    PlanarPolygon ext;
    ext.id = m * m;
    ext.bounded = false;
    for (int j = 0; j <= m; ++j) ext.vertices.push_back(g.corner(0, j));
    for (int i = 1; i <= m; ++i) ext.vertices.push_back(g.corner(i, m));
    for (int j = m - 1; j >= 0; --j) ext.vertices.push_back(g.corner(m, j));
    for (int i = m - 1; i >= 1; --i) ext.vertices.push_back(g.corner(i, 0));
    polys.push_back(ext);
    const int E = m * m;

    std::vector<EdgePairing> prs;
    auto V = [&](int ix, int iy, int k) { return polys[g.cellIndex(ix, iy)].vertices[k]; };
    for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix + 1 < m; ++ix) {
            int j = g.cellIndex(ix, iy), k = g.cellIndex(ix + 1, iy);
            prs.push_back({{j, 1}, {k, 3},
                           AffineMap::through(V(ix, iy, 1), V(ix, iy, 2), V(ix + 1, iy, 0), V(ix + 1, iy, 3))});
        }
    for (int iy = 0; iy + 1 < m; ++iy)
        for (int ix = 0; ix < m; ++ix) {
            int j = g.cellIndex(ix, iy), k = g.cellIndex(ix, iy + 1);
            prs.push_back({{j, 2}, {k, 0},
                           AffineMap::through(V(ix, iy, 2), V(ix, iy, 3), V(ix, iy + 1, 1), V(ix, iy + 1, 0))});
        }
    for (int j = 0; j < m; ++j)  // left side
        prs.push_back({{E, j}, {g.cellIndex(0, j), 3},
                       AffineMap::through(g.corner(0, j), g.corner(0, j + 1), V(0, j, 0), V(0, j, 3))});
    for (int i = 0; i < m; ++i)  // top
        prs.push_back({{E, m + i}, {g.cellIndex(i, m - 1), 2},
                       AffineMap::through(g.corner(i, m), g.corner(i + 1, m), V(i, m - 1, 3), V(i, m - 1, 2))});
    for (int j = m - 1; j >= 0; --j)  // right side, walking down
        prs.push_back({{E, 2 * m + (m - 1 - j)}, {g.cellIndex(m - 1, j), 1},
                       AffineMap::through(g.corner(m, j + 1), g.corner(m, j), V(m - 1, j, 2), V(m - 1, j, 1))});
    for (int i = m - 1; i >= 0; --i)  // bottom, walking left
        prs.push_back({{E, 3 * m + (m - 1 - i)}, {g.cellIndex(i, 0), 0},
                       AffineMap::through(g.corner(i + 1, 0), g.corner(i, 0), V(i, 0, 1), V(i, 0, 0))});

    GluingComplex c = make_complex(std::move(polys), std::move(prs));
    c.grid = g;
    c.cellMu = pw.cellValues;
    c.exteriorPolygon = E;

    // principal branch at lattice corners
    for (auto& cyc : c.cycles) {
        if (std::abs(cyc.signedAngle - kTwoPi) < kPi) cyc.residue = principal_residue(cyc);
    }

    std::map<std::pair<int, int>, int> flagCycle;
    for (size_t ci = 0; ci < c.cycles.size(); ++ci)
        for (const auto& f : c.cycles[ci].flags) flagCycle[{f.polygon, f.vertex}] = static_cast<int>(ci);
    c.sourceCorrespondence.assign(g.cornerCount(), -1);
    for (int j = 0; j <= m; ++j)
        for (int i = 0; i <= m; ++i) {
            int poly, vert;
            if (i < m && j < m) { poly = g.cellIndex(i, j); vert = 0; }
            else if (i > 0 && j < m) { poly = g.cellIndex(i - 1, j); vert = 1; }
            else if (i < m) { poly = g.cellIndex(i, j - 1); vert = 3; }
            else { poly = g.cellIndex(i - 1, j - 1); vert = 2; }
            int ci = flagCycle.at({poly, vert});
            c.sourceCorrespondence[g.cornerIndex(i, j)] = ci;
            c.cycles[ci].corner = g.cornerIndex(i, j);
        }

    VertexCycle inf;
    inf.infinite = true;
    inf.totalAngle = kTwoPi;
    inf.dilation = 1.0;
    inf.signedAngle = -kTwoPi;
    inf.monodromyFactor = 1.0;
    inf.residue = -2.0;
    c.infinityCycle = inf;
    return c;
}

CornerMonodromy corner_monodromy(cplx M0, cplx M1, cplx M2, cplx M3) {
    for (cplx M : {M0, M1, M2, M3})
        if (!(std::abs(M) < 1.0)) throw Error(ErrorCode::InvalidArgument, "quadrant value |M| >= 1");
    auto L = [](cplx M) { return (1.0 + M) / (1.0 - M); };
    cplx Lam = L(M1) * L(M3) / (L(M0) * L(M2));
    cplx lg = std::log(Lam);
    return {Lam, lg, lg / (kTwoPi * kI)};
}

LocalModelChart local_model_chart(const GluingComplex& complex, const VertexCycle& cycle) {
    if (cycle.infinite) throw Error(ErrorCode::InvalidArgument, "local model needs a finite vertex");
    if (!(cycle.totalAngle > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "zero total angle");
    if (!(cycle.residue.real() > -1.0))
        throw Error(ErrorCode::UnsupportedResidue, "local model needs Re res > -1");
    LocalModelChart ch;
    ch.bandVector = std::log(cycle.dilation) + kI * cycle.totalAngle;
    ch.alpha = ch.bandVector / (kTwoPi * kI);
    ch.closingExponent = 1.0 / ch.alpha;
    const Flag& f0 = cycle.flags.front();
    const auto& P0 = complex.polygons[f0.polygon];
    ch.vertex = P0.vertices[f0.vertex];
    ch.baseAngle = std::arg(P0.vertices[(f0.vertex + 1) % P0.vertices.size()] - ch.vertex);
    AffineMap acc;  // maps frame of flag k to frame of flag 0
    double start = 0.0;
    auto table = slot_table(complex);
    for (size_t k = 0; k < cycle.flags.size(); ++k) {
        const Flag& f = cycle.flags[k];
        ch.placements.push_back(acc);
        ch.startAngles.push_back(start);
        ch.sectorAngles.push_back(cycle.sectorAngles[k]);
        start += cycle.sectorAngles[k];
        const auto& poly = complex.polygons[f.polygon];
        const int n = static_cast<int>(poly.vertices.size());
        const SlotInfo& si = table[f.polygon][(f.vertex + n - 1) % n];
        const EdgePairing& pr = complex.pairings[si.pairing];
        AffineMap s = si.isFirst ? pr.map : pr.map.inverse();
        acc = acc.after(s.inverse());
    }
    return ch;
}

cplx LocalModelChart::developed(int flag, cplx p) const {
    cplx q = placements[flag](p) - vertex;
    if (q == 0.0) throw Error(ErrorCode::InvalidArgument, "point at the vertex");
    double d = std::arg(q) - baseAngle - startAngles[flag];
    d = std::fmod(d, kTwoPi);
    if (d < -1e-9) d += kTwoPi;
    if (d >= kTwoPi - 1e-9) d -= kTwoPi;
    return cplx(std::log(std::abs(q)), startAngles[flag] + d);
}

cplx LocalModelChart::toRiemann(int flag, cplx p) const {
    return std::exp(developed(flag, p) * closingExponent);
}

}  // namespace simsurf

#include "simsurf/fixtures.hpp"

#include <cmath>

namespace simsurf::fixtures {

GluingComplex triangle_complex() {
    const cplx A{-1.0, 0.0}, B{1.0, 0.0};
    const cplx C1{0.0, std::sqrt(3.0)}, C2{0.0, -1.0};
    PlanarPolygon P1{0, {A, B, C1}, true, {}};
    PlanarPolygon P2{1, {A, C2, B}, true, {}};
    std::vector<EdgePairing> prs = {
        {{0, 0}, {1, 2}, AffineMap::through(A, B, A, B)},
        {{0, 1}, {1, 1}, AffineMap::through(B, C1, B, C2)},
        {{0, 2}, {1, 0}, AffineMap::through(C1, A, C2, A)},
    };
    return make_complex({P1, P2}, prs);
}

ChristoffelSymbol triangle_symbol(const GluingComplex& c) {
    ChristoffelSymbol s;
    s.poles = {{-1.0, c.cycles[c.cycleOf(0, 0)].residue}, {1.0, c.cycles[c.cycleOf(0, 1)].residue}};
    s.impliedInfinityResidue = c.cycles[c.cycleOf(0, 2)].residue;
    return s;
}

ChristoffelSymbol triangle_symbol() { return triangle_symbol(triangle_complex()); }

GluingComplex two_triangle_sphere() {
    const cplx p{0.0, 0.0};
    const cplx q1{1.0, 0.0}, r1 = std::polar(1.0, kPi / 3.0);
    const cplx q2{1.0, 0.0}, r2 = std::polar(0.5, kPi / 6.0);
    PlanarPolygon T1{0, {p, q1, r1}, true, {}};
    PlanarPolygon T2{1, {p, q2, r2}, true, {}};
    std::vector<EdgePairing> prs = {
        {{0, 2}, {1, 0}, AffineMap::through(r1, p, q2, p)},
        {{1, 2}, {0, 0}, AffineMap::through(r2, p, q1, p)},
        {{0, 1}, {1, 1}, AffineMap::through(q1, r1, r2, q2)},
    };
    return make_complex({T1, T2}, prs);
}

BeltramiField bump(double amplitude, double radius) {
    return BeltramiField::smooth_bump(amplitude, 0.0, radius, BumpProfile::Tensor);
}

BeltramiField xy_jet(double eps) {
    return BeltramiField::smooth_bump(eps, 0.0, 1.0, BumpProfile::MixedJet);
}

PiecewiseField single_cell(cplx c) {
    GridSpec g{1.5, 3, 0.0};
    PiecewiseField pw(g);
    pw.at(1, 1) = c;
    return pw;
}

StripConstants strip_constants(double kappa, int periods) {
    GridSpec g{double(periods), 2 * periods, 0.0};  // unit cells on [-periods, periods]
    PiecewiseField pw = average_field(BeltramiField::vertical_strips(kappa, 1.0), g);
    auto dil = [](cplx m) { return ((1.0 + m) / (1.0 - m)).real(); };
    double slope = 0.0;
    cplx mean = 0.0;
    for (int ix = 0; ix < g.cellsPerSide; ++ix) {
        slope += dil(pw.at(ix, 0));
        mean += pw.at(ix, 0);
    }
    slope /= g.cellsPerSide;
    mean /= double(g.cellsPerSide);
    return {dil(kappa), slope, dil(mean)};
}

}  // namespace simsurf::fixtures

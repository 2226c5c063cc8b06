#pragma once

#include "simsurf/christoffel.hpp"
#include "simsurf/fields.hpp"
#include "simsurf/gluing.hpp"

namespace simsurf::fixtures {

// Equilateral triangle A=-1, B=1, C=i sqrt3 glued to the right isosceles triangle A=-1, C=-i, B=1.
GluingComplex triangle_complex();
// Uniformized symbol: A at -1, B at 1, C at infinity.
ChristoffelSymbol triangle_symbol(const GluingComplex& c);
ChristoffelSymbol triangle_symbol();

// Two triangles sharing a vertex p with angles tau/6 and tau/12, dilation product 2 around p.
GluingComplex two_triangle_sphere();

// Smooth tensor bump of the default scenarios.
BeltramiField bump(double amplitude = 0.3, double radius = 1.0);
// mu = eps*x*y*beta(x)*beta(y), jet eps*x*y at 0.
BeltramiField xy_jet(double eps = 0.2);
// single nonzero cell c in the centre of a 3x3 grid of half width 1.5
PiecewiseField single_cell(cplx c);

struct StripConstants {
    double K;        // dilatation inside a strip
    double Kprime;   // slope of the coarse-scale limit of g
    double Ksecond;  // dilatation of the averaged coefficient
};
// computed from the discretized strips field (unit cells aligned with the strips)
StripConstants strip_constants(double kappa, int periods = 4);

}  // namespace simsurf::fixtures

#pragma once

#include "simsurf/common.hpp"

#include <functional>
#include <vector>

namespace simsurf {

struct Pole {
    cplx z;
    cplx res;
};

struct ChristoffelSymbol {
    std::vector<Pole> poles;
    cplx impliedInfinityResidue{-2.0, 0.0};

    cplx finiteResidueSum() const;
};

// sum res_k / (z - z_k); throws PoleProximity within 1e-14 (1+|z|) of a pole
cplx evaluate(const ChristoffelSymbol& sym, cplx z);
// sum -res_k / (z - z_k)^2
cplx evaluate_derivative(const ChristoffelSymbol& sym, cplx z);

cplx residue_sum_defect(const ChristoffelSymbol& sym);

// zeta2 = psi' * zeta1(psi) + psi''/psi'
ChristoffelSymbol pullback(const ChristoffelSymbol& sym, const AffineMap& psi);
// psi(u) = 1/u; a pole at 0 becomes the infinity residue and the infinity residue becomes a pole at 0
ChristoffelSymbol pullback_inversion(const ChristoffelSymbol& sym);

// phi''/phi' by 5-point central differences
cplx n_operator(const std::function<cplx(cplx)>& phi, cplx z, double step);

struct NormalForm {
    int poleIndex = -1;
    cplx residue{};
    cplx alpha{1.0, 0.0};
    std::vector<cplx> coefficients;  // w(z) = sum_{n>=1} c_n (z - z0)^n, c_1 = 1
    double tailMagnitude = 0.0;

    cplx evaluate(cplx dz) const;
    cplx derivative(cplx dz) const;
    cplx second(cplx dz) const;
};

// zeta = res/z + sum_n regular[n] z^n
NormalForm normal_form_from_laurent(cplx res, const std::vector<cplx>& regular, int order = 8);
NormalForm normal_form_series(const ChristoffelSymbol& sym, int poleIndex, int order = 8);

struct SampledSymbol {
    cplx origin{};  // lower-left node
    double spacing = 1.0;
    int nx = 0, ny = 0;
    std::vector<cplx> values;  // row-major, row 0 at origin.imag()

    cplx node(int i, int j) const { return origin + cplx(i * spacing, j * spacing); }
    cplx& at(int i, int j) { return values[j * nx + i]; }
    cplx at(int i, int j) const { return values[j * nx + i]; }
};

SampledSymbol sample_symbol(const std::function<cplx(cplx)>& zeta, cplx origin, double spacing,
                            int nx, int ny);
// dbar zeta per node (central inside, one-sided on the border)
SampledSymbol curvature_form(const SampledSymbol& samples);

}  // namespace simsurf

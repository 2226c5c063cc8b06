#include "simsurf/christoffel.hpp"

#include <cmath>

namespace simsurf {

cplx ChristoffelSymbol::finiteResidueSum() const {
    cplx s = 0.0;
    for (const auto& p : poles) s += p.res;
    return s;
}

cplx evaluate(const ChristoffelSymbol& sym, cplx z) {
    const double tol = 1e-14 * (1.0 + std::abs(z));
    cplx s = 0.0;
    for (const auto& p : sym.poles) {
        cplx d = z - p.z;
        if (std::abs(d) <= tol) throw Error(ErrorCode::PoleProximity, "evaluation at a pole");
        s += p.res / d;
    }
    return s;
}

cplx evaluate_derivative(const ChristoffelSymbol& sym, cplx z) {
    const double tol = 1e-14 * (1.0 + std::abs(z));
    cplx s = 0.0;
    for (const auto& p : sym.poles) {
        cplx d = z - p.z;
        if (std::abs(d) <= tol) throw Error(ErrorCode::PoleProximity, "evaluation at a pole");
        s -= p.res / (d * d);
    }
    return s;
}

cplx residue_sum_defect(const ChristoffelSymbol& sym) {
    return sym.finiteResidueSum() + sym.impliedInfinityResidue + 2.0;
}

ChristoffelSymbol pullback(const ChristoffelSymbol& sym, const AffineMap& psi) {
    if (psi.a == 0.0) throw Error(ErrorCode::InvalidArgument, "affine pullback needs a != 0");
    ChristoffelSymbol out;
    out.impliedInfinityResidue = sym.impliedInfinityResidue;
    AffineMap inv = psi.inverse();
    for (const auto& p : sym.poles) out.poles.push_back({inv(p.z), p.res});
    return out;
}

ChristoffelSymbol pullback_inversion(const ChristoffelSymbol& sym) {
    ChristoffelSymbol out;
    out.impliedInfinityResidue = 0.0;
    cplx atInfinity = -2.0 - sym.finiteResidueSum();
    for (const auto& p : sym.poles) {
        if (std::abs(p.z) <= 1e-14) {
            out.impliedInfinityResidue = p.res;
            continue;
        }
        out.poles.push_back({1.0 / p.z, p.res});
    }
    if (std::abs(atInfinity) > 1e-15) out.poles.push_back({0.0, atInfinity});
    return out;
}

cplx n_operator(const std::function<cplx(cplx)>& phi, cplx z, double h) {
    cplx f2 = phi(z + 2.0 * h), f1 = phi(z + h), f0 = phi(z), fm1 = phi(z - h), fm2 = phi(z - 2.0 * h);
    cplx d1 = (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h);
    cplx d2 = (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    if (std::abs(d1) < 1e-14 * (1.0 + std::abs(f0)))
        throw Error(ErrorCode::DegenerateGeometry, "phi'(z) vanishes");
    return d2 / d1;
}

cplx NormalForm::evaluate(cplx dz) const {
    cplx s = 0.0;
    for (size_t n = coefficients.size(); n-- > 0;) s = (s + coefficients[n]) * dz;
    return s;
}

cplx NormalForm::derivative(cplx dz) const {
    cplx s = 0.0;
    for (size_t n = coefficients.size(); n-- > 0;) s = s * dz + double(n + 1) * coefficients[n];
    return s;
}

cplx NormalForm::second(cplx dz) const {
    cplx s = 0.0;
    for (size_t n = coefficients.size(); n-- > 1;) s = s * dz + double((n + 1) * n) * coefficients[n];
    return s;
}

NormalForm normal_form_from_laurent(cplx r, const std::vector<cplx>& regular, int order) {
    if (order < 1) throw Error(ErrorCode::InvalidArgument, "normal form order must be >= 1");
    for (int n = 1; n <= order + 2; ++n)
        if (std::abs(r + double(n)) < 1e-12)
            throw Error(ErrorCode::UnsupportedResidue, "residue is a negative integer");
    const int N = order;  // w up to z^N needs T up to z^{N-1}
    auto a = [&](int k) { return k < static_cast<int>(regular.size()) ? regular[k] : cplx{}; };

    std::vector<cplx> b(N, 0.0);  // exp(int regular)
    b[0] = 1.0;
    for (int n = 1; n < N; ++n) {
        cplx s = 0.0;
        for (int k = 0; k < n; ++k) s += a(k) * b[n - 1 - k];
        b[n] = s / double(n);
    }
    std::vector<cplx> T(N);  // (r+1) * sum b_n z^n / (r+n+1)
    for (int n = 0; n < N; ++n) T[n] = (r + 1.0) * b[n] / (r + double(n) + 1.0);
    const cplx p = 1.0 / (r + 1.0);
    std::vector<cplx> Q(N, 0.0);  // T^p
    Q[0] = 1.0;
    for (int n = 1; n < N; ++n) {
        cplx s = 0.0;
        for (int k = 1; k <= n; ++k) s += ((p + 1.0) * double(k) - double(n)) * T[k] * Q[n - k];
        Q[n] = s / double(n);
    }
    NormalForm nf;
    nf.residue = r;
    nf.alpha = r + 1.0;
    nf.coefficients = Q;  // c_{n+1} = Q_n
    nf.tailMagnitude = std::abs(Q.back());
    return nf;
}

NormalForm normal_form_series(const ChristoffelSymbol& sym, int poleIndex, int order) {
    if (poleIndex < 0 || poleIndex >= static_cast<int>(sym.poles.size()))
        throw Error(ErrorCode::InvalidArgument, "pole index out of range");
    const cplx z0 = sym.poles[poleIndex].z;
    std::vector<cplx> reg(order, 0.0);
    for (size_t k = 0; k < sym.poles.size(); ++k) {
        if (static_cast<int>(k) == poleIndex) continue;
        // r/(z0 + u - zk) = -r/d * sum (u/d)^n with d = zk - z0
        cplx d = sym.poles[k].z - z0, r = sym.poles[k].res;
        cplx term = -r / d;
        for (int n = 0; n < order; ++n) {
            reg[n] += term;
            term /= d;
        }
    }
    NormalForm nf = normal_form_from_laurent(sym.poles[poleIndex].res, reg, order);
    nf.poleIndex = poleIndex;
    return nf;
}

SampledSymbol sample_symbol(const std::function<cplx(cplx)>& zeta, cplx origin, double spacing,
                            int nx, int ny) {
    SampledSymbol s;
    s.origin = origin;
    s.spacing = spacing;
    s.nx = nx;
    s.ny = ny;
    s.values.resize(size_t(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) s.at(i, j) = zeta(s.node(i, j));
    return s;
}

SampledSymbol curvature_form(const SampledSymbol& in) {
    SampledSymbol out = in;
    const double h = in.spacing;
    // central inside, second-order one-sided on the border (first order if only 2 nodes)
    auto diff = [h](int n, int k, auto&& f) {
        if (n < 2) return cplx{};
        if (n == 2) return (f(1) - f(0)) / h;
        if (k == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
        if (k == n - 1) return (3.0 * f(k) - 4.0 * f(k - 1) + f(k - 2)) / (2.0 * h);
        return (f(k + 1) - f(k - 1)) / (2.0 * h);
    };
    auto dx = [&](int i, int j) { return diff(in.nx, i, [&](int a) { return in.at(a, j); }); };
    auto dy = [&](int i, int j) { return diff(in.ny, j, [&](int b) { return in.at(i, b); }); };
    for (int j = 0; j < in.ny; ++j)
        for (int i = 0; i < in.nx; ++i) out.at(i, j) = 0.5 * (dx(i, j) + kI * dy(i, j));
    return out;
}

}  // namespace simsurf

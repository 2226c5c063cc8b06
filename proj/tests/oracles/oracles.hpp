#pragma once

// Brute-force references for the test suite. Deliberately slow, and written
// against std::complex only so nothing is shared with the library.

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

struct PoleRes {
    cd z;
    cd res;
};

struct OracleReport {
    std::string quantity;
    cd oracleValue;
    cd mainValue;
    double absDefect = 0.0;
    double relDefect = 0.0;
};
OracleReport report(const std::string& quantity, cd oracleValue, cd mainValue);

// composite Simpson of sum res/(z - z_k) along the polyline
cd quadrature_transport(const std::vector<PoleRes>& poles, const std::vector<cd>& path, bool closed,
                        int panelsPerSegment);

// (1/2 pi i) of the contour integral on a circle, trapezoid rule
cd residue_recovery(const std::vector<PoleRes>& poles, int poleIndex, double radius, int samples);

// explicit straightening of the four-quadrant corner model
struct QuadrantModel {
    std::array<cd, 4> M;
    std::array<cd, 4> g;  // gluing factors per quadrant
    cd tau;               // closing jump
    cd alpha;             // 2 pi i / (2 pi i + log tau)

    explicit QuadrantModel(const std::array<cd, 4>& M);
    // quadrant map at angle theta in [0, 2 pi], radius r
    cd lifted(double r, double theta) const;
    cd operator()(cd z) const;
};
cd quadrant_model(const std::array<cd, 4>& M, cd z);
// exp of the continuous log increment of the lifted model along a ccw circle
cd quadrant_loop_factor(const std::array<cd, 4>& M, double r, int samples);

struct StripValues {
    double K, Kprime, Ksecond;
};
StripValues strip_constants(double kappa);
// f(x+iy) = g(x) + iy, g(0) = 0, g' = 1 on even strips and K on odd ones
cd strip_solution(double kappa, cd point);

// mean of fn over the rectangle, 3-point Gauss on panels x panels subcells
cd cell_average(const std::function<cd(cd)>& fn, double x0, double x1, double y0, double y1,
                int panels = 64);

// int_{|s|<R} g(s)/(z - s) dA by polar midpoint quadrature
cd disk_convolution(const std::function<cd(cd)>& g, double R, cd z, int nr, int nt);

// phi and phi' at z1 for phi(z0) = 0, phi'(z0) = 1, classical RK4 on phi'' = zeta phi'
std::pair<cd, cd> develop_rk4(const std::vector<PoleRes>& poles, cd z0, cd z1, int steps);

// v' = -zeta(gamma) gamma' v along the polyline
cd parallel_transport_rk4(const std::vector<PoleRes>& poles, const std::vector<cd>& path, bool closed,
                          cd v0, int stepsPerSegment);

// Taylor coefficients c_1..c_order of w = z (T(z))^{1/(res+1)},
// T = (res+1) sum b_n z^n/(res+n+1), b_n = c^n/n!, via Cauchy integrals
std::vector<cd> normal_form_const(cd res, cd c, int order);

// k-th Laurent coefficient at W = 0 of the pulled-back symbol in the coordinate W = w(z)
// around z0, sampled on the z-circle of the given radius
cd pullback_laurent(const std::function<cd(cd)>& zeta, const std::function<cd(cd)>& w,
                    const std::function<cd(cd)>& wprime, const std::function<cd(cd)>& wsecond, cd z0,
                    double radius, int samples, int k);

// closed-form geodesic of res/z: preimage of w0 + t w0' under w = z^{res+1}
cd power_geodesic(cd res, cd z0, cd v0, double t);

// -(1/2 pi)(2 mu_xy/(1-mu^2) + 4 mu mu_x mu_y/(1-mu^2)^2) with plain central differences
cd limit_density_fd(const std::function<cd(cd)>& mu, cd c, double h);

}  // namespace oracle

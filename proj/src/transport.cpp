#include "simsurf/transport.hpp"

#include "simsurf/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace simsurf {

namespace {

double point_segment_distance(cplx z, cplx p, cplx q) {
    cplx d = q - p;
    double L2 = std::norm(d);
    if (L2 == 0.0) return std::abs(z - p);
    double t = std::clamp(((z - p) * std::conj(d)).real() / L2, 0.0, 1.0);
    return std::abs(z - (p + t * d));
}

// Log((q - z)/(p - z)) along the straight segment, split until each piece subtends < pi/2
cplx log_increment(cplx p, cplx q, cplx z, int depth = 0) {
    cplx ratio = (q - z) / (p - z);
    if (std::abs(std::arg(ratio)) < 0.5 * kPi || depth > 40) return std::log(ratio);
    cplx m = 0.5 * (p + q);
    return log_increment(p, m, z, depth + 1) + log_increment(m, q, z, depth + 1);
}

}  // namespace

PolylinePath PolylinePath::reversed() const {
    PolylinePath r = *this;
    std::reverse(r.vertices.begin(), r.vertices.end());
    return r;
}

double scene_diameter(const ChristoffelSymbol& sym, const std::vector<cplx>& extra) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto add = [&](cplx z) {
        x0 = std::min(x0, z.real());
        x1 = std::max(x1, z.real());
        y0 = std::min(y0, z.imag());
        y1 = std::max(y1, z.imag());
    };
    for (const auto& p : sym.poles) add(p.z);
    for (cplx z : extra) add(z);
    if (!(x1 >= x0)) return 1.0;
    double d = std::hypot(x1 - x0, y1 - y0);
    return d > 0.0 ? d : 1.0;
}

TransportResult segment_log_integral(const ChristoffelSymbol& sym, const PolylinePath& path,
                                     double poleClearance) {
    TransportResult r;
    r.windingRecord.assign(sym.poles.size(), 0);
    const double clearance =
        poleClearance < 0.0 ? 1e-9 * scene_diameter(sym, path.vertices) : poleClearance;
    for (size_t s = 0; s < path.segmentCount(); ++s) {
        cplx p = path.segStart(s), q = path.segEnd(s);
        if (p == q) continue;
        for (size_t k = 0; k < sym.poles.size(); ++k) {
            const Pole& P = sym.poles[k];
            if (point_segment_distance(P.z, p, q) < clearance)
                throw Error(ErrorCode::PoleProximity, "path segment passes through a pole");
            cplx inc = log_increment(p, q, P.z);
            r.tau += P.res * inc;
            double jump = inc.imag() - (std::arg(q - P.z) - std::arg(p - P.z));
            r.windingRecord[k] += static_cast<int>(std::lround(jump / kTwoPi));
        }
    }
    r.holonomyFactor = std::exp(-r.tau);
    return r;
}

cplx parallel_transport(const ChristoffelSymbol& sym, const PolylinePath& path, cplx v0,
                        double poleClearance) {
    return v0 * segment_log_integral(sym, path, poleClearance).holonomyFactor;
}

cplx line_integral(const std::function<cplx(cplx)>& zeta, const PolylinePath& path,
                   int piecesPerSegment) {
    const GaussRule& g = gauss_legendre(8);
    cplx acc = 0.0;
    for (size_t s = 0; s < path.segmentCount(); ++s) {
        cplx p = path.segStart(s), q = path.segEnd(s);
        for (int k = 0; k < piecesPerSegment; ++k) {
            cplx a = p + (q - p) * (double(k) / piecesPerSegment);
            cplx b = p + (q - p) * (double(k + 1) / piecesPerSegment);
            cplx mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (size_t i = 0; i < g.nodes.size(); ++i) acc += g.weights[i] * half * zeta(mid + half * g.nodes[i]);
        }
    }
    return acc;
}

ActivePoles ActivePoles::from(const ChristoffelSymbol& sym, double minResidue) {
    ActivePoles a;
    for (size_t k = 0; k < sym.poles.size(); ++k) {
        if (std::abs(sym.poles[k].res) <= minResidue) continue;
        a.z.push_back(sym.poles[k].z);
        a.res.push_back(sym.poles[k].res);
        a.source.push_back(static_cast<int>(k));
    }
    return a;
}

int ActivePoles::find(int poleIndex) const {
    for (size_t k = 0; k < source.size(); ++k)
        if (source[k] == poleIndex) return static_cast<int>(k);
    return -1;
}

namespace {

// weights W_i with sum W_i x_i^p = 1/(r+p+1), x = 0, 1/3, 2/3, 1
std::array<cplx, 4> tail_weights(cplx r) {
    const double x[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    cplx A[4][5];
    for (int p = 0; p < 4; ++p) {
        for (int i = 0; i < 4; ++i) A[p][i] = std::pow(x[i], p);
        A[p][4] = 1.0 / (r + double(p) + 1.0);
    }
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int rr = c + 1; rr < 4; ++rr)
            if (std::abs(A[rr][c]) > std::abs(A[piv][c])) piv = rr;
        for (int k = 0; k < 5; ++k) std::swap(A[c][k], A[piv][k]);
        for (int rr = 0; rr < 4; ++rr) {
            if (rr == c) continue;
            cplx f = A[rr][c] / A[c][c];
            for (int k = c; k < 5; ++k) A[rr][k] -= f * A[c][k];
        }
    }
    std::array<cplx, 4> w;
    for (int i = 0; i < 4; ++i) w[i] = A[i][4] / A[i][i];
    return w;
}

}  // namespace

SegmentDevelopment develop_segment(const ActivePoles& poles, cplx b, cplx e, int endActive,
                                   bool gradient, const DevelopOptions& opt) {
    SegmentDevelopment out;
    const size_t n = poles.size();
    if (gradient) out.dActive.assign(n, 0.0);
    const cplx delta = e - b;
    const double len = std::abs(delta);
    if (len == 0.0) {
        out.endFactor = 1.0;
        out.dEnd = 1.0;
        return out;
    }
    const int c = endActive;
    const cplx rc = c >= 0 ? poles.res[c] : cplx{};
    const bool singularEnd = c >= 0 && rc != 0.0;
    if (singularEnd && !(rc.real() > -1.0))
        throw Error(ErrorCode::NonIntegrable, "development into a pole with Re res <= -1");

    std::vector<cplx> invb(n);
    for (size_t k = 0; k < n; ++k) {
        if (static_cast<int>(k) == c) continue;
        cplx d = b - poles.z[k];
        if (std::abs(d) < opt.clearance) throw Error(ErrorCode::PoleProximity, "basepoint at a pole");
        invb[k] = 1.0 / d;
    }

    const GaussRule& g = gauss_legendre(16);
    cplx I = 0.0, dE = 0.0;
    std::vector<cplx>& dA = out.dActive;

    auto accumulate = [&](double t, cplx weight, bool withEndPower, double u) {
        cplx w = b + t * delta;
        cplx L = 0.0;
        for (size_t k = 0; k < n; ++k) {
            if (static_cast<int>(k) == c) continue;
            L += poles.res[k] * std::log((w - poles.z[k]) * invb[k]);
        }
        if (withEndPower) L += rc * std::log(u);
        cplx G = std::exp(L) * weight;
        I += G;
        if (gradient) {
            cplx s = 0.0;
            for (size_t k = 0; k < n; ++k) {
                if (static_cast<int>(k) == c) continue;
                cplx q = 1.0 / (w - poles.z[k]);
                dA[k] += G * poles.res[k] * (invb[k] - q);
                s += poles.res[k] * q;
            }
            dE += G * t * s;
        }
    };

    auto admissible = [&](double t0, double t1, bool ignoreEnd) {
        const double plen = len * (t1 - t0);
        cplx p = b + t0 * delta, q = b + t1 * delta;
        for (size_t k = 0; k < n; ++k) {
            if (static_cast<int>(k) == c) continue;
            double d = point_segment_distance(poles.z[k], p, q);
            if (d < opt.clearance) throw Error(ErrorCode::PoleProximity, "development path hits a pole");
            if (d < opt.eta * plen) return false;
        }
        if (singularEnd && !ignoreEnd && len * (1.0 - t1) < opt.eta * plen) return false;
        return true;
    };

    struct Panel {
        double t0, t1;
    };
    std::vector<Panel> stack{{0.0, 1.0}};
    int panels = 0;
    while (!stack.empty()) {
        Panel P = stack.back();
        stack.pop_back();
        if (++panels > opt.maxPanels)
            throw Error(ErrorCode::QuadratureFailure, "development needs too many panels");
        const double half = 0.5 * (P.t1 - P.t0), mid = P.t0 + half;
        if (singularEnd && P.t1 == 1.0 && (P.t1 - P.t0) <= opt.tailLength && admissible(P.t0, P.t1, true)) {
            const double h = P.t1 - P.t0;
            auto W = tail_weights(rc);
            cplx scale = std::exp((rc + 1.0) * std::log(h));
            const double x[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
            for (int i = 0; i < 4; ++i) accumulate(1.0 - h * x[i], W[i] * scale, false, 0.0);
            continue;
        }
        if (admissible(P.t0, P.t1, false)) {
            for (size_t i = 0; i < g.nodes.size(); ++i) {
                double t = mid + half * g.nodes[i];
                double u = (1.0 - P.t1) + half * (1.0 - g.nodes[i]);
                accumulate(t, g.weights[i] * half, singularEnd, u);
            }
            continue;
        }
        stack.push_back({mid, P.t1});
        stack.push_back({P.t0, mid});
    }
    out.panels = panels;
    out.value = delta * I;
    if (gradient) {
        for (size_t k = 0; k < n; ++k) dA[k] *= delta;
        out.dEnd = I + delta * dE;
        if (c >= 0) dA[c] = out.dEnd;
    }
    if (c < 0) {
        cplx L = 0.0;
        for (size_t k = 0; k < n; ++k) L += poles.res[k] * std::log((e - poles.z[k]) * invb[k]);
        out.endFactor = std::exp(L);
    }
    return out;
}

namespace {

int pole_at(const ChristoffelSymbol& sym, cplx z) {
    for (size_t k = 0; k < sym.poles.size(); ++k)
        if (std::abs(sym.poles[k].z - z) <= 1e-12 * (1.0 + std::abs(z))) return static_cast<int>(k);
    return -1;
}

}  // namespace

DevelopedChart develop_chart(const ChristoffelSymbol& sym, cplx z0, cplx germValue, cplx germDeriv,
                             const PolylinePath& path, const DevelopOptions& opt) {
    if (germDeriv == 0.0) throw Error(ErrorCode::InvalidArgument, "germ derivative must be nonzero");
    DevelopedChart ch;
    ch.z0 = z0;
    ch.germValue = germValue;
    ch.germDeriv = germDeriv;
    ch.path = path;
    if (path.vertices.empty() || std::abs(path.vertices.front() - z0) > 1e-12 * (1.0 + std::abs(z0))) {
        ch.path.vertices.insert(ch.path.vertices.begin(), z0);
    }
    ActivePoles ap = ActivePoles::from(sym);
    cplx phi = germValue, dphi = germDeriv;
    ch.values.push_back(phi);
    ch.derivatives.push_back(dphi);
    const auto& V = ch.path.vertices;
    for (size_t i = 0; i + 1 < V.size(); ++i) {
        cplx b = V[i], e = V[i + 1];
        int pk = pole_at(sym, e);
        int endActive = -1;
        if (pk >= 0) {
            if (i + 2 != V.size())
                throw Error(ErrorCode::PoleProximity, "only the last path vertex may be a pole");
            if (!(sym.poles[pk].res.real() > -1.0))
                throw Error(ErrorCode::NonIntegrable, "terminal pole has Re res <= -1");
            endActive = ap.find(pk);
            e = sym.poles[pk].z;
        }
        SegmentDevelopment sd = develop_segment(ap, b, e, endActive, false, opt);
        phi += dphi * sd.value;
        ch.values.push_back(phi);
        if (pk >= 0) {
            ch.restingPlace = phi;
            ch.terminalPole = pk;
            if (endActive >= 0) {
                ch.derivatives.push_back(cplx(std::numeric_limits<double>::quiet_NaN(), 0.0));
            } else {
                dphi *= sd.endFactor;
                ch.derivatives.push_back(dphi);
            }
        } else {
            dphi *= sd.endFactor;
            ch.derivatives.push_back(dphi);
        }
    }
    return ch;
}

std::pair<cplx, cplx> develop_point(const ChristoffelSymbol& sym, cplx z0, cplx germValue,
                                    cplx germDeriv, cplx z, const DevelopOptions& opt) {
    ActivePoles ap = ActivePoles::from(sym);
    SegmentDevelopment sd = develop_segment(ap, z0, z, -1, false, opt);
    return {germValue + germDeriv * sd.value, germDeriv * sd.endFactor};
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::Captured: return "captured";
        case Termination::DomainExit: return "domain-exit";
        case Termination::MaxTime: return "max-time";
    }
    return "?";
}

GeodesicTrace trace_geodesic(const ChristoffelSymbol& sym, cplx z0, cplx v0, double maxTime,
                             double tol, const GeodesicOptions& opt) {
    if (v0 == 0.0) throw Error(ErrorCode::InvalidArgument, "initial velocity must be nonzero");
    evaluate(sym, z0);  // rejects a start at a pole
    const double diam = scene_diameter(sym, {z0});
    const double capture = opt.captureRadius < 0.0 ? 1e-4 * diam : opt.captureRadius;
    cplx centre = z0;
    if (!sym.poles.empty()) {
        centre = 0.0;
        for (const auto& p : sym.poles) centre += p.z;
        centre /= double(sym.poles.size());
    }
    const double domain = opt.domainRadius < 0.0 ? 20.0 * diam + std::abs(z0 - centre) : opt.domainRadius;

    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    struct State {
        cplx z, v;
    };
    auto rhs = [&](const State& s) -> State { return {s.v, -evaluate(sym, s.z) * s.v * s.v}; };
    auto axpy = [](const State& s, std::initializer_list<std::pair<double, const State*>> terms, double h) {
        State r = s;
        for (auto& [c, k] : terms) {
            r.z += h * c * k->z;
            r.v += h * c * k->v;
        }
        return r;
    };

    GeodesicTrace tr;
    State y{z0, v0};
    double t = 0.0;
    double h = opt.initialStep;
    tr.path.vertices.push_back(z0);
    tr.times.push_back(0.0);
    tr.velocities.push_back(v0);
    double minWatch = std::abs(z0 - opt.watch);
    const double startWatch = minWatch;
    const double atol = tol * diam;

    State k1 = rhs(y);
    for (int step = 0; step < opt.maxSteps; ++step) {
        if (t >= maxTime) {
            tr.reason = Termination::MaxTime;
            return tr;
        }
        h = std::min(h, maxTime - t);
        State k2, k3, k4, k5, k6, k7, yn;
        bool poleHit = false;
        try {
            k2 = rhs(axpy(y, {{a21, &k1}}, h));
            k3 = rhs(axpy(y, {{a31, &k1}, {a32, &k2}}, h));
            k4 = rhs(axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h));
            k5 = rhs(axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h));
            k6 = rhs(axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h));
            yn = axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
            k7 = rhs(yn);
        } catch (const Error&) {
            poleHit = true;
        }
        double err = std::numeric_limits<double>::infinity();
        if (!poleHit) {
            cplx ez = h * (e1 * k1.z + e3 * k3.z + e4 * k4.z + e5 * k5.z + e6 * k6.z + e7 * k7.z);
            cplx ev = h * (e1 * k1.v + e3 * k3.v + e4 * k4.v + e5 * k5.v + e6 * k6.v + e7 * k7.v);
            double sz = atol + tol * std::max(std::abs(y.z), std::abs(yn.z));
            double sv = tol * std::max({std::abs(y.v), std::abs(yn.v), 1e-300});
            err = std::max(std::abs(ez) / sz, std::abs(ev) / sv);
        }
        if (!(err <= 1.0)) {
            h *= poleHit ? 0.25 : std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h < 1e-15 * std::max(1.0, t) || !std::isfinite(h))
                throw Error(ErrorCode::StepUnderflow, "geodesic step underflow");
            continue;
        }
        t += h;
        y = yn;
        k1 = k7;
        tr.path.vertices.push_back(y.z);
        tr.times.push_back(t);
        tr.velocities.push_back(y.v);
        h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));

        for (size_t k = 0; k < sym.poles.size(); ++k) {
            cplx d = sym.poles[k].z - y.z;
            if (std::abs(d) < capture && (std::conj(y.v) * d).real() > 0.0) {
                tr.reason = Termination::Captured;
                tr.capturedPole = static_cast<int>(k);
                return tr;
            }
        }
        if (std::abs(y.z - centre) > domain) {
            tr.reason = Termination::DomainExit;
            return tr;
        }
        if (opt.watchRadius > 0.0 || opt.leaveFactor > 0.0) {
            double dw = std::abs(y.z - opt.watch);
            if (opt.watchRadius > 0.0 && dw < opt.watchRadius) {
                tr.enteredWatch = true;
                tr.watchEntry = tr.path.vertices.size() - 1;
                tr.reason = Termination::MaxTime;
                return tr;
            }
            minWatch = std::min(minWatch, dw);
            if (opt.leaveFactor > 0.0 && dw > minWatch && dw > opt.leaveFactor * startWatch) {
                tr.reason = Termination::DomainExit;
                return tr;
            }
        }
    }
    tr.reason = Termination::MaxTime;
    return tr;
}

namespace {

struct LocalChart {
    cplx centre;
    cplx alpha{1.0, 0.0};
    NormalForm nf;
    bool identity = true;

    cplx w(cplx u) const { return identity ? u : nf.evaluate(u); }
    cplx dw(cplx u) const { return identity ? cplx(1.0) : nf.derivative(u); }
    cplx invert(cplx target) const {
        cplx u = target;
        if (identity) return u;
        for (int it = 0; it < 50; ++it) {
            cplx du = (w(u) - target) / dw(u);
            u -= du;
            if (std::abs(du) < 1e-15 * (std::abs(u) + 1e-300)) break;
        }
        return u;
    }
};

LocalChart local_chart(const ChristoffelSymbol& sym, cplx p) {
    LocalChart lc;
    lc.centre = p;
    int k = pole_at(sym, p);
    if (k < 0) return lc;
    lc.centre = sym.poles[k].z;
    lc.alpha = sym.poles[k].res + 1.0;
    if (sym.poles.size() > 1 || sym.poles[k].res != 0.0) {
        lc.nf = normal_form_series(sym, k, 12);
        lc.identity = false;
    }
    return lc;
}

}  // namespace

SaddleConnection shoot_saddle_connection(const ChristoffelSymbol& sym, cplx from, cplx initialDirection,
                                         cplx to, double tol) {
    if (initialDirection == 0.0) throw Error(ErrorCode::InvalidArgument, "launch direction is zero");
    LocalChart S = local_chart(sym, from), T = local_chart(sym, to);
    from = S.centre;
    to = T.centre;
    const double D = std::abs(to - from);
    double nearestT = D, nearestS = D;
    for (const auto& p : sym.poles) {
        double dT = std::abs(p.z - to), dS = std::abs(p.z - from);
        if (dT > 1e-12 * (1.0 + D)) nearestT = std::min(nearestT, dT);
        if (dS > 1e-12 * (1.0 + D)) nearestS = std::min(nearestS, dS);
    }
    const double delta = 1e-4 * nearestS;
    const cplx beta = 1.0 / S.alpha;
    const double speed = std::abs(std::exp(S.alpha * std::log(cplx(D))));
    const double diam = scene_diameter(sym, {from, to});

    auto launch = [&](double psi, cplx& z, cplx& v) {
        double L = (std::log(delta) + beta.imag() * psi) / beta.real();
        cplx logW(L, psi);
        cplx w = std::exp(logW * beta);
        cplx u = S.invert(w);
        z = from + u;
        double rho = std::exp(L);
        v = speed * w / (S.alpha * rho * S.dw(u));
    };

    GeodesicOptions gopt;
    gopt.watch = to;
    gopt.leaveFactor = 3.0;
    gopt.captureRadius = 1e-4 * diam;
    const double maxTime = 50.0;

    auto miss_of = [&](const GeodesicTrace& tr) {
        if (tr.reason == Termination::Captured && std::abs(tr.path.vertices.back() - to) <= gopt.captureRadius) {
            cplx u = tr.path.vertices.back() - to;
            cplx q = T.alpha * T.dw(u) * tr.velocities.back() / T.w(u);
            return q.imag() / std::abs(q) * std::abs(u);
        }
        size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < tr.path.vertices.size(); ++i) {
            double d = std::abs(tr.path.vertices[i] - to);
            if (d < bd) bd = d, best = i;
        }
        // flow from the nearest sample until the velocity is orthogonal to the offset
        cplx z = tr.path.vertices[best], v = tr.velocities[best];
        GeodesicOptions fine;
        fine.captureRadius = 1e-13 * diam;
        fine.domainRadius = 1e300;
        for (int it = 0; it < 12; ++it) {
            double s = ((to - z) * std::conj(v)).real() / std::norm(v);
            if (std::abs(s) * std::abs(v) < 1e-13 * D) break;
            const double sgn = s > 0.0 ? 1.0 : -1.0;
            try {
                GeodesicTrace sub = trace_geodesic(sym, z, sgn * v, std::abs(s), 1e-12, fine);
                z = sub.path.vertices.back();
                v = sgn * sub.velocities.back();
            } catch (const Error&) {
                break;
            }
        }
        cplx vh = v / std::abs(v);
        double c = cross(vh, to - z);
        double d = std::abs(to - z);
        return c == 0.0 ? d : std::copysign(d, c);
    };
    auto miss = [&](double psi) {
        cplx z, v;
        launch(psi, z, v);
        return miss_of(trace_geodesic(sym, z, v, maxTime, 1e-11, gopt));
    };

    cplx u0 = delta * initialDirection / std::abs(initialDirection);
    double psi0 = (S.alpha * std::log(S.w(u0))).imag();

    SaddleConnection out;
    double fa = miss(psi0);
    double a = psi0;
    double best = a, bestMiss = fa;
    int iters = 1;
    double b = a, fb = fa;
    bool bracketed = std::abs(fa) < tol * D;
    const double halfCone = kPi * S.alpha.real();
    for (double step = 0.01; !bracketed && step < halfCone; step *= 2.0) {
        for (double sgn : {1.0, -1.0}) {
            double c = psi0 + sgn * step;
            double fc = miss(c);
            ++iters;
            if (std::abs(fc) < std::abs(bestMiss)) best = c, bestMiss = fc;
            if (std::signbit(fc) != std::signbit(fa)) {
                b = c;
                fb = fc;
                bracketed = true;
                break;
            }
        }
    }
    if (!bracketed) throw Error(ErrorCode::NoConnection, "no sign change of the miss in the bracket");
    if (std::abs(fa) >= tol * D) {
        int side = 0;
        for (int it = 0; it < 100; ++it) {
            double c = b - fb * (b - a) / (fb - fa);
            double fc = miss(c);
            ++iters;
            if (std::abs(fc) < std::abs(bestMiss)) best = c, bestMiss = fc;
            if (std::abs(fc) < tol * D || std::abs(b - a) < 1e-15) break;
            if (std::signbit(fc) == std::signbit(fb)) {
                b = c;
                fb = fc;
                if (side == -1) fa *= 0.5;
                side = -1;
            } else {
                a = b;
                fa = fb;
                b = c;
                fb = fc;
                if (side == 1) fb *= 0.5;
                side = 1;
            }
        }
    }
    out.launchAngle = best;
    out.miss = bestMiss;
    out.iterations = iters;

    cplx z, v;
    launch(best, z, v);
    GeodesicTrace tr = trace_geodesic(sym, z, v, maxTime, 1e-11, gopt);
    out.captured = tr.reason == Termination::Captured && std::abs(tr.path.vertices.back() - to) <= gopt.captureRadius;
    // a regular target is passed through rather than captured: cut at the closest approach
    size_t stop = 0;
    for (size_t i = 1; i < tr.path.vertices.size(); ++i)
        if (std::abs(tr.path.vertices[i] - to) < std::abs(tr.path.vertices[stop] - to)) stop = i;
    while (stop > 0 && ((to - tr.path.vertices[stop]) * std::conj(tr.velocities[stop])).real() < 0.0) --stop;
    out.path.vertices.push_back(from);
    for (size_t i = 0; i <= stop; ++i) out.path.vertices.push_back(tr.path.vertices[i]);
    out.path.vertices.push_back(to);
    if (std::abs(out.miss) >= tol * D)
        throw Error(ErrorCode::NoConnection, "shooting did not reach the target pole");
    return out;
}

}  // namespace simsurf

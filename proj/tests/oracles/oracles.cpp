#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

const double PI = 3.14159265358979323846;
const cd I(0.0, 1.0);

cd zeta(const std::vector<PoleRes>& poles, cd z) {
    cd s = 0.0;
    for (const auto& p : poles) s += p.res / (z - p.z);
    return s;
}

}  // namespace

OracleReport report(const std::string& quantity, cd oracleValue, cd mainValue) {
    OracleReport r;
    r.quantity = quantity;
    r.oracleValue = oracleValue;
    r.mainValue = mainValue;
    r.absDefect = std::abs(oracleValue - mainValue);
    r.relDefect = std::abs(oracleValue) > 0 ? r.absDefect / std::abs(oracleValue) : r.absDefect;
    return r;
}

cd quadrature_transport(const std::vector<PoleRes>& poles, const std::vector<cd>& path, bool closed,
                        int panels) {
    if (panels % 2) ++panels;
    cd total = 0.0;
    size_t nseg = closed ? path.size() : path.size() - 1;
    for (size_t s = 0; s < nseg; ++s) {
        cd a = path[s], b = path[(s + 1) % path.size()];
        cd d = b - a;
        double h = 1.0 / panels;
        cd acc = zeta(poles, a) + zeta(poles, b);
        for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * zeta(poles, a + d * (k * h));
        total += acc * d * (h / 3.0);
    }
    return total;
}

cd residue_recovery(const std::vector<PoleRes>& poles, int idx, double radius, int samples) {
    cd c = poles.at(idx).z;
    for (size_t k = 0; k < poles.size(); ++k) {
        if ((int)k == idx) continue;
        if (std::abs(poles[k].z - c) < radius * (1 + 1e-3))
            throw std::invalid_argument("circle meets or encloses another pole");
    }
    cd s = 0.0;
    for (int j = 0; j < samples; ++j) {
        double t = 2 * PI * j / samples;
        cd u = radius * std::exp(I * t);
        s += zeta(poles, c + u) * u;  // dz = i u dt
    }
    return s / double(samples);
}

QuadrantModel::QuadrantModel(const std::array<cd, 4>& m) : M(m) {
    // continuity across the rays i, -1, -i
    g[0] = 1.0;
    cd e = I;
    for (int k = 0; k < 3; ++k) {
        g[k + 1] = g[k] * (e + M[k] * std::conj(e)) / (e + M[k + 1] * std::conj(e));
        e *= I;
    }
    tau = g[3] * (1.0 + M[3]) / (1.0 + M[0]);
    alpha = 2 * PI * I / (2 * PI * I + std::log(tau));
}

cd QuadrantModel::lifted(double r, double theta) const {
    int k = std::min(3, std::max(0, int(std::floor(theta / (PI / 2)))));
    cd z = std::polar(r, theta);
    return g[k] * (z + M[k] * std::conj(z));
}

cd QuadrantModel::operator()(cd z) const {
    if (z == 0.0) throw std::invalid_argument("model map at the corner");
    double r = std::abs(z), th = std::arg(z);
    if (th < 0) th += 2 * PI;
    // continuous arg along the arc from angle 0
    const int n = 512;
    cd y0 = lifted(r, 0.0);
    double a = std::arg(y0);
    cd prev = y0;
    for (int j = 1; j <= n; ++j) {
        cd y = lifted(r, th * j / n);
        a += std::arg(y / prev);
        prev = y;
    }
    cd logY(std::log(std::abs(prev)), a);
    return std::exp(alpha * logY);
}

cd quadrant_model(const std::array<cd, 4>& M, cd z) { return QuadrantModel(M)(z); }

cd quadrant_loop_factor(const std::array<cd, 4>& M, double r, int samples) {
    QuadrantModel q(M);
    // derivative of the developed chart in the straightened coordinate, one quadrant at a time
    auto W = [&](double th) {
        // same continuous lift as operator(), restricted to the start of the quadrant
        return q(std::polar(r, th));
    };
    const double d = 1e-3;
    auto ddt = [&](auto f, double th, double a, double b) {
        if (th - 2 * d < a)
            return (-25.0 * f(th) + 48.0 * f(th + d) - 36.0 * f(th + 2 * d) + 16.0 * f(th + 3 * d) -
                    3.0 * f(th + 4 * d)) / (12 * d);
        if (th + 2 * d > b)
            return (25.0 * f(th) - 48.0 * f(th - d) + 36.0 * f(th - 2 * d) - 16.0 * f(th - 3 * d) +
                    3.0 * f(th - 4 * d)) / (12 * d);
        return (f(th - 2 * d) - 8.0 * f(th - d) + 8.0 * f(th + d) - f(th + 2 * d)) / (12 * d);
    };
    cd total = 0.0;
    for (int k = 0; k < 4; ++k) {
        double a = k * PI / 2, b = (k + 1) * PI / 2;
        // keep evaluations inside the closed quadrant
        auto Yq = [&](double th) {
            cd z = std::polar(r, th);
            return q.g[k] * (z + q.M[k] * std::conj(z));
        };
        auto Wq = [&](double th) {
            // W evaluated from the quadrant formula, branch fixed by the lifted value at mid-quadrant
            cd wm = W(0.5 * (a + b));
            cd ym = Yq(0.5 * (a + b));
            cd y = Yq(th);
            return wm * std::exp(q.alpha * std::log(y / ym));
        };
        auto deriv = [&](double th) { return ddt(Yq, th, a, b) / ddt(Wq, th, a, b); };
        cd prev = deriv(a);
        double arg = 0.0;
        for (int j = 1; j <= samples; ++j) {
            cd cur = deriv(a + (b - a) * j / samples);
            arg += std::arg(cur / prev);
            prev = cur;
        }
        total += cd(std::log(std::abs(prev / deriv(a))), arg);
    }
    return std::exp(total);
}

StripValues strip_constants(double kappa) {
    double K = (1 + kappa) / (1 - kappa);
    double mbar = kappa / 2;
    return {K, (1 + K) / 2, (1 + mbar) / (1 - mbar)};
}

cd strip_solution(double kappa, cd p) {
    double K = (1 + kappa) / (1 - kappa);
    double x = p.real(), g = 0.0;
    auto slope = [&](double t) { return (static_cast<long>(std::floor(t)) % 2 == 0) ? 1.0 : K; };
    if (x >= 0) {
        double t = 0.0;
        while (t + 1 <= x) { g += slope(t + 0.5); t += 1; }
        g += slope(t + 0.5) * (x - t);
    } else {
        double t = 0.0;
        while (t - 1 >= x) { g -= slope(t - 0.5); t -= 1; }
        g -= slope(t - 0.5) * (t - x);
    }
    return cd(g, p.imag());
}

cd cell_average(const std::function<cd(cd)>& fn, double x0, double x1, double y0, double y1, int panels) {
    const double nd[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    const double wt[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
    double hx = (x1 - x0) / panels, hy = (y1 - y0) / panels;
    cd s = 0.0;
    for (int i = 0; i < panels; ++i)
        for (int j = 0; j < panels; ++j)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    double x = x0 + hx * (i + 0.5 + 0.5 * nd[a]);
                    double y = y0 + hy * (j + 0.5 + 0.5 * nd[b]);
                    s += wt[a] * wt[b] * fn(cd(x, y));
                }
    return s / (4.0 * panels * panels);
}

cd disk_convolution(const std::function<cd(cd)>& g, double R, cd z, int nr, int nt) {
    cd s = 0.0;
    double dr = R / nr, dt = 2 * PI / nt;
    for (int i = 0; i < nr; ++i) {
        double rho = (i + 0.5) * dr;
        for (int j = 0; j < nt; ++j) {
            cd w = std::polar(rho, (j + 0.5) * dt);
            s += g(w) / (z - w) * rho;
        }
    }
    return s * dr * dt;
}

std::pair<cd, cd> develop_rk4(const std::vector<PoleRes>& poles, cd z0, cd z1, int steps) {
    cd d = z1 - z0;
    double h = 1.0 / steps;
    cd p = 0.0, q = 1.0;  // phi, phi'
    auto F = [&](double t, cd qq) { return zeta(poles, z0 + t * d) * qq * d; };
    for (int k = 0; k < steps; ++k) {
        double t = k * h;
        cd k1p = q * d, k1q = F(t, q);
        cd q2 = q + 0.5 * h * k1q;
        cd k2p = q2 * d, k2q = F(t + 0.5 * h, q2);
        cd q3 = q + 0.5 * h * k2q;
        cd k3p = q3 * d, k3q = F(t + 0.5 * h, q3);
        cd q4 = q + h * k3q;
        cd k4p = q4 * d, k4q = F(t + h, q4);
        p += h / 6 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        q += h / 6 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    }
    return {p, q};
}

cd parallel_transport_rk4(const std::vector<PoleRes>& poles, const std::vector<cd>& path, bool closed, cd v0,
                          int steps) {
    cd v = v0;
    size_t nseg = closed ? path.size() : path.size() - 1;
    for (size_t s = 0; s < nseg; ++s) {
        cd a = path[s], d = path[(s + 1) % path.size()] - a;
        double h = 1.0 / steps;
        auto F = [&](double t, cd vv) { return -zeta(poles, a + t * d) * d * vv; };
        for (int k = 0; k < steps; ++k) {
            double t = k * h;
            cd k1 = F(t, v), k2 = F(t + h / 2, v + h / 2 * k1), k3 = F(t + h / 2, v + h / 2 * k2),
               k4 = F(t + h, v + h * k3);
            v += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return v;
}

std::vector<cd> normal_form_const(cd res, cd c, int order) {
    const int terms = 60, N = 128;
    const double rho = 0.25;
    auto T = [&](cd z) {
        cd s = 0.0, b = 1.0;
        for (int n = 0; n < terms; ++n) {
            s += b * std::pow(z, n) / (res + double(n) + 1.0);
            b *= c / double(n + 1);
        }
        return (res + 1.0) * s;
    };
    std::vector<cd> out(order);
    for (int n = 1; n <= order; ++n) {
        cd s = 0.0;
        for (int j = 0; j < N; ++j) {
            double th = 2 * PI * j / N;
            cd z = std::polar(rho, th);
            cd w = z * std::exp(std::log(T(z)) / (res + 1.0));
            s += w * std::exp(-I * double(n) * th);
        }
        out[n - 1] = s / double(N) / std::pow(rho, n);
    }
    return out;
}

cd pullback_laurent(const std::function<cd(cd)>& zf, const std::function<cd(cd)>& w,
                    const std::function<cd(cd)>& wp, const std::function<cd(cd)>& wpp, cd z0, double radius,
                    int samples, int k) {
    cd s = 0.0;
    for (int j = 0; j < samples; ++j) {
        double th = 2 * PI * j / samples;
        cd u = std::polar(radius, th), z = z0 + u;
        cd d1 = wp(z);
        cd zw = (zf(z) - wpp(z) / d1) / d1;
        cd W = w(z);
        // dW = w'(z) i u dtheta
        s += zw * std::pow(W, -k - 1) * d1 * u;
    }
    return s / double(samples);
}

cd power_geodesic(cd res, cd z0, cd v0, double t) {
    cd a = res + 1.0;
    cd w0 = std::pow(z0, a);
    cd dw = a * std::pow(z0, a - 1.0) * v0;
    return std::pow(w0 + t * dw, 1.0 / a);
}

cd limit_density_fd(const std::function<cd(cd)>& mu, cd c, double h) {
    cd ex(h, 0), ey(0, h);
    cd m = mu(c);
    cd mx = (mu(c + ex) - mu(c - ex)) / (2 * h);
    cd my = (mu(c + ey) - mu(c - ey)) / (2 * h);
    cd mxy = (mu(c + ex + ey) - mu(c + ex - ey) - mu(c - ex + ey) + mu(c - ex - ey)) / (4 * h * h);
    cd q = 1.0 - m * m;
    return -(1.0 / (2 * PI)) * (2.0 * mxy / q + 4.0 * m * mx * my / (q * q));
}

}  // namespace oracle

#include "doctest.h"

#include "oracles.hpp"
#include "support.hpp"
#include "simsurf/fixtures.hpp"
#include "simsurf/transport.hpp"
#include "simsurf/uniformize.hpp"

#include <cmath>
#include <random>

using namespace simsurf;

namespace {

std::vector<oracle::PoleRes> as_oracle(const ChristoffelSymbol& s) {
    std::vector<oracle::PoleRes> out;
    for (const auto& p : s.poles) out.push_back({p.z, p.res});
    return out;
}

PolylinePath square(cplx c, double h) {
    return {{c + cplx(-h, -h), c + cplx(h, -h), c + cplx(h, h), c + cplx(-h, h)}, true};
}

ChristoffelSymbol single(cplx res) { return {{{0.0, res}}, -2.0 - res}; }

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("log integral closed forms") {
    cplx r(0.3, -0.2);
    auto loop = segment_log_integral(single(r), square(0.0, 1.0));
    CHECK(std::abs(loop.tau - kTwoPi * kI * r) < 1e-14);
    CHECK(std::abs(loop.holonomyFactor - std::exp(-kTwoPi * kI * r)) < 1e-14);
    CHECK(std::abs(std::abs(loop.holonomyFactor) - std::exp(-loop.tau.real())) < 1e-14);

    auto seg = segment_log_integral(single(r), PolylinePath{{1.0, 2.0}, false});
    CHECK(std::abs(seg.tau - r * std::log(2.0)) < 1e-15);
}

TEST_CASE("two-pole loop matches Simpson quadrature") {
    ChristoffelSymbol two{{{cplx(-0.5, 0.2), cplx(0.25, 0.1)}, {cplx(0.6, -0.3), cplx(-0.4, 0.05)}}, -1.85};
    auto path = square(0.0, 2.0);
    auto t = segment_log_integral(two, path);
    CHECK(std::abs(t.tau - kTwoPi * kI * (two.poles[0].res + two.poles[1].res)) < 1e-13);
    cplx ref = oracle::quadrature_transport(as_oracle(two), path.vertices, true, 4000);
    CHECK(std::abs(t.tau - ref) < 1e-10);
}

TEST_CASE("random five-pole path matches Simpson quadrature") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.5, 1.5), r(-0.4, 0.4);
    ChristoffelSymbol sym;
    for (int k = 0; k < 5; ++k) sym.poles.push_back({cplx(u(rng), u(rng)), cplx(r(rng), r(rng))});
    // a winding path that stays clear of the poles
    PolylinePath path;
    for (int k = 0; k < 9; ++k) path.vertices.push_back(std::polar(1.9 - 0.03 * k, 0.9 * k) + cplx(0.02, -0.01));
    auto t = segment_log_integral(sym, path);
    cplx ref = oracle::quadrature_transport(as_oracle(sym), path.vertices, false, 20000);
    CHECK(std::abs(t.tau - ref) < 1e-8);
}

TEST_CASE("additivity and reversal") {
    auto tri = fixtures::triangle_symbol();
    PolylinePath a{{cplx(0.1, 0.5), cplx(-1.4, 0.3), cplx(-1.2, -0.8)}, false};
    PolylinePath b{{cplx(-1.2, -0.8), cplx(1.3, -0.6), cplx(0.4, 1.1)}, false};
    PolylinePath ab{{cplx(0.1, 0.5), cplx(-1.4, 0.3), cplx(-1.2, -0.8), cplx(1.3, -0.6), cplx(0.4, 1.1)}, false};
    cplx ta = segment_log_integral(tri, a).tau, tb = segment_log_integral(tri, b).tau;
    CHECK(std::abs(segment_log_integral(tri, ab).tau - (ta + tb)) < 1e-14);

    cplx v0(0.3, 0.7);
    cplx v1 = parallel_transport(tri, ab, v0);
    CHECK(std::abs(parallel_transport(tri, ab.reversed(), v1) - v0) < 1e-12);

    CHECK(parallel_transport(ChristoffelSymbol{}, ab, v0) == v0);
}

TEST_CASE("transport around the triangle vertex C") {
    ChristoffelSymbol c{{{0.0, cplx(-7.0 / 12, 0)}}, cplx(-17.0 / 12, 0)};
    PolylinePath circle;
    for (int k = 0; k < 64; ++k) circle.vertices.push_back(std::polar(1.0, kTwoPi * k / 64));
    circle.closed = true;
    cplx v0(0.4, -0.2);
    CHECK(std::abs(parallel_transport(c, circle, v0) - v0 * std::exp(kTwoPi * kI * (7.0 / 12))) < 1e-13);
}

TEST_CASE("transport agrees with an RK4 oracle") {
    auto tri = fixtures::triangle_symbol();
    std::vector<cplx> path{cplx(0.0, 0.5), cplx(-1.5, 0.4), cplx(-1.4, -0.7), cplx(0.3, -0.9)};
    cplx v0(1.0, 0.2);
    cplx ref = oracle::parallel_transport_rk4(as_oracle(tri), path, false, v0, 4000);
    CHECK(std::abs(parallel_transport(tri, PolylinePath{path, false}, v0) - ref) < 1e-10);
}

TEST_CASE("contractible pole-free loop has trivial holonomy") {
    auto tri = fixtures::triangle_symbol();
    auto t = segment_log_integral(tri, square(cplx(0.1, 0.6), 0.4));
    CHECK(std::abs(t.holonomyFactor - 1.0) < 1e-12);
}

TEST_CASE("small loops reproduce the cycle monodromy of a grid symbol") {
    const auto& m = testsupport::single_cell_map();
    auto c = build_grid_complex(fixtures::single_cell(0.2));
    double sep = m.symbol.poles.size() > 1 ? 1e300 : 1.0;
    for (size_t i = 0; i < m.symbol.poles.size(); ++i)
        for (size_t j = 0; j < i; ++j) sep = std::min(sep, std::abs(m.symbol.poles[i].z - m.symbol.poles[j].z));
    for (size_t cy = 0; cy < c.cycles.size(); ++cy) {
        int k = m.problem.cyclePole[cy];
        if (k < 0) continue;
        auto t = segment_log_integral(m.symbol, square(m.symbol.poles[k].z, 0.25 * sep));
        CHECK(std::abs(std::exp(t.tau) - c.cycles[cy].monodromyFactor) < 1e-10);
    }
}

TEST_CASE("pole on a segment is rejected") {
    CHECK_THROWS_AS(segment_log_integral(single(0.3), PolylinePath{{-1.0, 1.0}, false}), Error);
}

TEST_CASE("development closed forms") {
    PolylinePath p{{cplx(0.2, 0.1), cplx(1.3, -0.4), cplx(0.7, 0.9)}, false};
    auto flat = develop_chart(ChristoffelSymbol{}, p.vertices[0], 0.0, 1.0, p);
    for (size_t k = 0; k < p.vertices.size(); ++k)
        CHECK(std::abs(flat.values[k] - (p.vertices[k] - p.vertices[0])) < 1e-14);

    auto half = single(-0.5);
    auto ch = develop_chart(half, 1.0, 0.0, 1.0, PolylinePath{{1.0, 0.0}, false});
    REQUIRE(ch.restingPlace);
    CHECK(std::abs(*ch.restingPlace + 2.0) < 1e-12);

    auto z = develop_point(half, 1.0, 0.0, 1.0, cplx(0.4, 0.3));
    CHECK(std::abs(z.first - 2.0 * (std::sqrt(cplx(0.4, 0.3)) - 1.0)) < 1e-12);

    CHECK_THROWS_AS(develop_chart(single(-1.2), 1.0, 0.0, 1.0, PolylinePath{{1.0, 0.0}, false}), Error);
}

TEST_CASE("development matches an RK4 oracle") {
    auto tri = fixtures::triangle_symbol();
    cplx z0(0.1, 0.4), z1(-0.6, 1.1);
    auto ref = oracle::develop_rk4(as_oracle(tri), z0, z1, 4000);
    auto got = develop_point(tri, z0, 0.0, 1.0, z1);
    CHECK(std::abs(got.first - ref.first) < 1e-10);
    CHECK(std::abs(got.second - ref.second) < 1e-10);
}

TEST_CASE("resting place is homotopy invariant") {
    auto tri = fixtures::triangle_symbol();
    auto direct = develop_chart(tri, 0.0, 0.0, 1.0, PolylinePath{{0.0, 1.0}, false});
    PolylinePath arc;
    for (int k = 0; k <= 24; ++k) arc.vertices.push_back(0.5 - 0.5 * std::polar(1.0, -kPi * k / 24));
    auto around = develop_chart(tri, 0.0, 0.0, 1.0, arc);
    REQUIRE(direct.restingPlace);
    REQUIRE(around.restingPlace);
    CHECK(std::abs(*direct.restingPlace - *around.restingPlace) < 1e-8);
}

TEST_CASE("geodesics") {
    auto ray = trace_geodesic(ChristoffelSymbol{}, cplx(0.1, 0.2), cplx(1.0, 0.5), 2.0);
    for (size_t k = 0; k < ray.path.vertices.size(); ++k)
        CHECK(std::abs(ray.path.vertices[k] - (cplx(0.1, 0.2) + ray.times[k] * cplx(1.0, 0.5))) < 1e-12);

    cplx res(-0.4, 0.0);
    cplx z0(1.0, 0.3), v0(-0.2, 0.6);
    auto tr = trace_geodesic(single(res), z0, v0, 1.5);
    double worst = 0;
    for (size_t k = 0; k < tr.path.vertices.size(); ++k)
        worst = std::max(worst, std::abs(tr.path.vertices[k] - oracle::power_geodesic(res, z0, v0, tr.times[k])));
    CHECK(worst < 1e-6);

    // aimed at the pole: radial geodesic reaches it in finite time
    auto in = trace_geodesic(single(res), 1.0, -1.0, 50.0);
    CHECK(in.reason == Termination::Captured);
    CHECK(in.capturedPole == 0);
    CHECK(in.times.back() < 50.0);
}

TEST_CASE("saddle connections") {
    ChristoffelSymbol flat;
    auto s = shoot_saddle_connection(flat, 0.0, 1.0, 1.0);
    for (cplx v : s.path.vertices) CHECK(std::abs(v.imag()) < 1e-9);
    CHECK(std::abs(s.path.vertices.back() - 1.0) < 1e-6);

    auto tri = fixtures::triangle_symbol();
    auto c = shoot_saddle_connection(tri, -1.0, 2.0, 1.0);
    CHECK(c.captured);
    CHECK(std::abs(c.miss) < 1e-9 * 2.0);  // tol is relative to the pole distance

    // continue the skeleton edge A-B under small residue changes
    auto cx = fixtures::triangle_complex();
    auto sk = skeleton(solve_parameter_problem(cx), cx);
    const SkeletonEdge* ab = nullptr;
    for (const auto& e : sk.edges)
        if (e.poleA >= 0 && e.poleB >= 0) ab = &e;
    REQUIRE(ab);
    REQUIRE(ab->ok);
    const cplx from = ab->path.vertices.front(), to = ab->path.vertices.back();
    const cplx launch = ab->path.vertices[1] - from;
    for (double d : {0.01, -0.01}) {
        auto p = tri;
        p.poles[0].res += d;
        p.poles[1].res -= d;
        auto q = shoot_saddle_connection(p, from, launch, to);
        CHECK(q.captured);
        CHECK(std::abs(q.miss) < 1e-9 * std::abs(to - from));
    }
}

}

#include "doctest.h"

#include "support.hpp"
#include "simsurf/fixtures.hpp"
#include "simsurf/uniformize.hpp"

#include <cmath>
#include <random>

using namespace simsurf;

namespace {

double max_abs(const std::vector<cplx>& v) {
    double m = 0;
    for (cplx x : v) m = std::max(m, std::abs(x));
    return m;
}

double per_defect(const StraighteningMap& m) {
    return max_abs(per_residual(per_map(m.symbol, m.problem), m.problem.targets));
}

StraighteningMap solve_single_cell(cplx c, int refine, SolverOptions opt = {}) {
    auto base = fixtures::single_cell(c);
    PiecewiseField pw(GridSpec{1.5, 3 * refine, 0.0});
    for (int iy = 0; iy < 3 * refine; ++iy)
        for (int ix = 0; ix < 3 * refine; ++ix) pw.at(ix, iy) = base.at(ix / refine, iy / refine);
    return normalize(solve_parameter_problem(build_grid_complex(pw), opt));
}

}  // namespace

TEST_SUITE("uniformize") {

TEST_CASE("zero field solves to the lattice") {
    auto c = build_grid_complex(PiecewiseField(GridSpec{1.0, 4, 0.0}));
    auto m = solve_parameter_problem(c);
    CHECK(m.report.iterations == 0);
    for (int j = 0; j <= 4; ++j)
        for (int i = 0; i <= 4; ++i) {
            int k = m.grid->cornerIndex(i, j);
            CHECK(m.pole(k) == m.grid->corner(i, j));
        }
    auto n = normalize(m);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        cplx z(u(rng), u(rng));
        CHECK(std::abs(evaluate_straightening(m, z) - z) < 1e-12);
        CHECK(std::abs(evaluate_straightening(n, z) - z) < 1e-12);
    }
    CHECK(std::abs(n.normalization.a - 1.0) < 1e-15);
    CHECK(std::abs(n.normalization.b) < 1e-15);

    auto sk = skeleton(m, c);
    CHECK(sk.failedEdges() == 0);
    for (const auto& e : sk.edges) {
        if (e.poleA < 0 || e.poleB < 0) continue;
        cplx a = m.pole(e.poleA), b = m.pole(e.poleB);
        for (cplx p : e.path.vertices) CHECK(std::abs(cross(b - a, p - a)) < 1e-12);
    }
}

TEST_CASE("per map of a flat square face") {
    auto c = build_grid_complex(PiecewiseField(GridSpec{1.0, 1, 0.0}));
    auto P = make_parameter_problem(c);
    auto conf = per_map(P.symbol(), P);
    bool found = false;
    for (size_t f = 0; f < P.faces.size(); ++f) {
        bool finite = true;
        for (int k : P.faces[f]) finite = finite && k >= 0;
        if (!finite || P.faces[f].size() != 4) continue;
        found = true;
        std::vector<cplx> expect{0.0, 1.0, cplx(1, 1), cplx(0, 1)};
        for (int k = 0; k < 4; ++k) CHECK(std::abs(conf[f].normalized[k] - expect[k]) < 1e-13);
    }
    CHECK(found);
}

TEST_CASE("triangle fixture") {
    auto c = fixtures::triangle_complex();
    auto m = solve_parameter_problem(c);
    CHECK(m.problem.freePoles().empty());
    CHECK(m.report.finalResidual < 1e-8);
    auto conf = per_map(m.symbol, m.problem);
    REQUIRE(conf.size() == 2);
    for (size_t f = 0; f < 2; ++f)
        for (size_t k = 0; k < conf[f].normalized.size(); ++k)
            CHECK(std::abs(conf[f].normalized[k] - m.problem.targets[f].normalized[k]) < 1e-8);

    auto sk = skeleton(m, c);
    CHECK(sk.vertexCount() == 3);
    CHECK(sk.edges.size() == 3);
    CHECK(sk.faces.size() == 2);
    CHECK(sk.failedEdges() == 0);
    CHECK(edges_disjoint(sk, 1e-3 * 2.0));
}

TEST_CASE("single cell solve satisfies the left inverse property") {
    auto m = solve_single_cell(cplx(0, 0.2), 1);
    CHECK(m.report.converged);
    CHECK(m.report.finalResidual < 1e-8);
    CHECK(per_defect(m) < 1e-7);

    auto c = build_grid_complex(fixtures::single_cell(cplx(0, 0.2)));
    for (size_t cy = 0; cy < c.cycles.size(); ++cy) {
        int k = m.problem.cyclePole[cy];
        if (k >= 0) CHECK(m.symbol.poles[k].res == c.cycles[cy].residue);
    }
    for (int j = 0; j <= 3; ++j)
        for (int i = 0; i <= 3; ++i) {
            int k = m.grid->cornerIndex(i, j);
            CHECK(evaluate_straightening(m, m.grid->corner(i, j)) == m.pole(k));
        }
}

TEST_CASE("skeleton of the single cell is disjoint") {
    const auto& m = testsupport::single_cell_map();
    auto sk = skeleton(m, build_grid_complex(fixtures::single_cell(0.2)));
    CHECK(sk.failedEdges() == 0);
    CHECK(edges_disjoint(sk, 1e-3 * 3.0));
}

TEST_CASE("analytic Jacobian agrees with differences") {
    const auto& m = testsupport::single_cell_map();
    auto a = residual_jacobian(m.problem, true);
    auto f = residual_jacobian(m.problem, false, 1e-7);
    REQUIRE(a.rows.size() == f.rows.size());
    double worst = 0, scale = 0;
    for (size_t r = 0; r < a.rows.size(); ++r)
        for (size_t k = 0; k < a.rows[r].size(); ++k) {
            worst = std::max(worst, std::abs(a.rows[r][k] - f.rows[r][k]));
            scale = std::max(scale, std::abs(a.rows[r][k]));
        }
    CHECK(worst < 1e-5 * scale);
}

TEST_CASE("normalize undoes an affine post-composition") {
    const auto& m = testsupport::single_cell_map();
    auto moved = post_compose(m, AffineMap{2.0, 3.0});
    auto back = normalize(moved);
    for (size_t k = 0; k < m.symbol.poles.size(); ++k) CHECK(std::abs(back.pole(k) - m.pole(k)) < 1e-12);
    for (cplx z : {cplx(0.3, 0.2), cplx(-1.1, 0.7), cplx(2.5, -2.0)})
        CHECK(std::abs(evaluate_straightening(back, z) - evaluate_straightening(m, z)) < 1e-12);
    auto again = normalize(m);
    for (size_t k = 0; k < m.symbol.poles.size(); ++k) CHECK(std::abs(again.pole(k) - m.pole(k)) < 1e-12);
}

TEST_CASE("pinning invariance") {
    const auto& m = testsupport::single_cell_map();
    SolverOptions opt;
    opt.pinned = {5, 14};
    auto other = normalize(solve_parameter_problem(build_grid_complex(fixtures::single_cell(0.2)), opt));
    for (size_t k = 0; k < m.symbol.poles.size(); ++k) CHECK(std::abs(other.pole(k) - m.pole(k)) < 1e-6);
}

TEST_CASE("straightening converges under refinement") {
    const cplx z(0.25, 0.1);
    cplx f1 = evaluate_straightening(solve_single_cell(0.2, 1), z);
    cplx f2 = evaluate_straightening(solve_single_cell(0.2, 2), z);
    cplx f4 = evaluate_straightening(solve_single_cell(0.2, 4), z);
    // the piecewise field is unchanged by subdividing, so the maps agree up to solver tolerance
    CHECK(std::abs(f2 - f1) < 1e-9);
    CHECK(std::abs(f4 - f2) < 1e-9);

    const cplx w(0.45, 0.3);
    cplx b2 = evaluate_straightening(testsupport::bump_map(2), w);
    cplx b4 = evaluate_straightening(testsupport::bump_map(4), w);
    cplx b8 = evaluate_straightening(testsupport::bump_map(8), w);
    CHECK(std::abs(b8 - b4) < std::abs(b4 - b2));
}

TEST_CASE("straightening is holomorphic in the amplitude") {
    const cplx z(0.3, -0.15);
    std::vector<cplx> samples;
    for (int j = 0; j < 8; ++j) {
        SolverOptions opt;
        opt.amplitude = std::polar(0.1, kTwoPi * j / 8);
        samples.push_back(evaluate_straightening(solve_single_cell(0.2, 1, opt), z));
    }
    double pos = 0, neg = 0;
    for (int k = 1; k <= 3; ++k) {
        cplx cp = 0, cn = 0;
        for (int j = 0; j < 8; ++j) {
            cp += samples[j] * std::polar(1.0, -kTwoPi * k * j / 8) / 8.0;
            cn += samples[j] * std::polar(1.0, kTwoPi * k * j / 8) / 8.0;
        }
        pos += std::norm(cp);
        neg += std::norm(cn);
    }
    CHECK(pos > 0);
    CHECK(neg <= 0.05 * pos);
}

}

#include "doctest.h"

#include "oracles.hpp"
#include "simsurf/fields.hpp"
#include "simsurf/fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace simsurf;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    fs::path p = fs::temp_directory_path() / ("simsurf_fields_" + name);
    std::ofstream(p) << body;
    return p.string();
}

double max_cell_gap(const PiecewiseField& a, const PiecewiseField& b) {
    double worst = 0.0;
    for (size_t k = 0; k < a.cellValues.size(); ++k)
        worst = std::max(worst, std::abs(a.cellValues[k] - b.cellValues[k]));
    return worst;
}

}  // namespace

TEST_SUITE("fields") {

TEST_CASE("constant field averages to the constant") {
    auto pw = average_field(BeltramiField::constant(0.3), GridSpec{1.5, 5, 0.0});
    for (cplx v : pw.cellValues) CHECK(std::abs(v - 0.3) < 1e-15);
    CHECK(pw.outsideValue == cplx(0.0));
    CHECK(pw.value(cplx(10, 0)) == cplx(0.0));
}

TEST_CASE("strips alternate 0 and kappa on aligned unit cells") {
    auto pw = average_field(BeltramiField::vertical_strips(0.5, 1.0), GridSpec{4.0, 8, 0.0});
    for (int iy = 0; iy < 8; ++iy)
        for (int ix = 0; ix < 8; ++ix) {
            double x = pw.grid.cellCenter(ix, iy).real();
            double expect = (static_cast<int>(std::floor(x)) % 2 != 0) ? 0.5 : 0.0;
            CHECK(std::abs(pw.at(ix, iy) - expect) < 1e-15);
        }
}

TEST_CASE("bump cell averages match the refined quadrature") {
    BeltramiField bump = BeltramiField::smooth_bump(cplx(0.3, 0.1), 0.0, 1.0);
    GridSpec g{1.0, 4, 0.0};
    auto pw = average_field(bump, g);
    auto mu = [&](oracle::cd z) { return bump.value(z); };
    const double s = g.cellSide();
    for (int iy = 0; iy < 4; ++iy)
        for (int ix = 0; ix < 4; ++ix) {
            cplx c0 = g.corner(ix, iy);
            cplx ref = oracle::cell_average(mu, c0.real(), c0.real() + s, c0.imag(), c0.imag() + s, 64);
            CHECK(std::abs(pw.at(ix, iy) - ref) < 1e-10);
        }
}

TEST_CASE("cell values never exceed the sup bound") {
    for (auto f : {BeltramiField::smooth_bump(0.45, 0.2, 1.2), fixtures::xy_jet(0.4),
                   BeltramiField::vertical_strips(cplx(0, 0.3), 0.5)}) {
        for (int m : {3, 4, 8}) {
            auto pw = average_field(f, GridSpec{1.5, m, 0.0});
            CHECK(pw.supNorm() <= f.supBound() + 1e-15);
        }
    }
}

TEST_CASE("l1 distance basics") {
    auto a = BeltramiField::constant(0.3).fn();
    auto b = BeltramiField::constant(0.1).fn();
    Rect unit{0, 1, 0, 1};
    CHECK(l1_distance(a, a, unit, 16) == 0.0);
    CHECK(std::abs(l1_distance(a, b, unit, 16) - 0.2) < 1e-14);
}

TEST_CASE("l1 distance to the exact field shrinks under refinement") {
    BeltramiField bump = fixtures::bump(0.3, 1.0);
    Rect sup{-1, 1, -1, 1};
    double prev = 1e300;
    for (int m : {2, 4, 8, 16}) {
        auto pw = average_field(bump, GridSpec{1.0, m, 0.0});
        double d = l1_distance(bump.fn(), [&](cplx z) { return pw.value(z); }, sup, 256);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("cayley averaging differs from plain averaging at second order") {
    BeltramiField bump = BeltramiField::smooth_bump(0.4, 0.0, 1.0);
    auto gap = [&](int m) {
        GridSpec g{1.0, m, 0.0};
        return max_cell_gap(average_field(bump, g), average_field(bump, g, AveragingTransform::cayley()));
    };
    double g8 = gap(8), g16 = gap(16), g32 = gap(32);
    CHECK(g8 / g16 >= 1.5);
    CHECK(g16 / g32 >= 1.5);
}

TEST_CASE("load_field reads grid files") {
    auto zeros = write_temp("zeros.json", R"({"grid":{"L":1,"m":2},"values":[0,0,0,0]})");
    auto f0 = load_field(zeros);
    CHECK(f0.kind() == FieldKind::GridSampled);
    CHECK(f0.supBound() == 0.0);

    auto one = write_temp("one.json", R"({"grid":{"L":1,"m":2},"values":[0,[0,0.5],0,0]})");
    CHECK(load_field(one).supBound() == doctest::Approx(0.5).epsilon(1e-15));

    auto bad = write_temp("bad.json", R"({"grid":{"L":1,"m":2},"values":[1.0,0,0,0]})");
    CHECK_THROWS_AS(load_field(bad), Error);

    auto wrong = write_temp("wrong.json", R"({"grid":{"L":1,"m":2},"values":[0,0,0]})");
    CHECK_THROWS_AS(load_field(wrong), Error);
}

TEST_CASE("grid-sampled field with mismatched resolution is rejected") {
    PiecewiseField pw(GridSpec{1.0, 2, 0.0});
    auto f = BeltramiField::grid_sampled(pw);
    CHECK_THROWS_AS(average_field(f, GridSpec{1.0, 4, 0.0}), Error);
}

TEST_CASE("exact derivatives of the bump agree with differences") {
    BeltramiField bump = BeltramiField::smooth_bump(cplx(0.3, -0.2), cplx(0.1, 0.05), 1.3, BumpProfile::MixedJet);
    cplx z(0.31, -0.42);
    Jet j = bump.jet(z);
    const double h = 1e-4;
    auto v = [&](double dx, double dy) { return bump.value(z + cplx(dx, dy)); };
    cplx xy = (v(h, h) - v(h, -h) - v(-h, h) + v(-h, -h)) / (4 * h * h);
    CHECK(std::abs(j.xy - xy) < 1e-6);
    CHECK(std::abs(j.x - (v(h, 0) - v(-h, 0)) / (2 * h)) < 1e-7);
    CHECK(std::abs(j.y - (v(0, h) - v(0, -h)) / (2 * h)) < 1e-7);
}

}

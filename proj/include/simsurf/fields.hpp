#pragma once

#include "simsurf/common.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace simsurf {

struct GridSpec {
    double halfWidth = 1.0;
    int cellsPerSide = 1;
    cplx origin{0.0, 0.0};

    double cellSide() const { return 2.0 * halfWidth / cellsPerSide; }
    int cornersPerSide() const { return cellsPerSide + 1; }
    int cornerCount() const { return cornersPerSide() * cornersPerSide(); }
    int cellCount() const { return cellsPerSide * cellsPerSide; }
    int cornerIndex(int i, int j) const { return j * cornersPerSide() + i; }
    int cellIndex(int ix, int iy) const { return iy * cellsPerSide + ix; }

    cplx corner(int i, int j) const {
        const double s = cellSide();
        return origin + cplx(-halfWidth + i * s, -halfWidth + j * s);
    }
    cplx cellCenter(int ix, int iy) const {
        const double s = cellSide();
        return origin + cplx(-halfWidth + (ix + 0.5) * s, -halfWidth + (iy + 0.5) * s);
    }
    bool contains(cplx z, double slack = 0.0) const {
        cplx d = z - origin;
        return std::abs(d.real()) <= halfWidth + slack && std::abs(d.imag()) <= halfWidth + slack;
    }
    // cell containing z, clamped to the grid
    std::pair<int, int> locate(cplx z) const;
    bool operator==(const GridSpec& o) const {
        return halfWidth == o.halfWidth && cellsPerSide == o.cellsPerSide && origin == o.origin;
    }
    void validate() const;
};

struct PiecewiseField {
    GridSpec grid;
    std::vector<cplx> cellValues;  // row-major, row 0 at the bottom (y = -L)
    cplx outsideValue{0.0, 0.0};

    PiecewiseField() = default;
    explicit PiecewiseField(const GridSpec& g) : grid(g), cellValues(g.cellCount(), cplx{}) {}

    cplx& at(int ix, int iy) { return cellValues[grid.cellIndex(ix, iy)]; }
    cplx at(int ix, int iy) const { return cellValues[grid.cellIndex(ix, iy)]; }
    cplx value(cplx z) const;
    double supNorm() const;
    PiecewiseField scaled(cplx t) const;
};

struct Jet {
    cplx v, x, y, xx, xy, yy;
};

enum class FieldKind { Zero, Constant, VerticalStrips, SmoothBump, GridSampled, External };
enum class BumpProfile { Tensor, MixedJet };

const char* field_kind_name(FieldKind k);

class BeltramiField {
public:
    static BeltramiField zero();
    static BeltramiField constant(cplx c);
    // mu = kappa on strips where floor(x / width) is odd, 0 elsewhere
    static BeltramiField vertical_strips(cplx kappa, double width = 1.0);
    // tensor: A*beta(u)*beta(v); mixed: A*u*v*beta(u)*beta(v); u,v = (x-cx)/R, (y-cy)/R,
    // beta(s) = (1-s^2)^3 on |s|<1
    static BeltramiField smooth_bump(cplx amplitude, cplx center, double radius,
                                     BumpProfile profile = BumpProfile::Tensor);
    static BeltramiField grid_sampled(PiecewiseField pw);
    static BeltramiField external(const std::string& path);

    FieldKind kind() const { return kind_; }
    cplx value(cplx z) const;
    bool hasExactDerivatives() const;
    Jet jet(cplx z) const;  // throws Unsupported... for kinds without exact derivatives
    double supBound() const;
    double supportRadius() const;
    double quasiconformalK() const {
        double k = supBound();
        return (1.0 + k) / (1.0 - k);
    }
    BeltramiField scaled(cplx t) const;

    cplx amplitude() const { return amp_; }
    cplx center() const { return center_; }
    double radius() const { return radius_; }
    double stripWidth() const { return radius_; }
    BumpProfile profile() const { return profile_; }
    const PiecewiseField* samples() const { return samples_ ? &*samples_ : nullptr; }
    const std::string& sourcePath() const { return path_; }
    std::function<cplx(cplx)> fn() const;

private:
    FieldKind kind_ = FieldKind::Zero;
    cplx amp_{};
    cplx center_{};
    double radius_ = 1.0;
    BumpProfile profile_ = BumpProfile::Tensor;
    std::optional<PiecewiseField> samples_;
    std::string path_;
};

struct AveragingTransform {
    std::string name;
    std::function<cplx(cplx)> forward;
    std::function<cplx(cplx)> inverse;

    static AveragingTransform cayley();  // nu = (1+mu)/(1-mu)
};

PiecewiseField average_field(const BeltramiField& field, const GridSpec& grid,
                             const std::optional<AveragingTransform>& transform = std::nullopt);

struct Rect {
    double x0, x1, y0, y1;
};

using FieldFn = std::function<cplx(cplx)>;
double l1_distance(const FieldFn& f1, const FieldFn& f2, const Rect& region, int resolution);

BeltramiField load_field(const std::string& path, const std::string& format = "json");

// 4-point Gauss-Legendre on [-1,1]
extern const double kGauss4Nodes[4];
extern const double kGauss4Weights[4];

}  // namespace simsurf

#include "simsurf/fields.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace simsurf {

const double kGauss4Nodes[4] = {-0.86113631159405257522, -0.33998104358485626480,
                                0.33998104358485626480, 0.86113631159405257522};
const double kGauss4Weights[4] = {0.34785484513745385737, 0.65214515486254614263,
                                  0.65214515486254614263, 0.34785484513745385737};

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::ParseError: return "parse-error";
        case ErrorCode::PoleProximity: return "pole-proximity";
        case ErrorCode::StructuralError: return "structural-error";
        case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
        case ErrorCode::UnsupportedResidue: return "unsupported-residue";
        case ErrorCode::NonIntegrable: return "non-integrable";
        case ErrorCode::QuadratureFailure: return "quadrature-failure";
        case ErrorCode::StepUnderflow: return "step-underflow";
        case ErrorCode::NoConnection: return "no-connection";
        case ErrorCode::FacePathObstruction: return "face-path-obstruction";
        case ErrorCode::SolverStagnation: return "solver-stagnation";
        case ErrorCode::PoleCollision: return "pole-collision";
        case ErrorCode::NewtonNonConvergence: return "newton-non-convergence";
        case ErrorCode::InsufficientData: return "insufficient-data";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

const char* field_kind_name(FieldKind k) {
    switch (k) {
        case FieldKind::Zero: return "zero";
        case FieldKind::Constant: return "constant";
        case FieldKind::VerticalStrips: return "strips";
        case FieldKind::SmoothBump: return "bump";
        case FieldKind::GridSampled: return "grid";
        case FieldKind::External: return "external";
    }
    return "?";
}

void GridSpec::validate() const {
    if (!(halfWidth > 0.0) || cellsPerSide < 1)
        throw Error(ErrorCode::InvalidArgument, "grid needs L > 0 and m >= 1");
}

std::pair<int, int> GridSpec::locate(cplx z) const {
    const double s = cellSide();
    cplx d = z - origin;
    int ix = static_cast<int>(std::floor((d.real() + halfWidth) / s));
    int iy = static_cast<int>(std::floor((d.imag() + halfWidth) / s));
    ix = std::clamp(ix, 0, cellsPerSide - 1);
    iy = std::clamp(iy, 0, cellsPerSide - 1);
    return {ix, iy};
}

cplx PiecewiseField::value(cplx z) const {
    if (!grid.contains(z)) return outsideValue;
    auto [ix, iy] = grid.locate(z);
    return at(ix, iy);
}

double PiecewiseField::supNorm() const {
    double k = 0.0;
    for (auto v : cellValues) k = std::max(k, std::abs(v));
    return k;
}

PiecewiseField PiecewiseField::scaled(cplx t) const {
    PiecewiseField out = *this;
    for (auto& v : out.cellValues) v *= t;
    return out;
}

namespace {

struct Profile1d {
    double p, d1, d2;
};

Profile1d beta_profile(double s, BumpProfile prof) {
    if (std::abs(s) >= 1.0) return {0.0, 0.0, 0.0};
    const double q = 1.0 - s * s;
    const double b = q * q * q;
    const double b1 = -6.0 * s * q * q;
    const double b2 = q * (30.0 * s * s - 6.0);
    if (prof == BumpProfile::Tensor) return {b, b1, b2};
    return {s * b, b + s * b1, 2.0 * b1 + s * b2};
}

}  // namespace

BeltramiField BeltramiField::zero() { return BeltramiField{}; }

BeltramiField BeltramiField::constant(cplx c) {
    if (std::abs(c) >= 1.0) throw Error(ErrorCode::InvalidArgument, "constant field needs |c| < 1");
    BeltramiField f;
    f.kind_ = FieldKind::Constant;
    f.amp_ = c;
    return f;
}

BeltramiField BeltramiField::vertical_strips(cplx kappa, double width) {
    if (std::abs(kappa) >= 1.0 || !(width > 0.0))
        throw Error(ErrorCode::InvalidArgument, "strips need |kappa| < 1 and width > 0");
    BeltramiField f;
    f.kind_ = FieldKind::VerticalStrips;
    f.amp_ = kappa;
    f.radius_ = width;
    return f;
}

BeltramiField BeltramiField::smooth_bump(cplx amplitude, cplx center, double radius,
                                         BumpProfile profile) {
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "bump radius must be positive");
    BeltramiField f;
    f.kind_ = FieldKind::SmoothBump;
    f.amp_ = amplitude;
    f.center_ = center;
    f.radius_ = radius;
    f.profile_ = profile;
    if (f.supBound() >= 1.0) throw Error(ErrorCode::InvalidArgument, "bump sup bound must be < 1");
    return f;
}

BeltramiField BeltramiField::grid_sampled(PiecewiseField pw) {
    pw.grid.validate();
    if (static_cast<int>(pw.cellValues.size()) != pw.grid.cellCount())
        throw Error(ErrorCode::InvalidArgument, "grid sample count does not match m*m");
    if (pw.supNorm() >= 1.0) throw Error(ErrorCode::InvalidArgument, "sample with modulus >= 1");
    pw.outsideValue = 0.0;
    BeltramiField f;
    f.kind_ = FieldKind::GridSampled;
    f.samples_ = std::move(pw);
    return f;
}

BeltramiField BeltramiField::external(const std::string& path) {
    BeltramiField f = load_field(path);
    f.kind_ = FieldKind::External;
    f.path_ = path;
    return f;
}

cplx BeltramiField::value(cplx z) const {
    switch (kind_) {
        case FieldKind::Zero: return 0.0;
        case FieldKind::Constant: return amp_;
        case FieldKind::VerticalStrips: {
            long k = static_cast<long>(std::floor(z.real() / radius_));
            return (k % 2 != 0) ? amp_ : cplx{};
        }
        case FieldKind::SmoothBump: {
            cplx d = (z - center_) / radius_;
            return amp_ * beta_profile(d.real(), profile_).p * beta_profile(d.imag(), profile_).p;
        }
        case FieldKind::GridSampled:
        case FieldKind::External: return samples_->value(z);
    }
    return 0.0;
}

bool BeltramiField::hasExactDerivatives() const {
    return kind_ == FieldKind::Zero || kind_ == FieldKind::Constant ||
           kind_ == FieldKind::SmoothBump;
}

Jet BeltramiField::jet(cplx z) const {
    Jet j{};
    switch (kind_) {
        case FieldKind::Zero: return j;
        case FieldKind::Constant: j.v = amp_; return j;
        case FieldKind::SmoothBump: {
            cplx d = (z - center_) / radius_;
            auto px = beta_profile(d.real(), profile_);
            auto py = beta_profile(d.imag(), profile_);
            const double r1 = 1.0 / radius_, r2 = r1 * r1;
            j.v = amp_ * px.p * py.p;
            j.x = amp_ * px.d1 * py.p * r1;
            j.y = amp_ * px.p * py.d1 * r1;
            j.xx = amp_ * px.d2 * py.p * r2;
            j.xy = amp_ * px.d1 * py.d1 * r2;
            j.yy = amp_ * px.p * py.d2 * r2;
            return j;
        }
        default:
            throw Error(ErrorCode::InvalidArgument,
                        std::string("no exact derivatives for field kind ") + field_kind_name(kind_));
    }
}

double BeltramiField::supBound() const {
    switch (kind_) {
        case FieldKind::Zero: return 0.0;
        case FieldKind::Constant:
        case FieldKind::VerticalStrips: return std::abs(amp_);
        case FieldKind::SmoothBump: {
            if (profile_ == BumpProfile::Tensor) return std::abs(amp_);
            // max of s(1-s^2)^3 is at s = 1/sqrt(7)
            const double s = 1.0 / std::sqrt(7.0);
            const double m = s * std::pow(1.0 - s * s, 3);
            return std::abs(amp_) * m * m;
        }
        case FieldKind::GridSampled:
        case FieldKind::External: return samples_->supNorm();
    }
    return 0.0;
}

double BeltramiField::supportRadius() const {
    switch (kind_) {
        case FieldKind::Zero: return 0.0;
        case FieldKind::Constant:
        case FieldKind::VerticalStrips: return std::numeric_limits<double>::infinity();
        case FieldKind::SmoothBump: return std::abs(center_) + radius_ * std::sqrt(2.0);
        case FieldKind::GridSampled:
        case FieldKind::External:
            return std::abs(samples_->grid.origin) + samples_->grid.halfWidth * std::sqrt(2.0);
    }
    return 0.0;
}

BeltramiField BeltramiField::scaled(cplx t) const {
    BeltramiField f = *this;
    f.amp_ *= t;
    if (f.samples_) f.samples_ = f.samples_->scaled(t);
    if (f.supBound() >= 1.0) throw Error(ErrorCode::InvalidArgument, "scaled field has sup >= 1");
    return f;
}

std::function<cplx(cplx)> BeltramiField::fn() const {
    BeltramiField copy = *this;
    return [copy](cplx z) { return copy.value(z); };
}

AveragingTransform AveragingTransform::cayley() {
    return {"cayley", [](cplx m) { return (1.0 + m) / (1.0 - m); },
            [](cplx n) { return (n - 1.0) / (n + 1.0); }};
}

PiecewiseField average_field(const BeltramiField& field, const GridSpec& grid,
                             const std::optional<AveragingTransform>& transform) {
    grid.validate();
    if (field.supBound() >= 1.0) throw Error(ErrorCode::InvalidArgument, "field sup bound >= 1");
    auto fwd = [&](cplx m) { return transform ? transform->forward(m) : m; };
    auto inv = [&](cplx n) { return transform ? transform->inverse(n) : n; };
    PiecewiseField out(grid);
    const int m = grid.cellsPerSide;

    if (const PiecewiseField* src = field.samples()) {
        const GridSpec& g = src->grid;
        const int ms = g.cellsPerSide;
        if (!(g.halfWidth == grid.halfWidth && g.origin == grid.origin && ms % m == 0))
            throw Error(ErrorCode::InvalidArgument,
                        "grid-sampled field resolution does not match the target grid");
        const int k = ms / m;
        for (int iy = 0; iy < m; ++iy)
            for (int ix = 0; ix < m; ++ix) {
                cplx acc = 0.0;
                for (int b = 0; b < k; ++b)
                    for (int a = 0; a < k; ++a) acc += fwd(src->at(ix * k + a, iy * k + b));
                cplx v = inv(acc / double(k * k));
                if (std::abs(v) >= 1.0)
                    throw Error(ErrorCode::DegenerateGeometry, "cell average has modulus >= 1");
                out.at(ix, iy) = v;
            }
        return out;
    }

    const double h = 0.5 * grid.cellSide();
    for (int iy = 0; iy < m; ++iy)
        for (int ix = 0; ix < m; ++ix) {
            cplx c = grid.cellCenter(ix, iy);
            cplx acc = 0.0;
            for (int b = 0; b < 4; ++b)
                for (int a = 0; a < 4; ++a) {
                    cplx z = c + cplx(h * kGauss4Nodes[a], h * kGauss4Nodes[b]);
                    acc += kGauss4Weights[a] * kGauss4Weights[b] * fwd(field.value(z));
                }
            cplx v = inv(acc / 4.0);
            if (!(std::abs(v) < 1.0))
                throw Error(ErrorCode::DegenerateGeometry, "cell average has modulus >= 1");
            out.at(ix, iy) = v;
        }
    return out;
}

double l1_distance(const FieldFn& f1, const FieldFn& f2, const Rect& region, int resolution) {
    const int n = std::max(resolution, 1);
    const double dx = (region.x1 - region.x0) / n, dy = (region.y1 - region.y0) / n;
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            cplx z(region.x0 + (i + 0.5) * dx, region.y0 + (j + 0.5) * dy);
            acc += std::abs(f1(z) - f2(z));
        }
    return acc * dx * dy;
}

BeltramiField load_field(const std::string& path, const std::string& format) {
    if (format != "json") throw Error(ErrorCode::InvalidArgument, "unsupported field format " + format);
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open field file " + path);
    nlohmann::json j;
    try {
        in >> j;
        PiecewiseField pw;
        pw.grid.halfWidth = j.at("grid").at("L").get<double>();
        pw.grid.cellsPerSide = j.at("grid").at("m").get<int>();
        if (j.at("grid").contains("origin")) {
            auto o = j["grid"]["origin"];
            pw.grid.origin = {o.at(0).get<double>(), o.at(1).get<double>()};
        }
        pw.grid.validate();
        const auto& vals = j.at("values");
        if (!vals.is_array() || static_cast<int>(vals.size()) != pw.grid.cellCount())
            throw Error(ErrorCode::ParseError, "field file needs m*m values");
        for (const auto& v : vals) {
            cplx z = v.is_number() ? cplx(v.get<double>(), 0.0)
                                   : cplx(v.at(0).get<double>(), v.at(1).get<double>());
            if (!(std::abs(z) < 1.0))
                throw Error(ErrorCode::InvalidArgument, "field sample with modulus >= 1");
            pw.cellValues.push_back(z);
        }
        return BeltramiField::grid_sampled(std::move(pw));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed field file: ") + e.what());
    }
}

}  // namespace simsurf

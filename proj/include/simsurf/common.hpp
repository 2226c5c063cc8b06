#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace simsurf {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline const cplx kI{0.0, 1.0};

enum class ErrorCode {
    InvalidArgument,
    ParseError,
    PoleProximity,
    StructuralError,
    DegenerateGeometry,
    UnsupportedResidue,
    NonIntegrable,
    QuadratureFailure,
    StepUnderflow,
    NoConnection,
    FacePathObstruction,
    SolverStagnation,
    PoleCollision,
    NewtonNonConvergence,
    InsufficientData,
    Io
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// z -> a z + b
struct AffineMap {
    cplx a{1.0, 0.0};
    cplx b{0.0, 0.0};

    cplx operator()(cplx z) const { return a * z + b; }
    AffineMap inverse() const { return {1.0 / a, -b / a}; }
    // (*this) o other
    AffineMap after(const AffineMap& other) const { return {a * other.a, a * other.b + b}; }

    // unique map with p0 -> q0, p1 -> q1
    static AffineMap through(cplx p0, cplx p1, cplx q0, cplx q1) {
        cplx a = (q1 - q0) / (p1 - p0);
        return {a, q0 - a * p0};
    }
};

inline double cross(cplx u, cplx v) { return u.real() * v.imag() - u.imag() * v.real(); }

}  // namespace simsurf

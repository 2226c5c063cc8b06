#pragma once

#include "simsurf/christoffel.hpp"
#include "simsurf/common.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace simsurf {

struct PolylinePath {
    std::vector<cplx> vertices;
    bool closed = false;

    size_t segmentCount() const {
        if (vertices.size() < 2) return 0;
        return closed ? vertices.size() : vertices.size() - 1;
    }
    cplx segStart(size_t i) const { return vertices[i]; }
    cplx segEnd(size_t i) const { return vertices[(i + 1) % vertices.size()]; }
    PolylinePath reversed() const;
};

struct TransportResult {
    cplx tau{};
    cplx holonomyFactor{1.0, 0.0};
    std::vector<int> windingRecord;  // signed branch-cut crossings per pole
};

double scene_diameter(const ChristoffelSymbol& sym, const std::vector<cplx>& extra = {});

// int zeta along the path, log branches followed continuously; poleClearance < 0 -> 1e-9 * diameter
TransportResult segment_log_integral(const ChristoffelSymbol& sym, const PolylinePath& path,
                                     double poleClearance = -1.0);
cplx parallel_transport(const ChristoffelSymbol& sym, const PolylinePath& path, cplx v0,
                        double poleClearance = -1.0);

// Gauss-Legendre line integral for symbols that are not rational
cplx line_integral(const std::function<cplx(cplx)>& zeta, const PolylinePath& path,
                   int piecesPerSegment = 8);

// Poles with nonzero residue, the only ones that shape a development.
struct ActivePoles {
    std::vector<cplx> z;
    std::vector<cplx> res;
    std::vector<int> source;  // index into the symbol's pole list

    static ActivePoles from(const ChristoffelSymbol& sym, double minResidue = 0.0);
    int find(int poleIndex) const;
    size_t size() const { return z.size(); }
};

struct DevelopOptions {
    double eta = 1.0;                 // panel admissibility: singularity distance >= eta * length
    double tailLength = 1.0 / 4096;   // parameter length of the product-integration end panel
    int maxPanels = 20000;
    double clearance = 1e-13;         // absolute distance treated as hitting a pole
};

struct SegmentDevelopment {
    cplx value{};        // phi(e) - phi(b) for phi'(b) = 1
    cplx endFactor{};    // phi'(e)/phi'(b) when e is not a pole
    cplx dEnd{};         // d value / d e
    std::vector<cplx> dActive;  // d value / d z_k over the active poles
    int panels = 0;
};

// Straight development from b to e. endActive is the active index of the pole at e, or -1.
SegmentDevelopment develop_segment(const ActivePoles& poles, cplx b, cplx e, int endActive,
                                   bool gradient, const DevelopOptions& opt = {});

struct DevelopedChart {
    cplx z0{};
    cplx germValue{};
    cplx germDeriv{1.0, 0.0};
    PolylinePath path;
    std::vector<cplx> values;       // phi at the path vertices
    std::vector<cplx> derivatives;  // phi' at the path vertices (NaN at a terminal pole)
    std::optional<cplx> restingPlace;
    int terminalPole = -1;
};

DevelopedChart develop_chart(const ChristoffelSymbol& sym, cplx z0, cplx germValue, cplx germDeriv,
                             const PolylinePath& path, const DevelopOptions& opt = {});

// phi and phi' at z by straight development from z0
std::pair<cplx, cplx> develop_point(const ChristoffelSymbol& sym, cplx z0, cplx germValue,
                                    cplx germDeriv, cplx z, const DevelopOptions& opt = {});

enum class Termination { Captured, DomainExit, MaxTime };
const char* termination_name(Termination t);

struct GeodesicOptions {
    double captureRadius = -1.0;  // < 0: 1e-4 * scene diameter
    double domainRadius = -1.0;   // < 0: 20 * scene diameter around the scene centre
    double initialStep = 1e-3;
    int maxSteps = 200000;
    // stop once the trace is this far from `watch` after having been closer (0 = off)
    cplx watch{};
    double watchRadius = 0.0;
    double leaveFactor = 0.0;
};

struct GeodesicTrace {
    PolylinePath path;
    std::vector<double> times;
    std::vector<cplx> velocities;
    Termination reason = Termination::MaxTime;
    int capturedPole = -1;
    bool enteredWatch = false;
    size_t watchEntry = 0;  // index of the first sample inside watchRadius
};

// z' = v, v' = -zeta(z) v^2 with an adaptive Dormand-Prince 5(4) scheme
GeodesicTrace trace_geodesic(const ChristoffelSymbol& sym, cplx z0, cplx v0, double maxTime,
                             double tol = 1e-10, const GeodesicOptions& opt = {});

struct SaddleConnection {
    PolylinePath path;
    double miss = 0.0;
    double launchAngle = 0.0;
    int iterations = 0;
    bool captured = false;
};

// from and to are pole positions of sym (or marked points); initialDirection seeds the launch
SaddleConnection shoot_saddle_connection(const ChristoffelSymbol& sym, cplx from, cplx initialDirection,
                                         cplx to, double tol = 1e-9);

}  // namespace simsurf

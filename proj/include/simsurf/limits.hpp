#pragma once

#include "simsurf/fields.hpp"
#include "simsurf/transport.hpp"
#include "simsurf/uniformize.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace simsurf {

// h(c) = -(1/2pi) (2 mu_xy/(1-mu^2) + 4 mu mu_x mu_y/(1-mu^2)^2)
cplx limit_density(const BeltramiField& field, cplx c, double fdScale = 1e-5);

struct LimitDensity {
    BeltramiField field;
    double fdScale = 1e-5;

    cplx operator()(cplx c) const { return limit_density(field, c, fdScale); }
    // density of the residue measure: res ~ -i h dA
    cplx measure(cplx c) const { return -kI * limit_density(field, c, fdScale); }
};

struct LambdaExpansionRow {
    double eps = 0.0;
    cplx logLambda{};
    cplx scaled{};    // log_p Lambda / eps^2
    cplx expected{};  // 2 pi h(c)
    double defect = 0.0;
};

std::vector<LambdaExpansionRow> lambda_expansion_check(const BeltramiField& field, cplx c,
                                                       const std::vector<double>& epsList);

struct Atom {
    cplx location;
    cplx weight;
};

struct AtomicMeasure {
    std::vector<Atom> atoms;
    std::string provenance;  // "source" or "pushforward"

    double totalMass() const;
    cplx totalWeight() const;
};

AtomicMeasure atomic_measure(const StraighteningMap& map, bool pushforward, double minWeight = 1e-14);

cplx weak_pairing(const AtomicMeasure& m, const std::function<cplx(cplx)>& tau);
// midpoint quadrature of density * tau over the rectangle
cplx weak_pairing(const std::function<cplx(cplx)>& density, const Rect& region, int resolution,
                  const std::function<cplx(cplx)>& tau);
double density_mass(const std::function<cplx(cplx)>& density, const Rect& region, int resolution);

struct TruncatedSymbol {
    ChristoffelSymbol symbol;
    std::vector<int> removed;  // indices into the base symbol
    double cutoff = 0.0;
    cplx pathStart{}, pathEnd{};
};

TruncatedSymbol truncated_symbol(const ChristoffelSymbol& sym, cplx pathStart, cplx pathEnd, double cutoff);

// Image cells of a source sampling, each carrying the mass of its source cell.
struct LimitConnection {
    std::vector<cplx> centres;
    std::vector<cplx> masses;
    std::vector<std::array<cplx, 4>> cells;  // image quadrilaterals, ccw
    std::vector<double> radii;               // circumradius of each image cell about its centre
    bool coversSupport = true;
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;   // bounding box of the images
};

// density lives on the source plane; f maps source to target; region must cover the support
LimitConnection make_limit_connection(const std::function<cplx(cplx)>& density,
                                      const std::function<cplx(cplx)>& f, const Rect& region,
                                      int resolution, bool coversSupport = true);

// int g(s)/(z-s) dA(s)
cplx limit_symbol(const LimitConnection& conn, cplx z);

// -(d_A B)/(A B) with A = f_x, B = f_y at the preimage of z
cplx frame_connection(const std::function<cplx(cplx)>& f, cplx z, double step, cplx seed);
cplx frame_connection(const std::function<cplx(cplx)>& f, cplx z, double step);

struct TransportLimitRow {
    int refinement = 0;
    double rowY = 0.0;
    cplx discrete{};
    cplx limit{};
    double defect = 0.0;
    int removed = 0;
    double runtimeMs = 0.0;
};

struct ProbeSegment {
    double y = 0.0;
    double xStart = -1.5, xEnd = 1.5;
    int samples = 64;
};

// rows follow the source segment snapped to the nearest cell-centre row of each grid
std::vector<TransportLimitRow> transport_limit_compare(const std::vector<const StraighteningMap*>& maps,
                                                       const ProbeSegment& seg,
                                                       const LimitConnection& reference,
                                                       double cutoffFraction = 1.0 / 20.0);

PolylinePath probe_path(const StraighteningMap& map, const ProbeSegment& seg, double* rowY = nullptr);

}  // namespace simsurf

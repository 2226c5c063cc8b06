#pragma once

#include "simsurf/common.hpp"
#include "simsurf/fields.hpp"

#include <optional>
#include <string>
#include <vector>

namespace simsurf {

struct PlanarPolygon {
    int id = 0;
    std::vector<cplx> vertices;  // region on the left of the boundary walk
    bool bounded = true;
    std::vector<cplx> markedPoints;
};

struct EdgeSlot {
    int polygon = 0;
    int edge = 0;  // edge k runs from vertex k to vertex k+1
    bool operator==(const EdgeSlot& o) const { return polygon == o.polygon && edge == o.edge; }
};

struct EdgePairing {
    EdgeSlot first, second;
    AffineMap map;  // sends first onto second, start -> end
};

struct Flag {
    int polygon = 0;
    int vertex = 0;
    int edgeBefore = 0;
};

struct VertexCycle {
    std::vector<Flag> flags;
    std::vector<double> sectorAngles;
    std::vector<cplx> transitions;  // linear part of the map to the next flag
    double totalAngle = 0.0;
    double dilation = 1.0;
    double signedAngle = 0.0;
    cplx residue{};
    cplx monodromyFactor{1.0, 0.0};
    bool infinite = false;
    int corner = -1;  // lattice corner index for grid complexes
};

struct GluingComplex {
    std::vector<PlanarPolygon> polygons;
    std::vector<EdgePairing> pairings;
    std::vector<VertexCycle> cycles;
    std::vector<int> sourceCorrespondence;  // grid corner -> cycle index
    std::optional<GridSpec> grid;
    std::vector<cplx> cellMu;
    int exteriorPolygon = -1;
    std::optional<VertexCycle> infinityCycle;

    int eulerCharacteristic() const;
    // cycle containing (polygon, vertex)
    int cycleOf(int polygon, int vertex) const;
    cplx finiteResidueSum() const;
};

// Pairs every edge slot with its partner; throws StructuralError on an incomplete involution.
GluingComplex make_complex(std::vector<PlanarPolygon> polygons, std::vector<EdgePairing> pairings);

GluingComplex build_grid_complex(const PiecewiseField& pw);

std::vector<VertexCycle> vertex_cycles(const GluingComplex& complex);

// (log lambda + i sigma)/(2 pi i) - 1
cplx residue_of_cycle(const VertexCycle& cycle);
// Log_p(lambda e^{i sigma})/(2 pi i); agrees with residue_of_cycle when sigma is in (pi, 3 pi)
cplx principal_residue(const VertexCycle& cycle);

double sector_angle(const PlanarPolygon& p, int vertex);

struct CornerMonodromy {
    cplx Lambda;
    cplx logLambda;
    cplx residue;
};
// quadrants: 0 = NE, 1 = NW, 2 = SW, 3 = SE of the corner
CornerMonodromy corner_monodromy(cplx M0, cplx M1, cplx M2, cplx M3);

struct LocalModelChart {
    cplx alpha{1.0, 0.0};          // similarity charts are w^alpha in the Riemann coordinate
    cplx closingExponent{1.0, 0.0};  // developed -> Riemann, 1/alpha
    cplx bandVector{0.0, kTwoPi};  // log lambda + i theta
    cplx vertex{};                 // vertex position in the frame of the first flag
    double baseAngle = 0.0;        // direction of the first flag's edge-before
    std::vector<AffineMap> placements;  // polygon of flag k -> frame of flag 0
    std::vector<double> startAngles;
    std::vector<double> sectorAngles;

    cplx monodromy() const { return std::exp(kTwoPi * kI * alpha); }
    cplx developed(int flag, cplx p) const;  // log-lifted point in the stacked sector, as log
    cplx toRiemann(int flag, cplx p) const;
};

LocalModelChart local_model_chart(const GluingComplex& complex, const VertexCycle& cycle);

}  // namespace simsurf

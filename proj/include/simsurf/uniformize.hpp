#pragma once

#include "simsurf/christoffel.hpp"
#include "simsurf/gluing.hpp"
#include "simsurf/transport.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace simsurf {

struct FaceTarget {
    int faceId = 0;
    std::vector<cplx> vertices;
    std::vector<cplx> normalized;  // first two vertices sent to 0 and 1

    static FaceTarget from(int faceId, std::vector<cplx> vertices);
};

// Pole index -1 in a face stands for the point at infinity.
struct ParameterProblem {
    std::vector<cplx> residues;
    std::vector<cplx> positions;
    cplx infinityResidue{-2.0, 0.0};
    std::vector<int> pinned;
    std::vector<std::vector<int>> faces;  // boundary poles, ccw
    std::vector<FaceTarget> targets;
    std::vector<int> cyclePole;  // vertex cycle -> pole (-1 for infinity)

    std::vector<int> freePoles() const;
    size_t residualSize() const;
    ChristoffelSymbol symbol() const;
};

// grid complexes: poles are the lattice corners, pinned = two corner indices (default 0 and m)
ParameterProblem make_parameter_problem(const GluingComplex& complex, std::array<int, 2> pinned = {-1, -1});

struct FaceConfiguration {
    int faceId = 0;
    cplx basepoint{};
    bool fallbackBasepoint = false;
    std::vector<cplx> restingPlaces;  // phi(pole) for phi(basepoint) = 0, phi'(basepoint) = 1
    std::vector<cplx> normalized;
};

std::vector<FaceConfiguration> per_map(const ChristoffelSymbol& sym, const ParameterProblem& problem,
                                       const DevelopOptions& opt = {});

// stacked normalized[k] - target for k >= 2 over all faces
std::vector<cplx> per_residual(const std::vector<FaceConfiguration>& conf,
                               const std::vector<FaceTarget>& targets);

struct SolverOptions {
    double tol = 1e-11;          // max |residual component|
    int maxIter = 40;            // LM iterations per continuation step
    int continuationSteps = 4;
    double minStep = 1.0 / 1024;
    double lambda0 = 1e-9;
    double gradTol = 1e-15;
    double collisionFactor = 1e-6;
    bool analyticJacobian = true;
    double fdStep = 1e-7;
    cplx amplitude{1.0, 0.0};  // solve for amplitude * mu
    std::array<int, 2> pinned{-1, -1};
    DevelopOptions develop;
    std::function<void(const std::string&)> log;
};

struct SolveReport {
    std::vector<double> residualHistory;
    std::vector<double> continuation;  // accepted continuation parameters
    std::vector<int> iterationsPerStep;
    int iterations = 0;
    int rejectedSteps = 0;
    double finalResidual = 0.0;
    double seconds = 0.0;
    bool converged = false;
};

struct StraighteningMap {
    ChristoffelSymbol symbol;
    ParameterProblem problem;
    std::vector<cplx> basepoints;       // per face
    std::vector<AffineMap> alignments;  // s_j
    std::optional<GridSpec> grid;
    std::vector<cplx> cellMu;           // field values actually solved for
    AffineMap normalization;            // accumulated post-composition
    SolveReport report;

    cplx pole(int k) const { return symbol.poles[k].z; }
};

StraighteningMap solve_parameter_problem(const GluingComplex& complex, const SolverOptions& opt = {});

// Jacobian of per_residual over the free poles; analytic or forward differences
struct ResidualJacobian {
    std::vector<cplx> residual;
    std::vector<std::vector<cplx>> rows;
};
ResidualJacobian residual_jacobian(const ParameterProblem& problem, bool analytic, double fdStep = 1e-7,
                                   const DevelopOptions& opt = {});

cplx evaluate_straightening(const StraighteningMap& map, cplx z);

StraighteningMap post_compose(const StraighteningMap& map, const AffineMap& A);
StraighteningMap normalize(const StraighteningMap& map);

struct SkeletonEdge {
    int poleA = -1, poleB = -1;  // -1 = infinity
    PolylinePath path;
    bool ok = false;
    bool straight = false;
    double miss = 0.0;
    std::string error;
};

struct Skeleton {
    std::vector<cplx> vertices;  // finite pole positions by pole index
    bool hasInfinity = false;
    std::vector<SkeletonEdge> edges;
    std::vector<std::vector<int>> faces;

    int vertexCount() const { return static_cast<int>(vertices.size()) + (hasInfinity ? 1 : 0); }
    int failedEdges() const;
};

Skeleton skeleton(const StraighteningMap& map, const GluingComplex& source, double tol = 1e-7);

// true if no two edges meet away from shared endpoints (endpoint disks of radius endpointSlack excluded)
bool edges_disjoint(const Skeleton& sk, double endpointSlack);

}  // namespace simsurf

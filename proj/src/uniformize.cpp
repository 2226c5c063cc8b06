#include "simsurf/uniformize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace simsurf {

FaceTarget FaceTarget::from(int faceId, std::vector<cplx> vertices) {
    if (vertices.size() < 3) throw Error(ErrorCode::InvalidArgument, "face target needs 3 vertices");
    FaceTarget t;
    t.faceId = faceId;
    t.vertices = std::move(vertices);
    const cplx v0 = t.vertices[0], d = t.vertices[1] - v0;
    if (d == 0.0) throw Error(ErrorCode::DegenerateGeometry, "first two target vertices coincide");
    for (size_t k = 0; k < t.vertices.size(); ++k) t.normalized.push_back((t.vertices[k] - v0) / d);
    t.normalized[0] = 0.0;
    t.normalized[1] = 1.0;
    return t;
}

std::vector<int> ParameterProblem::freePoles() const {
    std::vector<int> out;
    for (int k = 0; k < static_cast<int>(positions.size()); ++k)
        if (std::find(pinned.begin(), pinned.end(), k) == pinned.end()) out.push_back(k);
    return out;
}

size_t ParameterProblem::residualSize() const {
    size_t n = 0;
    for (const auto& f : faces) n += f.size() - 2;
    return n;
}

ChristoffelSymbol ParameterProblem::symbol() const {
    ChristoffelSymbol s;
    for (size_t k = 0; k < positions.size(); ++k) s.poles.push_back({positions[k], residues[k]});
    s.impliedInfinityResidue = infinityResidue;
    return s;
}

ParameterProblem make_parameter_problem(const GluingComplex& complex, std::array<int, 2> pinned) {
    ParameterProblem P;
    P.cyclePole.assign(complex.cycles.size(), -1);
    if (complex.grid) {
        const GridSpec& g = *complex.grid;
        const int m = g.cellsPerSide;
        for (int j = 0; j <= m; ++j)
            for (int i = 0; i <= m; ++i) {
                int ci = complex.sourceCorrespondence[g.cornerIndex(i, j)];
                P.positions.push_back(g.corner(i, j));
                P.residues.push_back(complex.cycles[ci].residue);
                P.cyclePole[ci] = g.cornerIndex(i, j);
            }
        P.infinityResidue = complex.infinityCycle ? complex.infinityCycle->residue : cplx(-2.0);
        for (int iy = 0; iy < m; ++iy)
            for (int ix = 0; ix < m; ++ix) {
                int id = g.cellIndex(ix, iy);
                P.faces.push_back({g.cornerIndex(ix, iy), g.cornerIndex(ix + 1, iy), g.cornerIndex(ix + 1, iy + 1),
                                   g.cornerIndex(ix, iy + 1)});
                P.targets.push_back(FaceTarget::from(id, complex.polygons[id].vertices));
            }
        int a = pinned[0] < 0 ? 0 : pinned[0];
        int b = pinned[1] < 0 ? m : pinned[1];
        if (a == b || a >= g.cornerCount() || b >= g.cornerCount())
            throw Error(ErrorCode::InvalidArgument, "pinned corners must be two distinct lattice corners");
        P.pinned = {a, b};
        return P;
    }
    // three-vertex gluing: cycles 0, 1 at -1, 1 and the last one at infinity
    if (complex.cycles.size() != 3)
        throw Error(ErrorCode::StructuralError, "non-grid complexes must have exactly three vertices");
    P.positions = {-1.0, 1.0};
    P.residues = {complex.cycles[0].residue, complex.cycles[1].residue};
    P.infinityResidue = complex.cycles[2].residue;
    P.cyclePole = {0, 1, -1};
    P.pinned = {0, 1};
    for (const auto& poly : complex.polygons) {
        if (!poly.bounded) continue;
        std::vector<int> f;
        for (int v = 0; v < static_cast<int>(poly.vertices.size()); ++v)
            f.push_back(P.cyclePole[complex.cycleOf(poly.id, v)]);
        P.faces.push_back(f);
        P.targets.push_back(FaceTarget::from(poly.id, poly.vertices));
    }
    return P;
}

namespace {

struct FaceDevelopment {
    cplx basepoint{};
    bool fallback = false;
    std::vector<cplx> V;
    std::vector<std::vector<cplx>> dV;  // dV[k][pole]
};

struct Workspace {
    const ChristoffelSymbol& sym;
    ActivePoles ap;
    ChristoffelSymbol inv;
    ActivePoles apInv;
    int infActive = -1;

    explicit Workspace(const ChristoffelSymbol& s) : sym(s), ap(ActivePoles::from(s, 1e-14)) {}

    void prepareInverse() {
        if (!inv.poles.empty() || infActive >= 0) return;
        inv = pullback_inversion(sym);
        apInv = ActivePoles::from(inv, 1e-14);
        for (size_t k = 0; k < apInv.size(); ++k)
            if (apInv.z[k] == 0.0) infActive = static_cast<int>(k);
    }
};

std::vector<cplx> basepoint_candidates(const std::vector<int>& face, const ChristoffelSymbol& sym) {
    const int n = static_cast<int>(face.size());
    bool hasInf = std::find(face.begin(), face.end(), -1) != face.end();
    if (hasInf) {
        for (int i = 0; i < n; ++i) {
            int a = face[i], b = face[(i + 1) % n];
            if (a >= 0 && b >= 0) {
                cplx p = sym.poles[a].z, q = sym.poles[b].z;
                cplx mid = 0.5 * (p + q);
                return {mid + 0.5 * kI * (q - p), mid + 0.25 * kI * (q - p)};
            }
        }
        throw Error(ErrorCode::StructuralError, "face without two consecutive finite vertices");
    }
    cplx c = 0.0;
    for (int k : face) c += sym.poles[k].z;
    c /= double(n);
    double best = -1.0;
    cplx diag = c;
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            double d = std::abs(sym.poles[face[i]].z - sym.poles[face[j]].z);
            if (d > best) best = d, diag = 0.5 * (sym.poles[face[i]].z + sym.poles[face[j]].z);
        }
    return {c, diag};
}

FaceDevelopment develop_face_from(Workspace& ws, const std::vector<int>& face, cplx b, bool gradient,
                                  const DevelopOptions& opt) {
    FaceDevelopment fd;
    fd.basepoint = b;
    const size_t np = ws.sym.poles.size();
    for (int idx : face) {
        if (idx < 0) {
            ws.prepareInverse();
            SegmentDevelopment sd = develop_segment(ws.apInv, 1.0 / b, 0.0, ws.infActive, false, opt);
            fd.V.push_back(-b * b * sd.value);
            if (gradient) fd.dV.emplace_back(np, cplx{});
            continue;
        }
        int ea = ws.ap.find(idx);
        SegmentDevelopment sd = develop_segment(ws.ap, b, ws.sym.poles[idx].z, ea, gradient, opt);
        fd.V.push_back(sd.value);
        if (gradient) {
            std::vector<cplx> row(np, cplx{});
            for (size_t a = 0; a < ws.ap.size(); ++a) {
                if (ws.ap.source[a] == idx) continue;
                row[ws.ap.source[a]] += sd.dActive[a];
            }
            row[idx] += sd.dEnd;
            fd.dV.push_back(std::move(row));
        }
    }
    return fd;
}

FaceDevelopment develop_face(Workspace& ws, const std::vector<int>& face, bool gradient,
                             const DevelopOptions& opt) {
    auto cands = basepoint_candidates(face, ws.sym);
    for (size_t i = 0; i < cands.size(); ++i) {
        try {
            FaceDevelopment fd = develop_face_from(ws, face, cands[i], gradient, opt);
            fd.fallback = i > 0;
            return fd;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::PoleProximity && e.code() != ErrorCode::QuadratureFailure) throw;
        }
    }
    throw Error(ErrorCode::FacePathObstruction, "no admissible basepoint for a face development");
}

FaceConfiguration to_configuration(int faceId, const FaceDevelopment& fd) {
    FaceConfiguration c;
    c.faceId = faceId;
    c.basepoint = fd.basepoint;
    c.fallbackBasepoint = fd.fallback;
    c.restingPlaces = fd.V;
    const cplx d = fd.V[1] - fd.V[0];
    if (d == 0.0) throw Error(ErrorCode::DegenerateGeometry, "coincident resting places");
    for (cplx v : fd.V) c.normalized.push_back((v - fd.V[0]) / d);
    c.normalized[0] = 0.0;
    c.normalized[1] = 1.0;
    return c;
}

double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (cplx x : v) m = std::max(m, std::abs(x));
    return m;
}

double sum_norm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (cplx x : v) s += std::norm(x);
    return s;
}

std::vector<cplx> residual_at(const ParameterProblem& P, const DevelopOptions& opt) {
    ChristoffelSymbol sym = P.symbol();
    return per_residual(per_map(sym, P, opt), P.targets);
}

double min_separation(const std::vector<cplx>& z) {
    double d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < z.size(); ++i)
        for (size_t j = i + 1; j < z.size(); ++j) d = std::min(d, std::abs(z[i] - z[j]));
    return d;
}

double diameter_of(const std::vector<cplx>& z) {
    ChristoffelSymbol s;
    for (cplx p : z) s.poles.push_back({p, 0.0});
    return scene_diameter(s);
}

AffineMap fit_alignment(const std::vector<cplx>& V, const std::vector<cplx>& P) {
    cplx mv = 0.0, mp = 0.0;
    for (size_t k = 0; k < V.size(); ++k) mv += V[k], mp += P[k];
    mv /= double(V.size());
    mp /= double(P.size());
    cplx num = 0.0;
    double den = 0.0;
    for (size_t k = 0; k < V.size(); ++k) {
        num += std::conj(V[k] - mv) * (P[k] - mp);
        den += std::norm(V[k] - mv);
    }
    if (den == 0.0) throw Error(ErrorCode::DegenerateGeometry, "collapsed face in alignment");
    cplx a = num / den;
    return {a, mp - a * mv};
}

void log_line(const SolverOptions& opt, const std::string& s) {
    if (opt.log) opt.log(s);
}

}  // namespace

std::vector<FaceConfiguration> per_map(const ChristoffelSymbol& sym, const ParameterProblem& problem,
                                       const DevelopOptions& opt) {
    if (sym.poles.size() != problem.positions.size())
        throw Error(ErrorCode::InvalidArgument, "symbol and problem disagree on the pole count");
    Workspace ws(sym);
    std::vector<FaceConfiguration> out;
    for (size_t f = 0; f < problem.faces.size(); ++f) {
        FaceDevelopment fd = develop_face(ws, problem.faces[f], false, opt);
        out.push_back(to_configuration(problem.targets[f].faceId, fd));
    }
    return out;
}

std::vector<cplx> per_residual(const std::vector<FaceConfiguration>& conf, const std::vector<FaceTarget>& targets) {
    if (conf.size() != targets.size()) throw Error(ErrorCode::InvalidArgument, "face count mismatch");
    std::vector<cplx> r;
    for (size_t f = 0; f < conf.size(); ++f) {
        if (conf[f].normalized.size() != targets[f].normalized.size())
            throw Error(ErrorCode::InvalidArgument, "vertex count mismatch");
        for (size_t k = 2; k < conf[f].normalized.size(); ++k)
            r.push_back(conf[f].normalized[k] - targets[f].normalized[k]);
    }
    return r;
}

ResidualJacobian residual_jacobian(const ParameterProblem& P, bool analytic, double fdStep,
                                   const DevelopOptions& opt) {
    ResidualJacobian J;
    const std::vector<int> freeIdx = P.freePoles();
    if (!analytic) {
        J.residual = residual_at(P, opt);
        J.rows.assign(J.residual.size(), std::vector<cplx>(freeIdx.size()));
        const double h = fdStep * diameter_of(P.positions);
        for (size_t c = 0; c < freeIdx.size(); ++c) {
            ParameterProblem Q = P;
            Q.positions[freeIdx[c]] += h;
            std::vector<cplx> r = residual_at(Q, opt);
            for (size_t i = 0; i < r.size(); ++i) J.rows[i][c] = (r[i] - J.residual[i]) / h;
        }
        return J;
    }
    ChristoffelSymbol sym = P.symbol();
    Workspace ws(sym);
    for (size_t f = 0; f < P.faces.size(); ++f) {
        FaceDevelopment fd = develop_face(ws, P.faces[f], true, opt);
        const cplx d = fd.V[1] - fd.V[0];
        for (size_t k = 2; k < fd.V.size(); ++k) {
            cplx N = (fd.V[k] - fd.V[0]) / d;
            J.residual.push_back(N - P.targets[f].normalized[k]);
            std::vector<cplx> row(freeIdx.size());
            for (size_t c = 0; c < freeIdx.size(); ++c) {
                int p = freeIdx[c];
                row[c] = ((fd.dV[k][p] - fd.dV[0][p]) - N * (fd.dV[1][p] - fd.dV[0][p])) / d;
            }
            J.rows.push_back(std::move(row));
        }
    }
    return J;
}

namespace {

struct LmResult {
    std::vector<cplx> positions;
    int iterations = 0;
    int rejected = 0;
    double residual = 0.0;
};

LmResult levenberg_marquardt(ParameterProblem P, const SolverOptions& opt, std::vector<double>& history) {
    using Mat = Eigen::MatrixXcd;
    using Vec = Eigen::VectorXcd;
    const std::vector<int> freeIdx = P.freePoles();
    const size_t nf = freeIdx.size();
    const double collision = opt.collisionFactor * diameter_of(P.positions);

    std::vector<cplx> R = residual_at(P, opt.develop);
    double r = max_abs(R), cost = sum_norm(R);
    history.push_back(r);
    LmResult out;
    double lambda = opt.lambda0;
    bool collided = false;
    for (int it = 0; it < opt.maxIter && r >= opt.tol; ++it) {
        ResidualJacobian J = residual_jacobian(P, opt.analyticJacobian, opt.fdStep, opt.develop);
        const size_t nr = J.residual.size();
        Mat Jm(nr, nf);
        Vec Rv(nr);
        for (size_t i = 0; i < nr; ++i) {
            Rv(i) = J.residual[i];
            for (size_t c = 0; c < nf; ++c) Jm(i, c) = J.rows[i][c];
        }
        Mat A = Jm.adjoint() * Jm;
        Vec g = Jm.adjoint() * Rv;
        if (g.cwiseAbs().maxCoeff() < opt.gradTol)
            throw Error(ErrorCode::SolverStagnation, "gradient vanished with residual above tolerance");
        bool accepted = false;
        while (!accepted) {
            Mat M = A;
            for (size_t c = 0; c < nf; ++c) M(c, c) += lambda * (A(c, c).real() + 1e-300);
            Vec delta = M.ldlt().solve(-g);
            ParameterProblem Q = P;
            for (size_t c = 0; c < nf; ++c) Q.positions[freeIdx[c]] += delta(c);
            bool ok = delta.allFinite();
            std::vector<cplx> Rt;
            if (ok && min_separation(Q.positions) < collision) {
                ok = false;
                collided = true;
            }
            if (ok) {
                try {
                    Rt = residual_at(Q, opt.develop);
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::StructuralError) throw;
                    ok = false;
                }
            }
            if (ok && sum_norm(Rt) < cost) {
                P = std::move(Q);
                R = std::move(Rt);
                r = max_abs(R);
                cost = sum_norm(R);
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
            } else {
                ++out.rejected;
                lambda *= 10.0;
                if (lambda > 1e12) {
                    if (collided) throw Error(ErrorCode::PoleCollision, "poles collide along the solver path");
                    throw Error(ErrorCode::SolverStagnation, "damping exhausted without decrease");
                }
            }
        }
        ++out.iterations;
        history.push_back(r);
    }
    if (r >= opt.tol) {
        std::ostringstream s;
        s << "residual " << r << " after " << out.iterations << " iterations";
        throw Error(ErrorCode::SolverStagnation, s.str());
    }
    out.positions = P.positions;
    out.residual = r;
    return out;
}

StraighteningMap assemble(const ParameterProblem& P, const DevelopOptions& opt) {
    StraighteningMap map;
    map.problem = P;
    map.symbol = P.symbol();
    Workspace ws(map.symbol);
    for (size_t f = 0; f < P.faces.size(); ++f) {
        FaceDevelopment fd = develop_face(ws, P.faces[f], false, opt);
        map.basepoints.push_back(fd.basepoint);
        map.alignments.push_back(fit_alignment(fd.V, P.targets[f].vertices));
    }
    return map;
}

}  // namespace

StraighteningMap solve_parameter_problem(const GluingComplex& complex, const SolverOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    auto seconds = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    if (!(opt.tol > 0.0) || opt.continuationSteps < 1 || !(opt.minStep > 0.0))
        throw Error(ErrorCode::InvalidArgument, "solver tolerances and steps must be positive");

    if (!complex.grid) {
        ParameterProblem P = make_parameter_problem(complex);
        double r = max_abs(residual_at(P, opt.develop));
        if (!(r < 1e-8)) {
            std::ostringstream s;
            s << "fixture residual " << r << " with no free poles";
            throw Error(ErrorCode::SolverStagnation, s.str());
        }
        StraighteningMap map = assemble(P, opt.develop);
        map.report.residualHistory = {r};
        map.report.continuation = {1.0};
        map.report.iterationsPerStep = {0};
        map.report.finalResidual = r;
        map.report.converged = true;
        map.report.seconds = seconds();
        return map;
    }

    const GridSpec g = *complex.grid;
    PiecewiseField base(g);
    base.cellValues = complex.cellMu;
    auto problemAt = [&](double s) {
        GluingComplex c = build_grid_complex(base.scaled(s * opt.amplitude));
        return make_parameter_problem(c, opt.pinned);
    };

    SolveReport rep;
    std::vector<cplx> x = problemAt(0.0).positions, xPrev;
    double s = 0.0, ds = 1.0 / opt.continuationSteps, dsPrev = 0.0;
    bool allZero = std::all_of(complex.cellMu.begin(), complex.cellMu.end(), [](cplx v) { return v == 0.0; }) ||
                   opt.amplitude == 0.0;
    if (allZero) ds = 1.0;
    ParameterProblem last;
    while (s < 1.0) {
        double sNext = std::min(1.0, s + ds);
        ParameterProblem P = problemAt(sNext);
        std::vector<cplx> seed = x;
        if (!xPrev.empty() && dsPrev > 0.0) {
            const double q = (sNext - s) / dsPrev;
            for (size_t k = 0; k < seed.size(); ++k) seed[k] = x[k] + q * (x[k] - xPrev[k]);
        }
        for (int k : P.pinned) seed[k] = P.positions[k];
        P.positions = seed;
        try {
            LmResult lm = levenberg_marquardt(P, opt, rep.residualHistory);
            xPrev = x;
            x = lm.positions;
            dsPrev = sNext - s;
            s = sNext;
            rep.continuation.push_back(s);
            rep.iterationsPerStep.push_back(lm.iterations);
            rep.iterations += lm.iterations;
            rep.rejectedSteps += lm.rejected;
            rep.finalResidual = lm.residual;
            P.positions = x;
            last = P;
            std::ostringstream msg;
            msg << "continuation s=" << s << " iterations=" << lm.iterations << " residual=" << lm.residual;
            log_line(opt, msg.str());
        } catch (const Error& e) {
            if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::StructuralError ||
                e.code() == ErrorCode::DegenerateGeometry)
                throw;
            ds *= 0.5;
            std::ostringstream msg;
            msg << "continuation step failed at s=" << sNext << " (" << e.what() << "), step " << ds;
            log_line(opt, msg.str());
            if (ds < opt.minStep) {
                std::ostringstream w;
                w << "continuation stalled at s=" << s << ": " << e.what();
                throw Error(e.code(), w.str());
            }
        }
    }
    StraighteningMap map = assemble(last, opt.develop);
    map.grid = g;
    map.cellMu = base.scaled(opt.amplitude).cellValues;
    rep.converged = true;
    rep.seconds = seconds();
    map.report = rep;
    return map;
}

cplx evaluate_straightening(const StraighteningMap& map, cplx z) {
    if (!map.grid) throw Error(ErrorCode::InvalidArgument, "straightening evaluation needs a grid map");
    const GridSpec& g = *map.grid;
    const double s = g.cellSide();
    const cplx rel = z - g.corner(0, 0);
    const long ci = std::lround(rel.real() / s), cj = std::lround(rel.imag() / s);
    if (ci >= 0 && cj >= 0 && ci <= g.cellsPerSide && cj <= g.cellsPerSide) {
        cplx c = g.corner(int(ci), int(cj));
        if (std::abs(z - c) <= 4e-16 * (g.halfWidth + std::abs(g.origin)))
            return map.symbol.poles[g.cornerIndex(int(ci), int(cj))].z;
    }
    auto [ix, iy] = g.locate(z);
    const int face = g.cellIndex(ix, iy);
    const cplx mu = map.cellMu[face];
    const cplx w = z + mu * std::conj(z);
    const AffineMap& sa = map.alignments[face];
    const cplx b = map.basepoints[face];
    const auto& F = map.problem.faces[face];

    const cplx loc = (z - g.corner(ix, iy)) / s;
    const double u = loc.real(), v = loc.imag();
    cplx xi = (1 - u) * (1 - v) * map.pole(F[0]) + u * (1 - v) * map.pole(F[1]) + u * v * map.pole(F[2]) +
              (1 - u) * v * map.pole(F[3]);

    ActivePoles ap = ActivePoles::from(map.symbol, 1e-14);
    auto F_of = [&](cplx p, cplx& dF) {
        SegmentDevelopment sd = develop_segment(ap, b, p, -1, false);
        dF = sa.a * sd.endFactor;
        return sa(sd.value) - w;
    };
    const double scale = std::abs(w) + s;
    cplx dF;
    cplx Fv = F_of(xi, dF);
    for (int it = 0; it < 60; ++it) {
        if (std::abs(Fv) <= 1e-15 * scale) return xi;
        cplx step = Fv / dF;
        double damp = 1.0;
        bool moved = false;
        for (int h = 0; h < 30; ++h) {
            cplx trial = xi - damp * step;
            try {
                cplx dT;
                cplx Ft = F_of(trial, dT);
                if (std::abs(Ft) < std::abs(Fv) || std::abs(damp * step) < 1e-15 * (1.0 + std::abs(xi))) {
                    xi = trial;
                    Fv = Ft;
                    dF = dT;
                    moved = true;
                    break;
                }
            } catch (const Error& e) {
                if (e.code() != ErrorCode::PoleProximity && e.code() != ErrorCode::QuadratureFailure) throw;
            }
            damp *= 0.5;
        }
        if (!moved) break;
        if (std::abs(damp * step) <= 2e-16 * (1.0 + std::abs(xi))) return xi;
    }
    if (std::abs(Fv) <= 1e-11 * scale) return xi;
    std::ostringstream msg;
    msg.precision(17);
    msg << "Newton inversion stalled at " << xi << " (defect " << std::abs(Fv) << ")";
    throw Error(ErrorCode::NewtonNonConvergence, msg.str());
}

StraighteningMap post_compose(const StraighteningMap& map, const AffineMap& A) {
    if (A.a == 0.0) throw Error(ErrorCode::DegenerateGeometry, "post-composition by a constant map");
    StraighteningMap out = map;
    for (auto& p : out.symbol.poles) p.z = A(p.z);
    for (auto& z : out.problem.positions) z = A(z);
    for (auto& b : out.basepoints) b = A(b);
    for (auto& s : out.alignments) s.a /= A.a;
    out.normalization = A.after(map.normalization);
    return out;
}

StraighteningMap normalize(const StraighteningMap& map) {
    cplx f0 = evaluate_straightening(map, 0.0), f1 = evaluate_straightening(map, 1.0);
    if (std::abs(f1 - f0) <= 1e-14 * (std::abs(f0) + std::abs(f1)))
        throw Error(ErrorCode::DegenerateGeometry, "f(0) = f(1), cannot normalize");
    return post_compose(map, AffineMap::through(f0, f1, 0.0, 1.0));
}

int Skeleton::failedEdges() const {
    int n = 0;
    for (const auto& e : edges) n += e.ok ? 0 : 1;
    return n;
}

namespace {

// launch direction at `from` of the geodesic that the face chart maps onto the segment
// between the resting places of poles iA and iB of the face
std::optional<cplx> chart_launch(const ChristoffelSymbol& sym, const FaceConfiguration& conf, int iA, int iB,
                                 int poleA) {
    const cplx Va = conf.restingPlaces[iA], Vb = conf.restingPlaces[iB];
    const cplx M = 0.5 * (Va + Vb), b = conf.basepoint;
    const cplx a = sym.poles[poleA].z;
    const double D = std::abs(Vb - Va);
    cplx z = b, dphi = 1.0;
    try {
        for (int step = 1; step <= 16; ++step) {
            const cplx target = M * (step / 16.0);
            bool done = false;
            for (int it = 0; it < 40 && !done; ++it) {
                auto [phi, d] = develop_point(sym, b, 0.0, 1.0, z);
                dphi = d;
                cplx F = phi - target;
                if (std::abs(F) <= 1e-13 * (std::abs(M) + D)) done = true;
                else z -= F / d;
            }
            if (!done) return std::nullopt;
        }
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& p : sym.poles)
            if (p.z != a) nearest = std::min(nearest, std::abs(p.z - a));
        const double delta = 1e-4 * nearest;
        GeodesicOptions go;
        go.captureRadius = 0.5 * delta;
        GeodesicTrace tr = trace_geodesic(sym, z, (Va - Vb) / dphi, 0.75, 1e-11, go);
        if (tr.reason != Termination::Captured || tr.capturedPole != poleA) return std::nullopt;
        cplx best = tr.path.vertices.back() - a;
        for (cplx p : tr.path.vertices)
            if (std::abs(std::log(std::abs(p - a) / delta)) < std::abs(std::log(std::abs(best) / delta))) best = p - a;
        return best;
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

Skeleton skeleton(const StraighteningMap& map, const GluingComplex& source, double tol) {
    Skeleton sk;
    const ParameterProblem& P = map.problem;
    for (const auto& p : map.symbol.poles) sk.vertices.push_back(p.z);
    sk.hasInfinity = std::find(P.cyclePole.begin(), P.cyclePole.end(), -1) != P.cyclePole.end();
    for (const auto& poly : source.polygons) {
        std::vector<int> f;
        for (int v = 0; v < static_cast<int>(poly.vertices.size()); ++v)
            f.push_back(P.cyclePole[source.cycleOf(poly.id, v)]);
        sk.faces.push_back(f);
    }
    ActivePoles ap = ActivePoles::from(map.symbol, 1e-14);
    const bool flat = ap.size() == 0;
    ChristoffelSymbol inv;
    if (sk.hasInfinity) inv = pullback_inversion(map.symbol);
    std::vector<FaceConfiguration> conf;

    for (const auto& pr : source.pairings) {
        const auto& poly = source.polygons[pr.first.polygon];
        const int n = static_cast<int>(poly.vertices.size());
        SkeletonEdge e;
        e.poleA = P.cyclePole[source.cycleOf(poly.id, pr.first.edge)];
        e.poleB = P.cyclePole[source.cycleOf(poly.id, (pr.first.edge + 1) % n)];
        try {
            if (e.poleA >= 0 && e.poleB >= 0) {
                cplx a = map.pole(e.poleA), b = map.pole(e.poleB);
                if (flat) {
                    e.path.vertices = {a, b};
                    e.straight = true;
                } else {
                    if (conf.empty()) conf = per_map(map.symbol, P);
                    cplx dir = b - a;
                    for (size_t f = 0; f < P.faces.size(); ++f) {
                        const auto& F = P.faces[f];
                        const int nf = static_cast<int>(F.size());
                        int iA = -1;
                        for (int i = 0; i < nf && iA < 0; ++i)
                            if (F[i] == e.poleA && (F[(i + 1) % nf] == e.poleB || F[(i + nf - 1) % nf] == e.poleB))
                                iA = i;
                        if (iA < 0) continue;
                        int iB = F[(iA + 1) % nf] == e.poleB ? (iA + 1) % nf : (iA + nf - 1) % nf;
                        if (auto d = chart_launch(map.symbol, conf[f], iA, iB, e.poleA)) dir = *d;
                        break;
                    }
                    SaddleConnection sc;
                    try {
                        sc = shoot_saddle_connection(map.symbol, a, dir, b, tol);
                    } catch (const Error&) {
                        if (dir == b - a) throw;
                        sc = shoot_saddle_connection(map.symbol, a, b - a, b, tol);
                    }
                    e.path = sc.path;
                    e.miss = sc.miss;
                }
            } else if (e.poleA >= 0 || e.poleB >= 0) {
                int fin = e.poleA >= 0 ? e.poleA : e.poleB;
                cplx target = 1.0 / map.pole(fin);
                SaddleConnection sc = shoot_saddle_connection(inv, 0.0, target, target, tol);
                e.miss = sc.miss;
                // back in the original coordinate, dropping the part too close to infinity
                std::vector<cplx> pts;
                for (cplx u : sc.path.vertices)
                    if (std::abs(u) > 1e-3 * std::abs(target)) pts.push_back(1.0 / u);
                if (e.poleA < 0) std::reverse(pts.begin(), pts.end());
                e.path.vertices = pts;
            } else {
                throw Error(ErrorCode::StructuralError, "edge with both ends at infinity");
            }
            e.ok = true;
        } catch (const Error& err) {
            e.ok = false;
            e.error = err.what();
        }
        sk.edges.push_back(std::move(e));
    }
    return sk;
}

namespace {

bool segments_cross(cplx p1, cplx p2, cplx q1, cplx q2) {
    double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
    double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

bool edges_disjoint(const Skeleton& sk, double slack) {
    auto endpoint = [&](int k) -> std::optional<cplx> {
        if (k < 0) return std::nullopt;
        return sk.vertices[k];
    };
    struct Trimmed {
        std::vector<cplx> pts;
        double x0, x1, y0, y1;
    };
    std::vector<Trimmed> T;
    for (const auto& e : sk.edges) {
        Trimmed t;
        auto a = endpoint(e.poleA), b = endpoint(e.poleB);
        for (cplx p : e.path.vertices) {
            if ((a && std::abs(p - *a) < slack) || (b && std::abs(p - *b) < slack)) continue;
            t.pts.push_back(p);
        }
        t.x0 = t.y0 = std::numeric_limits<double>::infinity();
        t.x1 = t.y1 = -t.x0;
        for (cplx p : t.pts) {
            t.x0 = std::min(t.x0, p.real());
            t.x1 = std::max(t.x1, p.real());
            t.y0 = std::min(t.y0, p.imag());
            t.y1 = std::max(t.y1, p.imag());
        }
        T.push_back(std::move(t));
    }
    for (size_t i = 0; i < T.size(); ++i)
        for (size_t j = i + 1; j < T.size(); ++j) {
            const auto &A = T[i], &B = T[j];
            if (A.pts.size() < 2 || B.pts.size() < 2) continue;
            if (A.x1 < B.x0 || B.x1 < A.x0 || A.y1 < B.y0 || B.y1 < A.y0) continue;
            for (size_t a = 0; a + 1 < A.pts.size(); ++a) {
                cplx p1 = A.pts[a], p2 = A.pts[a + 1];
                double ax0 = std::min(p1.real(), p2.real()), ax1 = std::max(p1.real(), p2.real());
                double ay0 = std::min(p1.imag(), p2.imag()), ay1 = std::max(p1.imag(), p2.imag());
                if (ax1 < B.x0 || B.x1 < ax0 || ay1 < B.y0 || B.y1 < ay0) continue;
                for (size_t b = 0; b + 1 < B.pts.size(); ++b) {
                    cplx q1 = B.pts[b], q2 = B.pts[b + 1];
                    if (std::max(q1.real(), q2.real()) < ax0 || std::min(q1.real(), q2.real()) > ax1 ||
                        std::max(q1.imag(), q2.imag()) < ay0 || std::min(q1.imag(), q2.imag()) > ay1)
                        continue;
                    if (segments_cross(p1, p2, q1, q2)) return false;
                }
            }
        }
    return true;
}

}  // namespace simsurf

#include "simsurf/pipeline.hpp"

#include "simsurf/fixtures.hpp"
#include "simsurf/limits.hpp"
#include "simsurf/svg.hpp"
#include "simsurf/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>

namespace simsurf {

namespace fs = std::filesystem;
using io::json;

namespace {

const std::vector<std::string> kAllOutputs = {"field", "complex", "poles", "skeleton", "probes",
                                              "geodesics", "transport", "limits", "render"};

double positive(const json& j, const char* key, double def) {
    double v = j.value(key, def);
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, std::string("scenario: ") + key + " must be positive");
    return v;
}

// uniform in [0, 1) from the top 53 bits, identical on every platform
double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

}  // namespace

bool Scenario::wants(const std::string& o) const {
    return std::find(outputs.begin(), outputs.end(), o) != outputs.end();
}

BeltramiField Scenario::makeField() const {
    const json& f = field;
    if (kind == "zero" || kind == "triangle") return BeltramiField::zero();
    if (kind == "constant") return BeltramiField::constant(io::complex_from(f.at("c")));
    if (kind == "strips")
        return BeltramiField::vertical_strips(io::complex_from(f.value("kappa", json(0.5))), f.value("period", 1.0));
    if (kind == "bump") {
        BumpProfile prof = f.value("profile", std::string("tensor")) == "mixed" ? BumpProfile::MixedJet
                                                                               : BumpProfile::Tensor;
        return BeltramiField::smooth_bump(io::complex_from(f.value("amplitude", json(0.3))),
                                          io::complex_from(f.value("center", json::array({0.0, 0.0}))),
                                          f.value("radius", 1.5), prof);
    }
    if (kind == "xy_jet") return fixtures::xy_jet(f.value("eps", 0.2));
    if (kind == "file") {
        fs::path p = f.at("path").get<std::string>();
        if (p.is_relative() && !baseDir.empty() && !fs::exists(p)) p = fs::path(baseDir) / p;
        return BeltramiField::external(p.string());
    }
    if (kind == "grid") return BeltramiField::grid_sampled(io::field_from_json(f));
    if (kind == "single_cell") return BeltramiField::grid_sampled(fixtures::single_cell(io::complex_from(f.at("c"))));
    throw Error(ErrorCode::InvalidArgument, "scenario: unknown field kind " + kind);
}

std::string Scenario::fingerprint() const { return raw.dump(); }

Scenario parse_scenario(const json& j, const std::string& baseDir) {
    try {
        Scenario sc;
        sc.raw = j;
        sc.baseDir = baseDir;
        sc.field = j.at("field");
        sc.kind = sc.field.at("kind").get<std::string>();
        if (sc.kind == "single_cell") {
            sc.grid = fixtures::single_cell(0.0).grid;
        } else if (j.contains("grid")) {
            const json& g = j["grid"];
            sc.grid.halfWidth = positive(g, "L", 2.0);
            sc.grid.cellsPerSide = g.value("m", 8);
            if (g.contains("origin")) sc.grid.origin = io::complex_from(g["origin"]);
        }
        sc.grid.validate();
        if (j.contains("solver")) {
            const json& s = j["solver"];
            sc.solver.tol = positive(s, "tol", sc.solver.tol);
            sc.solver.maxIter = s.value("maxIter", sc.solver.maxIter);
            sc.solver.continuationSteps = s.value("continuationSteps", sc.solver.continuationSteps);
            sc.solver.lambda0 = positive(s, "lambda0", sc.solver.lambda0);
            if (sc.solver.maxIter < 1 || sc.solver.continuationSteps < 1)
                throw Error(ErrorCode::InvalidArgument, "scenario: maxIter and continuationSteps must be >= 1");
        }
        sc.outputs = j.contains("outputs") ? j["outputs"].get<std::vector<std::string>>() : kAllOutputs;
        for (const auto& o : sc.outputs)
            if (std::find(kAllOutputs.begin(), kAllOutputs.end(), o) == kAllOutputs.end())
                throw Error(ErrorCode::InvalidArgument, "scenario: unknown output " + o);
        sc.seed = j.value("seed", std::uint64_t{0});
        if (sc.kind != "triangle") sc.makeField();  // validates parameters early
        return sc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("scenario: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, "scenario " + path + ": " + e.what());
    }
    return parse_scenario(j, fs::path(path).parent_path().string());
}

bool RunReport::allPassed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json RunReport::to_json() const {
    json j;
    j["command"] = command;
    j["scenario"] = scenario;
    j["residualHistory"] = residualHistory;
    json cs = json::array();
    for (const auto& c : checks)
        cs.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}});
    j["checks"] = cs;
    j["manifest"] = manifest;
    j["errors"] = errors;
    j["ok"] = errors.empty() && allPassed();
    return j;
}

int exit_code(const RunReport& r) {
    if (!r.errors.empty()) return r.badInput ? kExitInput : kExitStage;
    return r.allPassed() ? kExitOk : kExitInvariant;
}

namespace {

class Pipeline {
public:
    Pipeline(const Scenario& sc, const RunOptions& opt, RunReport& rep) : sc_(sc), opt_(opt), rep_(rep) {
        rep_.scenario = sc.raw;
        solver_ = sc.solver;
        if (opt.verbose) solver_.log = [](const std::string& s) { std::cerr << "  " << s << "\n"; };
    }

    template <class F>
    auto stage(const std::string& name, F&& f) {
        log("stage " + name);
        const auto t0 = std::chrono::steady_clock::now();
        auto finish = [&] {
            rep_.timings.emplace_back(name,
                                      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        };
        try {
            if constexpr (std::is_void_v<decltype(f())>) {
                f();
                finish();
            } else {
                auto r = f();
                finish();
                return r;
            }
        } catch (const Error& e) {
            finish();
            throw Error(e.code(), name + " stage: " + e.what());
        }
    }

    void log(const std::string& s) const {
        if (opt_.verbose) std::cerr << "[" << rep_.command << "] " << s << "\n";
    }

    const BeltramiField& field() {
        if (!field_) field_ = sc_.makeField();
        return *field_;
    }

    const PiecewiseField& samples() {
        if (!samples_) {
            if (!sc_.gridBased()) throw Error(ErrorCode::InvalidArgument, "the triangle scenario has no field samples");
            samples_ = stage("discretize", [&] {
                if (sc_.kind == "single_cell") return *field().samples();
                std::optional<AveragingTransform> tr;
                if (sc_.field.value("averaging", std::string("mu")) == "cayley") tr = AveragingTransform::cayley();
                return average_field(field(), sc_.grid, tr);
            });
        }
        return *samples_;
    }

    const GluingComplex& complex() {
        if (!complex_) {
            if (!sc_.gridBased()) complex_ = stage("glue", [] { return fixtures::triangle_complex(); });
            else {
                const PiecewiseField& pw = samples();
                complex_ = stage("glue", [&] { return build_grid_complex(pw); });
            }
        }
        return *complex_;
    }

    StraighteningMap solveFresh() {
        const GluingComplex& c = complex();
        return stage("solve", [&] {
            StraighteningMap m = solve_parameter_problem(c, solver_);
            return m.grid ? normalize(m) : m;
        });
    }

    // reuses map.json from an earlier command on the same scenario
    const StraighteningMap& map() {
        if (map_) return *map_;
        fs::path p = fs::path(opt_.outDir) / "map.json";
        if (fs::exists(p)) {
            try {
                json j = json::parse(io::read_file(p.string()));
                if (j.value("fingerprint", std::string()) == sc_.fingerprint()) {
                    map_ = io::map_from_json(j.at("map"));
                    log("reusing " + p.string());
                    rep_.manifest.push_back("map.json");
                    return *map_;
                }
            } catch (const std::exception&) {
                // stale or unreadable cache, solve again
            }
        }
        map_ = solveFresh();
        saveMap();
        return *map_;
    }

    void setMap(StraighteningMap m) {
        map_ = std::move(m);
        saveMap();
    }

    void write(const std::string& name, const std::string& content) {
        io::write_atomic((fs::path(opt_.outDir) / name).string(), content);
        rep_.manifest.push_back(name);
    }

    void check(const std::string& name, bool passed, double value, double threshold) {
        rep_.checks.push_back({name, passed, value, threshold});
        log(name + (passed ? " pass" : " FAIL"));
    }

    std::vector<cplx> probes() {
        std::vector<cplx> out;
        if (sc_.raw.contains("probes"))
            for (const auto& p : sc_.raw["probes"]) out.push_back(io::complex_from(p));
        if (out.empty()) {
            std::mt19937_64 rng(sc_.seed);
            const GridSpec& g = sc_.grid;
            for (int k = 0; k < sc_.raw.value("randomProbes", 16); ++k) {
                double x = (2 * unit(rng) - 1) * g.halfWidth, y = (2 * unit(rng) - 1) * g.halfWidth;
                out.push_back(g.origin + cplx(x, y));
            }
        }
        return out;
    }

    const Scenario& sc() const { return sc_; }
    RunReport& report() { return rep_; }

private:
    void saveMap() {
        json j{{"fingerprint", sc_.fingerprint()}, {"map", io::map_json(*map_)}};
        write("map.json", j.dump(1));
    }

    const Scenario& sc_;
    const RunOptions& opt_;
    RunReport& rep_;
    SolverOptions solver_;
    std::optional<BeltramiField> field_;
    std::optional<PiecewiseField> samples_;
    std::optional<GluingComplex> complex_;
    std::optional<StraighteningMap> map_;
};

void finish(RunReport& r, const RunOptions& opt) {
    json t = json::object();
    for (const auto& [name, sec] : r.timings) t[name] = sec;
    io::write_atomic((fs::path(opt.outDir) / (r.command + "_timings.json")).string(), t.dump(1) + "\n");
    r.manifest.push_back(r.command + "_report.json");
    io::write_atomic((fs::path(opt.outDir) / (r.command + "_report.json")).string(), r.to_json().dump(1) + "\n");
}

template <class Body>
RunReport run(const std::string& name, const Scenario& sc, const RunOptions& opt, Body&& body) {
    RunReport rep;
    rep.command = name;
    Pipeline P(sc, opt, rep);
    try {
        body(P);
    } catch (const Error& e) {
        rep.errors.push_back(e.what());
        rep.badInput = e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::ParseError;
    }
    finish(rep, opt);
    return rep;
}

// support rectangle of the density, or nullopt when the field has no smooth density
std::optional<Rect> density_support(const Scenario& sc, const BeltramiField& f) {
    if (sc.kind == "zero" || sc.kind == "constant") return std::nullopt;
    if (!f.hasExactDerivatives()) return std::nullopt;
    const double R = f.radius();
    const cplx c = f.center();
    return Rect{c.real() - R, c.real() + R, c.imag() - R, c.imag() + R};
}

cplx lambda_centre(const Scenario& sc, const BeltramiField& f) {
    if (sc.raw.contains("limits") && sc.raw["limits"].contains("center"))
        return io::complex_from(sc.raw["limits"]["center"]);
    // the tensor bump is even in x and y, so its centre carries no signal
    if (sc.kind == "bump" && f.profile() == BumpProfile::Tensor) return f.center() + f.radius() * cplx(0.3, 0.15);
    return f.center();
}

std::vector<int> refinements(const Scenario& sc) {
    if (sc.raw.contains("limits") && sc.raw["limits"].contains("refinements"))
        return sc.raw["limits"]["refinements"].get<std::vector<int>>();
    const int m = sc.grid.cellsPerSide;
    if (m >= 4 && m % 2 == 0) return {m / 2, m};
    return {m};
}

ProbeSegment probe_segment(const Scenario& sc) {
    ProbeSegment seg;
    const GridSpec& g = sc.grid;
    seg.y = g.origin.imag();
    seg.xStart = g.origin.real() - 0.75 * g.halfWidth;
    seg.xEnd = g.origin.real() + 0.75 * g.halfWidth;
    if (sc.raw.contains("limits") && sc.raw["limits"].contains("segment")) {
        const json& s = sc.raw["limits"]["segment"];
        seg.y = s.value("y", seg.y);
        seg.xStart = s.value("x0", seg.xStart);
        seg.xEnd = s.value("x1", seg.xEnd);
    }
    return seg;
}

struct LimitTables {
    std::vector<LambdaExpansionRow> lambda;
    std::vector<TransportLimitRow> transport;
    AtomicMeasure atoms;
    bool smooth = false;
};

LimitTables limit_tables(Pipeline& P) {
    LimitTables T;
    const Scenario& sc = P.sc();
    const BeltramiField& f = P.field();
    const StraighteningMap& fine = P.map();
    T.atoms = P.stage("atoms", [&] { return atomic_measure(fine, true); });
    auto support = density_support(sc, f);
    T.smooth = support.has_value();
    if (f.hasExactDerivatives() || sc.kind == "zero" || sc.kind == "constant") {
        BeltramiField jetField = f;
        T.lambda = P.stage("lambda", [&] {
            return lambda_expansion_check(jetField, lambda_centre(sc, f), {0.1, 0.05, 0.025});
        });
    }
    if (!T.smooth) return T;

    std::vector<StraighteningMap> maps;
    for (int m : refinements(sc)) {
        if (m == sc.grid.cellsPerSide) {
            maps.push_back(fine);
            continue;
        }
        GridSpec g = sc.grid;
        g.cellsPerSide = m;
        maps.push_back(P.stage("solve m=" + std::to_string(m), [&] {
            SolverOptions so = sc.solver;
            return normalize(solve_parameter_problem(build_grid_complex(average_field(f, g)), so));
        }));
    }
    LimitDensity hd{f};
    const StraighteningMap& top = maps.back();
    auto fmap = [&](cplx z) { return evaluate_straightening(top, z); };
    LimitConnection conn = P.stage("limit connection", [&] {
        return make_limit_connection([&](cplx c) { return hd.measure(c); }, fmap, *support, 64);
    });
    std::vector<const StraighteningMap*> ptrs;
    for (const auto& m : maps) ptrs.push_back(&m);
    T.transport = P.stage("transport limit", [&] { return transport_limit_compare(ptrs, probe_segment(sc), conn); });
    return T;
}

bool ratio_ok(const std::vector<LambdaExpansionRow>& rows, double* worst) {
    *worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (size_t i = 0; i + 1 < rows.size(); ++i) {
        if (rows[i].defect < 1e-13) continue;  // rounding level
        double r = rows[i].defect / std::max(rows[i + 1].defect, 1e-300);
        *worst = std::min(*worst, r);
        ok = ok && r >= 1.5;
    }
    return ok;
}

}  // namespace

RunReport cmd_discretize(const Scenario& sc, const RunOptions& opt) {
    return run("discretize", sc, opt, [&](Pipeline& P) {
        const PiecewiseField& pw = P.samples();
        P.write("field.json", io::field_json(pw).dump(1) + "\n");
        if (sc.kind != "file" && sc.kind != "grid" && sc.kind != "single_cell") {
            const GridSpec& g = pw.grid;
            Rect r{g.origin.real() - g.halfWidth, g.origin.real() + g.halfWidth, g.origin.imag() - g.halfWidth,
                   g.origin.imag() + g.halfWidth};
            double d = l1_distance(P.field().fn(), [&](cplx z) { return pw.value(z); }, r, 8 * g.cellsPerSide);
            P.check("l1 distance to the exact field is finite", std::isfinite(d), d, 0.0);
        }
    });
}

RunReport cmd_glue(const Scenario& sc, const RunOptions& opt) {
    return run("glue", sc, opt, [&](Pipeline& P) {
        const GluingComplex& c = P.complex();
        P.write("complex.json", io::complex_json(c).dump(1) + "\n");
        cplx resInf = c.infinityCycle ? c.infinityCycle->residue : cplx{};
        double defect = std::abs(c.finiteResidueSum() + resInf + 2.0);
        if (!c.infinityCycle) defect = std::abs(c.finiteResidueSum() + 2.0);
        P.check("residue sum", defect < 1e-10, defect, 1e-10);
        P.check("euler characteristic", c.eulerCharacteristic() == 2, c.eulerCharacteristic(), 2);
    });
}

RunReport cmd_solve(const Scenario& sc, const RunOptions& opt) {
    return run("solve", sc, opt, [&](Pipeline& P) {
        P.setMap(P.solveFresh());
        const StraighteningMap& m = P.map();
        P.report().residualHistory = m.report.residualHistory;
        P.write("solver.json", io::solve_report_json(m).dump(1) + "\n");
        P.write("symbol.json", io::symbol_json(m.symbol).dump(1) + "\n");
        P.check("final residual", m.report.finalResidual < 1e-8, m.report.finalResidual, 1e-8);
    });
}

RunReport cmd_eval(const Scenario& sc, const RunOptions& opt) {
    return run("eval", sc, opt, [&](Pipeline& P) {
        const StraighteningMap& m = P.map();
        if (!m.grid) throw Error(ErrorCode::InvalidArgument, "eval needs a grid scenario");
        io::CsvTable t({"x", "y", "re_f", "im_f"});
        P.stage("evaluate", [&] {
            for (cplx z : P.probes()) t.row().add(z).add(evaluate_straightening(m, z));
        });
        P.write("eval.csv", t.str());
    });
}

RunReport cmd_trace(const Scenario& sc, const RunOptions& opt) {
    return run("trace", sc, opt, [&](Pipeline& P) {
        const StraighteningMap& m = P.map();
        json list = sc.raw.value("geodesics", json::array());
        if (list.empty()) {
            cplx z0 = m.grid ? evaluate_straightening(m, sc.grid.origin + sc.grid.halfWidth * cplx(0.05, 0.025))
                             : cplx(0.0, 0.1);
            double T = m.grid ? sc.grid.halfWidth : 1.0;
            list.push_back({{"z0", io::to_json(z0)}, {"v0", json::array({1.0, 0.0})}, {"T", T}});
        }
        int k = 0;
        for (const auto& g : list) {
            GeodesicTrace tr = P.stage("geodesic " + std::to_string(k), [&] {
                return trace_geodesic(m.symbol, io::complex_from(g.at("z0")), io::complex_from(g.at("v0")),
                                      g.value("T", 1.0), g.value("tol", 1e-10));
            });
            io::CsvTable t({"t", "re_z", "im_z"});
            for (size_t i = 0; i < tr.path.vertices.size(); ++i) t.row().add(tr.times[i]).add(tr.path.vertices[i]);
            P.write("geodesic_" + std::to_string(k) + ".csv", t.str());
            ++k;
        }
    });
}

RunReport cmd_transport(const Scenario& sc, const RunOptions& opt) {
    return run("transport", sc, opt, [&](Pipeline& P) {
        const StraighteningMap& m = P.map();
        std::vector<PolylinePath> paths;
        if (sc.raw.contains("paths"))
            for (const auto& p : sc.raw["paths"]) paths.push_back(io::path_from_json(p));
        if (paths.empty()) {
            double s = m.grid ? m.grid->cellSide() : 1.0;
            cplx a = m.grid ? sc.grid.origin + cplx(-0.75 * sc.grid.halfWidth, 0.5 * s) : cplx(-0.5, 0.5);
            cplx b = m.grid ? sc.grid.origin + cplx(0.75 * sc.grid.halfWidth, 0.5 * s) : cplx(0.5, 0.5);
            if (m.grid) {
                a = evaluate_straightening(m, a);
                b = evaluate_straightening(m, b);
            }
            paths.push_back({{a, b}, false});
        }
        io::CsvTable t({"path", "re_tau", "im_tau", "re_holonomy", "im_holonomy"});
        P.stage("transport", [&] {
            for (size_t k = 0; k < paths.size(); ++k) {
                TransportResult r = segment_log_integral(m.symbol, paths[k]);
                t.row().add(int(k)).add(r.tau).add(r.holonomyFactor);
            }
        });
        P.write("transport.csv", t.str());
    });
}

RunReport cmd_limits(const Scenario& sc, const RunOptions& opt) {
    return run("limits", sc, opt, [&](Pipeline& P) {
        LimitTables T = limit_tables(P);
        io::CsvTable a({"provenance", "re_z", "im_z", "re_weight", "im_weight"});
        for (const auto& at : T.atoms.atoms) a.row().add(T.atoms.provenance).add(at.location).add(at.weight);
        P.write("atoms.csv", a.str());
        if (!T.lambda.empty()) {
            io::CsvTable l({"eps", "re_log_lambda", "im_log_lambda", "re_scaled", "im_scaled", "re_expected",
                            "im_expected", "defect"});
            for (const auto& r : T.lambda)
                l.row().add(r.eps).add(r.logLambda).add(r.scaled).add(r.expected).add(r.defect);
            P.write("lambda_expansion.csv", l.str());
        }
        if (!T.transport.empty()) {
            io::CsvTable l({"refinement", "defect", "runtime_ms", "row_y", "re_discrete", "im_discrete", "re_limit",
                            "im_limit", "removed"});
            for (const auto& r : T.transport)
                l.row().add(r.refinement).add(r.defect).add(r.runtimeMs).add(r.rowY).add(r.discrete).add(r.limit).add(
                    r.removed);
            P.write("transport_limit.csv", l.str());
        }
    });
}

RunReport cmd_render(const Scenario& sc, const RunOptions& opt) {
    return run("render", sc, opt, [&](Pipeline& P) {
        const StraighteningMap& m = P.map();
        const GluingComplex& c = P.complex();
        Skeleton sk = P.stage("skeleton", [&] { return skeleton(m, c); });
        RenderStyle st;
        st.hatching = sc.raw.value("hatching", true);
        std::string svg = P.stage("render", [&] { return render_svg(m, sk, st); });
        P.write("skeleton.svg", svg);
        P.check("skeleton edges traced", sk.failedEdges() == 0, sk.failedEdges(), 0);
    });
}

RunReport cmd_verify(const Scenario& sc, const RunOptions& opt) {
    return run("verify", sc, opt, [&](Pipeline& P) {
        const GluingComplex& c = P.complex();
        const StraighteningMap& m = P.map();
        P.report().residualHistory = m.report.residualHistory;

        cplx resInf = c.infinityCycle ? c.infinityCycle->residue : cplx{};
        double rs = std::abs(c.finiteResidueSum() + resInf + 2.0);
        P.check("residue sum", rs < 1e-10, rs, 1e-10);
        P.check("euler characteristic", c.eulerCharacteristic() == 2, c.eulerCharacteristic(), 2);

        double mono = 0.0;
        for (const auto& cy : c.cycles)
            mono = std::max(mono, std::abs(std::exp(kTwoPi * kI * cy.residue) -
                                           cy.dilation * std::exp(kI * cy.signedAngle)));
        P.check("cycle monodromy", mono < 1e-12, mono, 1e-12);

        // small square loop around the pole with the largest residue
        int best = -1;
        for (size_t k = 0; k < m.symbol.poles.size(); ++k)
            if (best < 0 || std::abs(m.symbol.poles[k].res) > std::abs(m.symbol.poles[best].res)) best = int(k);
        double hol = 0.0;
        if (best >= 0 && std::abs(m.symbol.poles[best].res) > 0.0) {
            cplx z0 = m.symbol.poles[best].z;
            double sep = std::numeric_limits<double>::infinity();
            for (const auto& p : m.symbol.poles)
                if (p.z != z0) sep = std::min(sep, std::abs(p.z - z0));
            double h = 0.25 * (std::isfinite(sep) ? sep : 1.0);
            PolylinePath sq{{z0 + cplx(h, -h), z0 + cplx(h, h), z0 + cplx(-h, h), z0 + cplx(-h, -h)}, true};
            cplx v = parallel_transport(m.symbol, sq, 1.0);
            hol = std::abs(v - std::exp(-kTwoPi * kI * m.symbol.poles[best].res));
        }
        P.check("square loop holonomy", hol < 1e-8, hol, 1e-8);

        P.check("solver residual", m.report.finalResidual < 1e-8, m.report.finalResidual, 1e-8);
        double pg = 0.0;
        for (cplx r : per_residual(per_map(m.symbol, m.problem), m.problem.targets)) pg = std::max(pg, std::abs(r));
        P.check("per of glu", pg < 1e-7, pg, 1e-7);

        if (!sc.gridBased()) {
            const double l2 = std::log(std::sqrt(2.0));
            cplx expect[3] = {7.0 / 24 - 1 + l2 / (kTwoPi * kI), 7.0 / 24 - 1 - l2 / (kTwoPi * kI), -7.0 / 12};
            int at[3] = {c.cycleOf(0, 0), c.cycleOf(0, 1), c.cycleOf(0, 2)};
            double d = 0.0;
            for (int k = 0; k < 3; ++k) d = std::max(d, std::abs(c.cycles[at[k]].residue - expect[k]));
            P.check("triangle residues", d < 1e-12, d, 1e-12);
        }
        if (c.pairings.size() <= 40) {
            Skeleton sk = P.stage("skeleton", [&] { return skeleton(m, c); });
            P.check("skeleton edges traced", sk.failedEdges() == 0, sk.failedEdges(), 0);
            double slack = 1e-3 * scene_diameter(m.symbol);
            P.check("skeleton edges disjoint", edges_disjoint(sk, slack), 0, 0);
        }

        if (sc.gridBased()) {
            LimitTables T = limit_tables(P);
            if (!T.lambda.empty()) {
                double worst;
                bool ok = ratio_ok(T.lambda, &worst);
                io::CsvTable l({"eps", "defect"});
                for (const auto& r : T.lambda) l.row().add(r.eps).add(r.defect);
                P.write("verify_lambda.csv", l.str());
                P.check("lambda expansion ratio", ok, std::isfinite(worst) ? worst : 0.0, 1.5);
            }
            if (T.transport.size() >= 2) {
                io::CsvTable l({"refinement", "defect"});
                for (const auto& r : T.transport) l.row().add(r.refinement).add(r.defect);
                P.write("verify_transport_limit.csv", l.str());
                double first = T.transport.front().defect, last = T.transport.back().defect;
                P.check("transport limit trend", last < first || last < 1e-12, last, first);
            }
            if (sc.kind == "zero") {
                double mx = T.atoms.totalMass();
                for (const auto& r : T.lambda) mx = std::max(mx, std::abs(r.logLambda));
                P.check("limit quantities vanish", mx == 0.0, mx, 0.0);
            }
        }

        io::CsvTable t({"check", "passed", "value", "threshold"});
        for (const auto& ch : P.report().checks)
            t.row().add(ch.name).add(std::string(ch.passed ? "pass" : "fail")).add(ch.value).add(ch.threshold);
        P.write("verify.csv", t.str());
    });
}

RunReport run_command(const std::string& name, const Scenario& sc, const RunOptions& opt) {
    if (name == "discretize") return cmd_discretize(sc, opt);
    if (name == "glue") return cmd_glue(sc, opt);
    if (name == "solve") return cmd_solve(sc, opt);
    if (name == "eval") return cmd_eval(sc, opt);
    if (name == "trace") return cmd_trace(sc, opt);
    if (name == "transport") return cmd_transport(sc, opt);
    if (name == "limits") return cmd_limits(sc, opt);
    if (name == "render") return cmd_render(sc, opt);
    if (name == "verify") return cmd_verify(sc, opt);
    throw Error(ErrorCode::InvalidArgument, "unknown command " + name);
}

}  // namespace simsurf

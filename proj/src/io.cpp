#include "simsurf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace simsurf::io {

namespace {

std::string chars(double x, int precision) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = precision < 0 ? std::to_chars(buf, buf + sizeof buf, x)
                           : std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, precision);
    return std::string(buf, r.ptr);
}

json cvec(const std::vector<cplx>& v) {
    json a = json::array();
    for (cplx z : v) a.push_back(to_json(z));
    return a;
}

std::vector<cplx> cvec_from(const json& j) {
    std::vector<cplx> v;
    for (const auto& e : j) v.push_back(complex_from(e));
    return v;
}

json affine(const AffineMap& A) { return {{"a", to_json(A.a)}, {"b", to_json(A.b)}}; }
AffineMap affine_from(const json& j) { return {complex_from(j.at("a")), complex_from(j.at("b"))}; }

json grid_json(const GridSpec& g) {
    return {{"L", g.halfWidth}, {"m", g.cellsPerSide}, {"origin", to_json(g.origin)}};
}

GridSpec grid_from(const json& j) {
    GridSpec g;
    g.halfWidth = j.at("L").get<double>();
    g.cellsPerSide = j.at("m").get<int>();
    if (j.contains("origin")) g.origin = complex_from(j["origin"]);
    g.validate();
    return g;
}

}  // namespace

std::string num(double x) { return chars(x, -1); }
std::string num17(double x) { return chars(x, 17); }

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ParseError, "complex value must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json field_json(const PiecewiseField& pw) {
    json j;
    j["grid"] = grid_json(pw.grid);
    j["values"] = cvec(pw.cellValues);
    return j;
}

PiecewiseField field_from_json(const json& j) {
    try {
        PiecewiseField pw;
        pw.grid = grid_from(j.at("grid"));
        pw.cellValues = cvec_from(j.at("values"));
        if (static_cast<int>(pw.cellValues.size()) != pw.grid.cellCount())
            throw Error(ErrorCode::ParseError, "field needs m*m values");
        for (cplx v : pw.cellValues)
            if (!(std::abs(v) < 1.0)) throw Error(ErrorCode::InvalidArgument, "field sample with modulus >= 1");
        return pw;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed field: ") + e.what());
    }
}

json complex_json(const GluingComplex& c) {
    json j;
    json polys = json::array();
    for (const auto& p : c.polygons)
        polys.push_back({{"id", p.id}, {"bounded", p.bounded}, {"vertices", cvec(p.vertices)}});
    j["polygons"] = polys;
    json prs = json::array();
    for (const auto& e : c.pairings)
        prs.push_back({{"first", {e.first.polygon, e.first.edge}},
                       {"second", {e.second.polygon, e.second.edge}},
                       {"a", to_json(e.map.a)},
                       {"b", to_json(e.map.b)}});
    j["pairings"] = prs;
    json cyc = json::array();
    for (const auto& cy : c.cycles) {
        json flags = json::array();
        for (const auto& f : cy.flags) flags.push_back({f.polygon, f.vertex, f.edgeBefore});
        cyc.push_back({{"theta", cy.totalAngle},
                       {"lambda", cy.dilation},
                       {"sigma", cy.signedAngle},
                       {"res", to_json(cy.residue)},
                       {"corner", cy.corner},
                       {"flags", flags}});
    }
    j["cycles"] = cyc;
    j["euler"] = c.eulerCharacteristic();
    j["residue_sum"] = to_json(c.finiteResidueSum());
    if (c.grid) j["grid"] = grid_json(*c.grid);
    if (c.infinityCycle) j["res_inf"] = to_json(c.infinityCycle->residue);
    return j;
}

json symbol_json(const ChristoffelSymbol& s) {
    json poles = json::array();
    for (const auto& p : s.poles) poles.push_back({{"z", to_json(p.z)}, {"res", to_json(p.res)}});
    return {{"poles", poles}, {"res_inf", to_json(s.impliedInfinityResidue)}};
}

ChristoffelSymbol symbol_from_json(const json& j) {
    try {
        ChristoffelSymbol s;
        const json& poles = j.is_array() ? j : j.at("poles");
        for (const auto& p : poles) s.poles.push_back({complex_from(p.at("z")), complex_from(p.at("res"))});
        if (j.is_object() && j.contains("res_inf")) s.impliedInfinityResidue = complex_from(j["res_inf"]);
        else s.impliedInfinityResidue = -2.0 - s.finiteResidueSum();
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed symbol: ") + e.what());
    }
}

json path_json(const PolylinePath& p) { return {{"vertices", cvec(p.vertices)}, {"closed", p.closed}}; }

PolylinePath path_from_json(const json& j) {
    PolylinePath p;
    if (j.is_array()) {
        p.vertices = cvec_from(j);
    } else {
        p.vertices = cvec_from(j.at("vertices"));
        p.closed = j.value("closed", false);
    }
    return p;
}

json solve_report_json(const StraighteningMap& map) {
    json j;
    std::vector<cplx> z, r;
    for (const auto& p : map.symbol.poles) {
        z.push_back(p.z);
        r.push_back(p.res);
    }
    j["poles"] = cvec(z);
    j["residues"] = cvec(r);
    j["res_inf"] = to_json(map.symbol.impliedInfinityResidue);
    j["residualHistory"] = map.report.residualHistory;
    j["continuationSteps"] = map.report.continuation;
    j["iterationsPerStep"] = map.report.iterationsPerStep;
    j["iterations"] = map.report.iterations;
    j["rejectedSteps"] = map.report.rejectedSteps;
    j["finalResidual"] = map.report.finalResidual;
    j["converged"] = map.report.converged;
    return j;
}

json map_json(const StraighteningMap& m) {
    json j;
    j["symbol"] = symbol_json(m.symbol);
    json P;
    P["residues"] = cvec(m.problem.residues);
    P["positions"] = cvec(m.problem.positions);
    P["res_inf"] = to_json(m.problem.infinityResidue);
    P["pinned"] = m.problem.pinned;
    P["faces"] = m.problem.faces;
    P["cyclePole"] = m.problem.cyclePole;
    json targets = json::array();
    for (const auto& t : m.problem.targets) targets.push_back({{"face", t.faceId}, {"vertices", cvec(t.vertices)}});
    P["targets"] = targets;
    j["problem"] = P;
    j["basepoints"] = cvec(m.basepoints);
    json al = json::array();
    for (const auto& a : m.alignments) al.push_back(affine(a));
    j["alignments"] = al;
    if (m.grid) j["grid"] = grid_json(*m.grid);
    j["cellMu"] = cvec(m.cellMu);
    j["normalization"] = affine(m.normalization);
    j["report"] = solve_report_json(m);
    return j;
}

StraighteningMap map_from_json(const json& j) {
    try {
        StraighteningMap m;
        m.symbol = symbol_from_json(j.at("symbol"));
        const json& P = j.at("problem");
        m.problem.residues = cvec_from(P.at("residues"));
        m.problem.positions = cvec_from(P.at("positions"));
        m.problem.infinityResidue = complex_from(P.at("res_inf"));
        m.problem.pinned = P.at("pinned").get<std::vector<int>>();
        m.problem.faces = P.at("faces").get<std::vector<std::vector<int>>>();
        m.problem.cyclePole = P.at("cyclePole").get<std::vector<int>>();
        for (const auto& t : P.at("targets"))
            m.problem.targets.push_back(FaceTarget::from(t.at("face").get<int>(), cvec_from(t.at("vertices"))));
        m.basepoints = cvec_from(j.at("basepoints"));
        for (const auto& a : j.at("alignments")) m.alignments.push_back(affine_from(a));
        if (j.contains("grid")) m.grid = grid_from(j["grid"]);
        m.cellMu = cvec_from(j.at("cellMu"));
        m.normalization = affine_from(j.at("normalization"));
        const json& r = j.at("report");
        m.report.residualHistory = r.at("residualHistory").get<std::vector<double>>();
        m.report.continuation = r.at("continuationSteps").get<std::vector<double>>();
        m.report.iterationsPerStep = r.at("iterationsPerStep").get<std::vector<int>>();
        m.report.iterations = r.at("iterations").get<int>();
        m.report.rejectedSteps = r.at("rejectedSteps").get<int>();
        m.report.finalResidual = r.at("finalResidual").get<double>();
        m.report.converged = r.at("converged").get<bool>();
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed map: ") + e.what());
    }
}

CsvTable& CsvTable::add(double x) {
    rows_.back().push_back(num17(x));
    return *this;
}

CsvTable& CsvTable::add(int x) {
    rows_.back().push_back(std::to_string(x));
    return *this;
}

CsvTable& CsvTable::add(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        rows_.back().push_back(s);
    } else {
        std::string q = "\"";
        for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
        rows_.back().push_back(q + "\"");
    }
    return *this;
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw Error(ErrorCode::Io, "rename to " + p.string() + " failed: " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace simsurf::io

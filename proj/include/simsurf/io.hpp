#pragma once

#include "simsurf/christoffel.hpp"
#include "simsurf/fields.hpp"
#include "simsurf/gluing.hpp"
#include "simsurf/transport.hpp"
#include "simsurf/uniformize.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace simsurf::io {

using json = nlohmann::json;

// shortest text that reads back to the same double, C locale
std::string num(double x);
// 17 significant digits, C locale
std::string num17(double x);

json to_json(cplx z);
cplx complex_from(const json& j);

json field_json(const PiecewiseField& pw);
PiecewiseField field_from_json(const json& j);

json complex_json(const GluingComplex& c);

json symbol_json(const ChristoffelSymbol& s);
ChristoffelSymbol symbol_from_json(const json& j);

json path_json(const PolylinePath& p);
PolylinePath path_from_json(const json& j);

json solve_report_json(const StraighteningMap& map);
json map_json(const StraighteningMap& map);
StraighteningMap map_from_json(const json& j);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row() {
        rows_.emplace_back();
        return *this;
    }
    CsvTable& add(double x);
    CsvTable& add(int x);
    CsvTable& add(const std::string& s);
    CsvTable& add(cplx z) { return add(z.real()).add(z.imag()); }
    size_t size() const { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// write to path.tmp, then rename over path
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace simsurf::io

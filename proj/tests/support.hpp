#pragma once

#include "simsurf/fields.hpp"
#include "simsurf/fixtures.hpp"
#include "simsurf/gluing.hpp"
#include "simsurf/uniformize.hpp"

#include <map>

// Solved maps shared by several suites; each is solved once per process.
namespace testsupport {

inline const simsurf::StraighteningMap& single_cell_map() {
    static const simsurf::StraighteningMap m = simsurf::normalize(
        simsurf::solve_parameter_problem(simsurf::build_grid_complex(simsurf::fixtures::single_cell(0.2))));
    return m;
}

inline const simsurf::GluingComplex& bump_complex(int m) {
    static std::map<int, simsurf::GluingComplex> cache;
    auto it = cache.find(m);
    if (it == cache.end()) {
        auto pw = simsurf::average_field(simsurf::fixtures::bump(0.3, 1.5), simsurf::GridSpec{2.0, m, 0.0});
        it = cache.emplace(m, simsurf::build_grid_complex(pw)).first;
    }
    return it->second;
}

inline const simsurf::StraighteningMap& bump_map(int m) {
    static std::map<int, simsurf::StraighteningMap> cache;
    auto it = cache.find(m);
    if (it == cache.end())
        it = cache.emplace(m, simsurf::normalize(simsurf::solve_parameter_problem(bump_complex(m)))).first;
    return it->second;
}

}  // namespace testsupport

#pragma once

#include <vector>

namespace simsurf {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// cached Gauss-Legendre rule, computed by Newton iteration on P_n
const GaussRule& gauss_legendre(int n);

}  // namespace simsurf

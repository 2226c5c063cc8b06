#pragma once

#include "simsurf/uniformize.hpp"

#include <string>

namespace simsurf {

struct RenderStyle {
    int width = 800;
    double margin = 0.08;      // fraction of the drawing box added on each side
    bool hatching = true;      // image of source grid lines (grid maps only)
    int hatchPerCell = 1;      // source lines per cell side
    int hatchSamples = 8;      // evaluation points per cell along a line
    double poleRadius = 3.0;   // pixels
};

std::string render_svg(const StraighteningMap& map, const Skeleton& sk, const RenderStyle& style = {});

}  // namespace simsurf

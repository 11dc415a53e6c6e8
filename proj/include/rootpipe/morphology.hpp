#pragma once

#include <vector>

#include "rootpipe/common.hpp"

namespace rootpipe {

struct Component {
    std::vector<Point> pixels;  // row-major order
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

/// 8-connected components, ordered by their first pixel in row-major scan.
std::vector<Component> connected_components(const BinaryGrid& grid);

/// 3x3 dilation; pixels outside the grid count as background.
BinaryGrid dilate3x3(const BinaryGrid& grid);
/// 3x3 erosion; pixels outside the grid count as foreground, so that
/// erode(dilate(g)) is extensive at the border too.
BinaryGrid erode3x3(const BinaryGrid& grid);
BinaryGrid close3x3(const BinaryGrid& grid);

}  // namespace rootpipe

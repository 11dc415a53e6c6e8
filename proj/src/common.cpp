#include "rootpipe/common.hpp"

#include <algorithm>

namespace rootpipe {

BinaryGrid::BinaryGrid(int width, int height) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw ValidationError("grid dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * height, 0);
}

std::size_t BinaryGrid::count() const {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

std::vector<Point> BinaryGrid::points() const {
    std::vector<Point> out;
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x)
            if (at(x, y)) out.push_back({x, y});
    return out;
}

}  // namespace rootpipe

#include "rootpipe/morphology.hpp"

#include <algorithm>

namespace rootpipe {

std::vector<Component> connected_components(const BinaryGrid& grid) {
    const int w = grid.width();
    const int h = grid.height();
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
    std::vector<Component> out;
    std::vector<Point> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (!grid.at(x, y) || seen[idx]) continue;
            Component comp{{}, x, y, x, y};
            seen[idx] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Point p = stack.back();
                stack.pop_back();
                comp.pixels.push_back(p);
                comp.min_x = std::min(comp.min_x, p.x);
                comp.max_x = std::max(comp.max_x, p.x);
                comp.min_y = std::min(comp.min_y, p.y);
                comp.max_y = std::max(comp.max_y, p.y);
                for (int k = 0; k < 8; ++k) {
                    const int nx = p.x + kNeighborDx[k];
                    const int ny = p.y + kNeighborDy[k];
                    if (!grid.get(nx, ny)) continue;
                    const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                    if (seen[nidx]) continue;
                    seen[nidx] = 1;
                    stack.push_back({nx, ny});
                }
            }
            std::sort(comp.pixels.begin(), comp.pixels.end());
            out.push_back(std::move(comp));
        }
    }
    return out;
}

namespace {

BinaryGrid rank3x3(const BinaryGrid& grid, bool dilate) {
    // Separable: a 3x3 box is a 3x1 pass followed by a 1x3 pass.
    const int w = grid.width();
    const int h = grid.height();
    const auto& src = grid.raw();
    const std::uint8_t outside = dilate ? 0 : 1;
    std::vector<std::uint8_t> rows(src.size());
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* r = src.data() + static_cast<std::size_t>(y) * w;
        std::uint8_t* o = rows.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            const std::uint8_t a = x > 0 ? r[x - 1] : outside;
            const std::uint8_t c = x + 1 < w ? r[x + 1] : outside;
            o[x] = dilate ? (a | r[x] | c) : (a & r[x] & c);
        }
    }
    BinaryGrid out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const std::uint8_t a = y > 0 ? rows[i - w] : outside;
            const std::uint8_t c = y + 1 < h ? rows[i + w] : outside;
            const std::uint8_t v = dilate ? (a | rows[i] | c) : (a & rows[i] & c);
            if (v) out.set(x, y);
        }
    }
    return out;
}

}  // namespace

BinaryGrid dilate3x3(const BinaryGrid& grid) { return rank3x3(grid, true); }
BinaryGrid erode3x3(const BinaryGrid& grid) { return rank3x3(grid, false); }
BinaryGrid close3x3(const BinaryGrid& grid) { return erode3x3(dilate3x3(grid)); }

}  // namespace rootpipe

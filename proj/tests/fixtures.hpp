#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rootpipe/common.hpp"

namespace rootpipe::test {

/// Bresenham segment, 8-connected.
inline void draw_line(BinaryGrid& g, Point a, Point b) {
    int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
    int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        if (g.contains(a.x, a.y)) g.set(a.x, a.y);
        if (a == b) break;
        const int e2 = 2 * err;
        if (e2 >= dy) { err += dy; a.x += sx; }
        if (e2 <= dx) { err += dx; a.y += sy; }
    }
}

inline void fill_rect(BinaryGrid& g, int x, int y, int w, int h) {
    for (int yy = y; yy < y + h; ++yy)
        for (int xx = x; xx < x + w; ++xx)
            if (g.contains(xx, yy)) g.set(xx, yy);
}

/// Vertical trunk (x=20, y=0..99) with a horizontal arm leaving at y=50
/// to the right, 49 steps long (x=21..69).
inline BinaryGrid t_fixture() {
    BinaryGrid g(100, 110);
    draw_line(g, {20, 0}, {20, 99});
    draw_line(g, {21, 50}, {69, 50});
    return g;
}

/// Trunk x=50, y=0..30; two diagonal arms from (50,30): left arm 40 steps,
/// right arm 60 steps.
inline BinaryGrid y_fixture() {
    BinaryGrid g(140, 110);
    draw_line(g, {50, 0}, {50, 30});
    draw_line(g, {49, 31}, {10, 70});
    draw_line(g, {51, 31}, {110, 90});
    return g;
}

/// Random plant: a wiggly main root from the top with up to four straight
/// laterals on alternating sides, spaced so they never touch.
inline BinaryGrid random_root_grid(std::mt19937& rng) {
    BinaryGrid g(200, 200);
    std::uniform_int_distribution<int> wiggle(-6, 6);
    std::vector<Point> joints{{100, 5}};
    for (int k = 0; k < 5; ++k) joints.push_back({joints.back().x + wiggle(rng), joints.back().y + 30});
    for (std::size_t k = 1; k < joints.size(); ++k) draw_line(g, joints[k - 1], joints[k]);

    std::uniform_real_distribution<double> angle(20.0, 60.0), length(15.0, 40.0), coin(0.0, 1.0);
    int side = coin(rng) < 0.5 ? -1 : 1;
    for (int y : {35, 65, 95, 125}) {
        if (coin(rng) < 0.25) continue;
        int x = -1;
        for (int xx = 0; xx < g.width(); ++xx)
            if (g.at(xx, y)) x = xx;
        const double a = angle(rng) * std::numbers::pi / 180.0, len = length(rng);
        const Point start{x + side, y};
        const Point end{start.x + side * static_cast<int>(std::lround(len * std::cos(a))),
                        start.y + static_cast<int>(std::lround(len * std::sin(a)))};
        draw_line(g, start, end);
        side = -side;
    }
    return g;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("rootpipe_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace rootpipe::test

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rootpipe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented contract (bad label, bad ROI, bad config...).
class ValidationError : public Error {
public:
    using Error::Error;
};

struct Point {
    int x = 0;
    int y = 0;

    friend bool operator==(const Point&, const Point&) = default;
    /// Row-major ordering (y first), used for deterministic tie-breaks.
    friend bool operator<(const Point& a, const Point& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

struct PointF {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PointF&, const PointF&) = default;
};

/// Dense row-major boolean image.
class BinaryGrid {
public:
    BinaryGrid() = default;
    BinaryGrid(int width, int height);

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] bool empty() const { return count() == 0; }
    [[nodiscard]] std::size_t count() const;

    [[nodiscard]] bool contains(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    [[nodiscard]] bool at(int x, int y) const {
        return data_[static_cast<std::size_t>(y) * width_ + x] != 0;
    }
    /// Out-of-range reads return false.
    [[nodiscard]] bool get(int x, int y) const { return contains(x, y) && at(x, y); }
    void set(int x, int y, bool v = true) {
        data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
    }

    [[nodiscard]] std::vector<Point> points() const;
    [[nodiscard]] const std::vector<std::uint8_t>& raw() const { return data_; }

    friend bool operator==(const BinaryGrid&, const BinaryGrid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// 8-neighbourhood offsets, clockwise from north.
inline constexpr int kNeighborDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr int kNeighborDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

}  // namespace rootpipe

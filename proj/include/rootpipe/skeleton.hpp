#pragma once

#include <vector>

#include "rootpipe/common.hpp"

namespace rootpipe {

/// One-pixel-wide, 8-connected skeleton.
struct SkeletonGrid {
    BinaryGrid pixels;

    [[nodiscard]] int width() const { return pixels.width(); }
    [[nodiscard]] int height() const { return pixels.height(); }
    [[nodiscard]] bool empty() const { return pixels.empty(); }
};

/// Zhang-Suen thinning followed by removal of redundant staircase corners.
/// Homotopy preserving: component and hole counts of the input are kept.
SkeletonGrid thin(const BinaryGrid& mask);

/// Removes tip-to-junction branches shorter than `min_branch_px` pixels
/// (junction pixel excluded), repeating until none remain, then re-thins.
SkeletonGrid prune_spurs(const SkeletonGrid& skel, int min_branch_px);

/// Skeleton adjacency: 8-neighbours, minus diagonal links that are already
/// bridged by a pixel 4-adjacent to both ends. This keeps staircases and
/// junction corners from producing spurious branch points.
std::vector<Point> skeleton_neighbors(const BinaryGrid& skel, Point p);

/// Euclidean length of one step between adjacent pixels (1 or sqrt(2)).
double step_length(Point a, Point b);

/// Longest geodesic path, in pixel-step units, over every component of the
/// skeleton (exact on trees: two sweeps of Dijkstra).
double longest_path_px(const SkeletonGrid& skel);

}  // namespace rootpipe

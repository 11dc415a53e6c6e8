#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rootpipe/common.hpp"
#include "rootpipe/skeleton.hpp"

namespace rootpipe {

enum class NodeKind { base, branch, tip };
enum class EdgeClass { unclassified, main, lateral };

struct GraphNode {
    int id = 0;
    Point position;
    NodeKind kind = NodeKind::tip;
};

struct GraphEdge {
    int id = 0;
    int node_a = 0;
    int node_b = 0;
    std::vector<Point> polyline;  // exact pixel path from node_a to node_b
    double length_mm = 0.0;
    EdgeClass cls = EdgeClass::unclassified;
};

/// Graph of the skeleton component that contains the plant's base.
struct RootGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    Point seed_position;
    int base_node = 0;
    int width = 0;
    int height = 0;
    double mm_per_pixel = 0.0;
    bool classified = false;
    /// Main-path edge ids in order from the base (set by classify_main).
    std::vector<int> main_edges;

    [[nodiscard]] int degree(int node) const;
    /// Concatenated pixel path of the main root, base first.
    [[nodiscard]] std::vector<Point> main_polyline() const;
    [[nodiscard]] double total_length_mm() const;
};

struct GraphParams {
    double snap_radius_mm = 2.0;
    /// A skeleton end at most this many steps from the snapped pixel, along
    /// an unbranched path, becomes the base instead.
    int base_stub_px = 4;
};

/// Nodes are pixels whose skeleton degree differs from 2, plus the base (the
/// on-pixel nearest `seed`, moved to a nearby skeleton end when one is within
/// base_stub_px, or the topmost pixel when no seed is given).
/// Edges are traced depth-first between nodes.
/// Throws ValidationError on an empty skeleton or when the seed is farther
/// than the snap radius from every on-pixel.
RootGraph build_graph(const SkeletonGrid& skel, std::optional<Point> seed, double mm_per_pixel,
                      const GraphParams& params = {});

struct MainPathParams {
    /// Pixels within this distance of the previous main root count as overlap.
    double overlap_radius_px = 3.0;
};

/// Marks the base-to-tip path maximizing (overlap with `previous_main`, then
/// length) as main and every other edge as lateral.
RootGraph classify_main(RootGraph graph, std::optional<std::span<const Point>> previous_main,
                        const MainPathParams& params = {});

/// A first-order lateral: every lateral edge reachable from one attachment
/// edge on the main path without crossing the main path.
struct LateralRoot {
    Point base;                   // attachment pixel on the main root
    Point tip;
    std::vector<Point> polyline;  // longest path from base through the chain
    std::vector<int> edges;
    double length_mm = 0.0;       // all edges of the chain, sub-branches included
};

/// Lateral chains ordered by attachment position along the main root.
std::vector<LateralRoot> lateral_roots(const RootGraph& graph);

/// Stable lateral identities across frames.
struct LateralIdentityMap {
    struct Known {
        int id = 0;
        PointF base_mm;
    };
    double tolerance_mm = 1.0;
    int next_id = 1;
    std::vector<Known> known;     // every lateral seen so far, last position
    std::vector<int> assignments; // stable id per entry of the current lateral list
};

/// Greedy nearest-base matching of `current` laterals to known ones; an
/// unmatched lateral gets a fresh id. Unmatched known laterals are retained.
LateralIdentityMap match_laterals(std::span<const LateralRoot> current, double mm_per_pixel,
                                  LateralIdentityMap map);
LateralIdentityMap match_laterals(const RootGraph& current, LateralIdentityMap map);

}  // namespace rootpipe

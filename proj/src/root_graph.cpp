#include "rootpipe/root_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>

namespace rootpipe {

namespace {

constexpr double kTieEps = 1e-9;
// Bound on simple-path enumeration; root graphs are near-trees so this is
// only reached on pathological, heavily looped skeletons.
constexpr long kMaxPathExpansions = 200000;

int direction_index(Point from, Point to) {
    for (int k = 0; k < 8; ++k)
        if (from.x + kNeighborDx[k] == to.x && from.y + kNeighborDy[k] == to.y) return k;
    return -1;
}

double polyline_steps(std::span<const Point> line) {
    double s = 0.0;
    for (std::size_t i = 1; i < line.size(); ++i) s += step_length(line[i - 1], line[i]);
    return s;
}

struct Incidence {
    int edge;
    int other;
};

std::vector<std::vector<Incidence>> incidence(const RootGraph& g) {
    std::vector<std::vector<Incidence>> adj(g.nodes.size());
    for (const auto& e : g.edges) {
        adj[e.node_a].push_back({e.id, e.node_b});
        if (e.node_a != e.node_b) adj[e.node_b].push_back({e.id, e.node_a});
    }
    return adj;
}

// Pixels of `edges` walked from `start`, the shared node pixel emitted once.
std::vector<Point> chain_pixels(const RootGraph& g, int start, std::span<const int> edges) {
    std::vector<Point> out;
    int cur = start;
    for (int id : edges) {
        const auto& e = g.edges[id];
        std::vector<Point> seg = e.polyline;
        if (e.node_a != cur) std::reverse(seg.begin(), seg.end());
        cur = e.node_a == cur ? e.node_b : e.node_a;
        out.insert(out.end(), out.empty() ? seg.begin() : seg.begin() + 1, seg.end());
    }
    return out;
}

}  // namespace

int RootGraph::degree(int node) const {
    int d = 0;
    for (const auto& e : edges) {
        if (e.node_a == node) ++d;
        if (e.node_b == node) ++d;
    }
    return d;
}

std::vector<Point> RootGraph::main_polyline() const {
    if (main_edges.empty()) return {nodes.empty() ? seed_position : nodes[base_node].position};
    return chain_pixels(*this, base_node, main_edges);
}

double RootGraph::total_length_mm() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.length_mm;
    return s;
}

RootGraph build_graph(const SkeletonGrid& skel, std::optional<Point> seed, double mm_per_pixel,
                      const GraphParams& params) {
    const BinaryGrid& g = skel.pixels;
    if (!(mm_per_pixel > 0.0)) throw ValidationError("mm_per_pixel must be positive");
    const std::vector<Point> on = g.points();
    if (on.empty()) throw ValidationError("empty skeleton");

    Point base = on.front();  // topmost (row-major first)
    if (seed) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& p : on) {
            const double d = std::hypot(p.x - seed->x, p.y - seed->y);
            if (d < best) {
                best = d;
                base = p;
            }
        }
        const double snap_px = params.snap_radius_mm / mm_per_pixel;
        if (best > snap_px)
            throw ValidationError("seed (" + std::to_string(seed->x) + ", " + std::to_string(seed->y) +
                                  ") is farther than the snap radius from the skeleton");
        // A hint placed just inside the root leaves a short dangling end above
        // the base; the base moves to that end so it is not read as a branch.
        if (skeleton_neighbors(g, base).size() == 2) {
            int best_steps = params.base_stub_px + 1;
            Point best_end = base;
            for (const Point& first : skeleton_neighbors(g, base)) {
                Point prev = base, cur = first;
                for (int steps = 1; steps <= params.base_stub_px; ++steps) {
                    const auto nb = skeleton_neighbors(g, cur);
                    if (nb.size() == 1) {
                        if (steps < best_steps) {
                            best_steps = steps;
                            best_end = cur;
                        }
                        break;
                    }
                    if (nb.size() != 2) break;
                    const Point next = nb[0] == prev ? nb[1] : nb[0];
                    prev = cur;
                    cur = next;
                }
            }
            base = best_end;
        }
    }

    const int w = g.width();
    const auto index = [w](Point p) { return static_cast<std::size_t>(p.y) * w + p.x; };

    // Component reachable from the base.
    BinaryGrid comp(w, g.height());
    std::vector<Point> stack{base};
    comp.set(base.x, base.y);
    std::vector<Point> comp_pixels;
    while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        comp_pixels.push_back(p);
        for (const Point& q : skeleton_neighbors(g, p)) {
            if (comp.at(q.x, q.y)) continue;
            comp.set(q.x, q.y);
            stack.push_back(q);
        }
    }
    std::sort(comp_pixels.begin(), comp_pixels.end());

    RootGraph graph;
    graph.width = w;
    graph.height = g.height();
    graph.mm_per_pixel = mm_per_pixel;
    graph.seed_position = seed.value_or(base);

    std::vector<int> node_of(static_cast<std::size_t>(w) * g.height(), -1);
    for (const Point& p : comp_pixels) {
        const auto deg = skeleton_neighbors(g, p).size();
        if (deg == 2 && !(p == base)) continue;
        const int id = static_cast<int>(graph.nodes.size());
        node_of[index(p)] = id;
        graph.nodes.push_back({id, p, NodeKind::tip});
        if (p == base) graph.base_node = id;
    }

    std::vector<std::uint8_t> used(node_of.size(), 0);  // one bit per direction
    const auto mark = [&](Point a, Point b) {
        used[index(a)] |= static_cast<std::uint8_t>(1u << direction_index(a, b));
        used[index(b)] |= static_cast<std::uint8_t>(1u << direction_index(b, a));
    };
    const auto is_used = [&](Point a, Point b) {
        return (used[index(a)] >> direction_index(a, b)) & 1u;
    };

    for (const auto& node : graph.nodes) {
        for (const Point& first : skeleton_neighbors(g, node.position)) {
            if (is_used(node.position, first)) continue;
            GraphEdge e;
            e.id = static_cast<int>(graph.edges.size());
            e.node_a = node.id;
            e.polyline = {node.position, first};
            mark(node.position, first);
            Point prev = node.position;
            Point cur = first;
            while (node_of[index(cur)] < 0) {
                const auto nb = skeleton_neighbors(g, cur);  // exactly two
                const Point next = nb[0] == prev ? nb[1] : nb[0];
                mark(cur, next);
                e.polyline.push_back(next);
                prev = cur;
                cur = next;
            }
            e.node_b = node_of[index(cur)];
            e.length_mm = polyline_steps(e.polyline) * mm_per_pixel;
            graph.edges.push_back(std::move(e));
        }
    }

    for (auto& node : graph.nodes) {
        if (node.id == graph.base_node) {
            node.kind = NodeKind::base;
            continue;
        }
        node.kind = graph.degree(node.id) == 1 ? NodeKind::tip : NodeKind::branch;
    }
    return graph;
}

RootGraph classify_main(RootGraph graph, std::optional<std::span<const Point>> previous_main,
                        const MainPathParams& params) {
    graph.main_edges.clear();
    for (auto& e : graph.edges) e.cls = EdgeClass::lateral;
    graph.classified = true;
    if (graph.edges.empty()) return graph;

    // Pixels close to the previous main root.
    BinaryGrid near(graph.width, graph.height);
    if (previous_main && !previous_main->empty()) {
        const int r = static_cast<int>(std::floor(params.overlap_radius_px));
        const double r2 = params.overlap_radius_px * params.overlap_radius_px;
        for (const Point& p : *previous_main)
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    if (dx * dx + dy * dy <= r2 && near.contains(p.x + dx, p.y + dy))
                        near.set(p.x + dx, p.y + dy);
    }

    std::vector<double> overlap(graph.edges.size(), 0.0);
    std::vector<double> length(graph.edges.size(), 0.0);
    for (const auto& e : graph.edges) {
        length[e.id] = e.length_mm;
        for (std::size_t i = 1; i < e.polyline.size(); ++i) {
            const Point a = e.polyline[i - 1];
            const Point b = e.polyline[i];
            if (near.at(a.x, a.y) && near.at(b.x, b.y))
                overlap[e.id] += step_length(a, b) * graph.mm_per_pixel;
        }
    }

    const auto adj = incidence(graph);
    std::vector<int> best;
    double best_overlap = -1.0;
    double best_length = -1.0;
    std::vector<Point> best_pixels;

    const auto consider = [&](const std::vector<int>& path, double ov, double len) {
        bool take = false;
        if (ov > best_overlap + kTieEps) {
            take = true;
        } else if (ov > best_overlap - kTieEps) {
            if (len > best_length + kTieEps) {
                take = true;
            } else if (len > best_length - kTieEps) {
                auto pix = chain_pixels(graph, graph.base_node, path);
                if (best_pixels.empty()) best_pixels = chain_pixels(graph, graph.base_node, best);
                if (pix < best_pixels) {
                    best = path;
                    best_overlap = ov;
                    best_length = len;
                    best_pixels = std::move(pix);
                }
                return;
            }
        }
        if (take) {
            best = path;
            best_overlap = ov;
            best_length = len;
            best_pixels.clear();
        }
    };

    std::vector<std::uint8_t> on_path(graph.nodes.size(), 0);
    std::vector<int> path;
    long expansions = 0;
    std::function<void(int, double, double)> dfs = [&](int node, double ov, double len) {
        if (++expansions > kMaxPathExpansions) return;
        if (node != graph.base_node && graph.nodes[node].kind == NodeKind::tip) {
            consider(path, ov, len);
            return;
        }
        for (const auto& inc : adj[node]) {
            if (on_path[inc.other]) continue;
            on_path[inc.other] = 1;
            path.push_back(inc.edge);
            dfs(inc.other, ov + overlap[inc.edge], len + length[inc.edge]);
            path.pop_back();
            on_path[inc.other] = 0;
        }
    };
    on_path[graph.base_node] = 1;
    dfs(graph.base_node, 0.0, 0.0);

    if (best.empty()) {
        // No tip reachable by a simple path (pure loop): the longest edge at
        // the base stands in for the main root.
        for (const auto& inc : adj[graph.base_node])
            if (best.empty() || length[inc.edge] > length[best.front()] + kTieEps) best = {inc.edge};
    }
    for (int id : best) graph.edges[id].cls = EdgeClass::main;
    graph.main_edges = best;
    return graph;
}

std::vector<LateralRoot> lateral_roots(const RootGraph& graph) {
    std::vector<LateralRoot> out;
    if (!graph.classified || graph.edges.empty()) return out;

    std::vector<int> main_index(graph.nodes.size(), -1);
    {
        int cur = graph.base_node;
        main_index[cur] = 0;
        int i = 1;
        for (int id : graph.main_edges) {
            const auto& e = graph.edges[id];
            cur = e.node_a == cur ? e.node_b : e.node_a;
            if (main_index[cur] < 0) main_index[cur] = i++;
        }
    }

    struct Attachment {
        int edge;
        int node;  // main node the chain starts from
        int order;
        Point far;
    };
    std::vector<Attachment> attachments;
    for (const auto& e : graph.edges) {
        if (e.cls != EdgeClass::lateral) continue;
        const int ia = main_index[e.node_a];
        const int ib = main_index[e.node_b];
        if (ia < 0 && ib < 0) continue;
        int node = e.node_a;
        Point far = graph.nodes[e.node_b].position;
        if (ia < 0 || (ib >= 0 && ib < ia)) {
            node = e.node_b;
            far = graph.nodes[e.node_a].position;
        }
        attachments.push_back({e.id, node, main_index[node], far});
    }
    std::sort(attachments.begin(), attachments.end(), [](const Attachment& a, const Attachment& b) {
        if (a.order != b.order) return a.order < b.order;
        if (!(a.far == b.far)) return a.far < b.far;
        return a.edge < b.edge;
    });

    const auto adj = incidence(graph);
    std::vector<std::uint8_t> taken(graph.edges.size(), 0);
    for (const auto& att : attachments) {
        if (taken[att.edge]) continue;
        LateralRoot lr;
        lr.base = graph.nodes[att.node].position;

        // Collect the chain without crossing main nodes.
        std::vector<int> chain{att.edge};
        taken[att.edge] = 1;
        std::deque<int> frontier;
        const auto& e0 = graph.edges[att.edge];
        const int first_far = e0.node_a == att.node ? e0.node_b : e0.node_a;
        if (main_index[first_far] < 0) frontier.push_back(first_far);
        std::vector<std::uint8_t> seen_node(graph.nodes.size(), 0);
        while (!frontier.empty()) {
            const int n = frontier.front();
            frontier.pop_front();
            if (seen_node[n]) continue;
            seen_node[n] = 1;
            for (const auto& inc : adj[n]) {
                if (taken[inc.edge] || graph.edges[inc.edge].cls != EdgeClass::lateral) continue;
                taken[inc.edge] = 1;
                chain.push_back(inc.edge);
                if (main_index[inc.other] < 0) frontier.push_back(inc.other);
            }
        }
        std::sort(chain.begin(), chain.end());
        std::vector<std::uint8_t> in_chain(graph.edges.size(), 0);
        for (int id : chain) {
            in_chain[id] = 1;
            lr.length_mm += graph.edges[id].length_mm;
        }
        lr.edges = chain;

        // Longest simple path from the attachment through the chain.
        std::vector<int> path{att.edge};
        std::vector<int> best_path = path;
        double best_len = -1.0;
        Point best_tip = graph.nodes[first_far].position;
        std::vector<std::uint8_t> on_path(graph.nodes.size(), 0);
        on_path[att.node] = 1;
        long expansions = 0;
        std::function<void(int, double)> dfs = [&](int node, double len) {
            if (++expansions > kMaxPathExpansions) return;
            bool extended = false;
            if (main_index[node] < 0) {
                for (const auto& inc : adj[node]) {
                    if (!in_chain[inc.edge] || on_path[inc.other]) continue;
                    extended = true;
                    on_path[inc.other] = 1;
                    path.push_back(inc.edge);
                    dfs(inc.other, len + graph.edges[inc.edge].length_mm);
                    path.pop_back();
                    on_path[inc.other] = 0;
                }
            }
            if (extended) return;
            const Point tip = graph.nodes[node].position;
            if (len > best_len + kTieEps || (len > best_len - kTieEps && tip < best_tip)) {
                best_len = len;
                best_path = path;
                best_tip = tip;
            }
        };
        on_path[first_far] = 1;
        dfs(first_far, e0.length_mm);
        lr.polyline = chain_pixels(graph, att.node, best_path);
        lr.tip = lr.polyline.back();
        out.push_back(std::move(lr));
    }
    return out;
}

LateralIdentityMap match_laterals(std::span<const LateralRoot> current, double mm_per_pixel,
                                  LateralIdentityMap map) {
    struct Pair {
        double dist;
        std::size_t cur;
        std::size_t known;
    };
    std::vector<PointF> bases;
    for (const auto& lr : current)
        bases.push_back({lr.base.x * mm_per_pixel, lr.base.y * mm_per_pixel});

    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < bases.size(); ++i)
        for (std::size_t k = 0; k < map.known.size(); ++k) {
            const double d = std::hypot(bases[i].x - map.known[k].base_mm.x,
                                        bases[i].y - map.known[k].base_mm.y);
            if (d <= map.tolerance_mm) pairs.push_back({d, i, k});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.cur != b.cur) return a.cur < b.cur;
        return a.known < b.known;
    });

    std::vector<int> assigned(bases.size(), 0);
    std::vector<std::uint8_t> known_used(map.known.size(), 0);
    for (const auto& p : pairs) {
        if (assigned[p.cur] || known_used[p.known]) continue;
        assigned[p.cur] = map.known[p.known].id;
        known_used[p.known] = 1;
        map.known[p.known].base_mm = bases[p.cur];
    }
    for (std::size_t i = 0; i < bases.size(); ++i) {
        if (assigned[i]) continue;
        assigned[i] = map.next_id++;
        map.known.push_back({assigned[i], bases[i]});
    }
    map.assignments = std::move(assigned);
    return map;
}

LateralIdentityMap match_laterals(const RootGraph& current, LateralIdentityMap map) {
    const auto laterals = lateral_roots(current);
    return match_laterals(laterals, current.mm_per_pixel, std::move(map));
}

}  // namespace rootpipe

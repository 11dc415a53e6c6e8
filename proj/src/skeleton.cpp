#include "rootpipe/skeleton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

namespace rootpipe {

namespace {

// Neighbour values P2..P9 (N, NE, E, SE, S, SW, W, NW).
std::array<int, 8> ring(const BinaryGrid& g, int x, int y) {
    std::array<int, 8> p{};
    for (int k = 0; k < 8; ++k) p[k] = g.get(x + kNeighborDx[k], y + kNeighborDy[k]) ? 1 : 0;
    return p;
}

int ring_count(const std::array<int, 8>& p) {
    int b = 0;
    for (int v : p) b += v;
    return b;
}

// Number of 0 -> 1 transitions around the ring.
int ring_transitions(const std::array<int, 8>& p) {
    int a = 0;
    for (int k = 0; k < 8; ++k)
        if (p[k] == 0 && p[(k + 1) % 8] == 1) ++a;
    return a;
}

bool zhang_suen_deletable(const std::array<int, 8>& p, int pass) {
    const int b = ring_count(p);
    if (b < 2 || b > 6) return false;
    if (ring_transitions(p) != 1) return false;
    // p[0]=N p[2]=E p[4]=S p[6]=W
    if (pass == 0) return p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0;
    return p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0;
}

// Yokoi 8-connectivity number; 1 means the pixel is simple.
int yokoi8(const std::array<int, 8>& p) {
    // Reorder to x1=E, x2=NE, x3=N, x4=NW, x5=W, x6=SW, x7=S, x8=SE.
    const int x[9] = {1 - p[2], 1 - p[1], 1 - p[0], 1 - p[7], 1 - p[6],
                      1 - p[5], 1 - p[4], 1 - p[3], 1 - p[2]};
    int n = 0;
    for (int k = 0; k < 8; k += 2) {
        const int k2 = (k + 2) % 8;
        n += x[k] - x[k] * x[k + 1] * x[k2];
    }
    return n;
}

// Deletes simple staircase corners: pixels with exactly two neighbours in the
// reduced adjacency. Tips are kept, otherwise a diagonal staircase would be
// peeled away from its end. Returns true when anything changed.
bool remove_redundant(BinaryGrid& g) {
    bool changed_any = false;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Point& q : g.points()) {
            const auto p = ring(g, q.x, q.y);
            if (ring_count(p) < 2 || yokoi8(p) != 1) continue;
            if (skeleton_neighbors(g, q).size() != 2) continue;
            g.set(q.x, q.y, false);
            changed = changed_any = true;
        }
    }
    return changed_any;
}

}  // namespace

std::vector<Point> skeleton_neighbors(const BinaryGrid& skel, Point p) {
    std::vector<Point> out;
    out.reserve(8);
    for (int k = 0; k < 8; ++k) {
        const int nx = p.x + kNeighborDx[k];
        const int ny = p.y + kNeighborDy[k];
        if (!skel.get(nx, ny)) continue;
        if (kNeighborDx[k] != 0 && kNeighborDy[k] != 0) {
            // Diagonal: skip when one of the two shared 4-neighbours is set.
            if (skel.get(nx, p.y) || skel.get(p.x, ny)) continue;
        }
        out.push_back({nx, ny});
    }
    return out;
}

double step_length(Point a, Point b) {
    return (a.x != b.x && a.y != b.y) ? std::sqrt(2.0) : 1.0;
}

SkeletonGrid thin(const BinaryGrid& mask) {
    BinaryGrid g = mask;
    std::vector<Point> on = g.points();
    std::vector<Point> candidates;
    std::vector<int> snapshot_count;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            candidates.clear();
            snapshot_count.clear();
            for (const Point& q : on) {
                if (!g.at(q.x, q.y)) continue;
                const auto p = ring(g, q.x, q.y);
                if (!zhang_suen_deletable(p, pass)) continue;
                candidates.push_back(q);
                snapshot_count.push_back(ring_count(p));
            }
            // Candidates come from the snapshot; each is committed only while
            // it is still simple. Pixels that were already thin in the snapshot
            // are also kept when they have become tips, so two-pixel-thick
            // lines are not peeled from their ends.
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                const Point& q = candidates[i];
                const auto p = ring(g, q.x, q.y);
                if (ring_count(p) < 2 || yokoi8(p) != 1) continue;
                if (snapshot_count[i] <= 2 && skeleton_neighbors(g, q).size() <= 1) continue;
                g.set(q.x, q.y, false);
                changed = true;
            }
        }
        if (changed)
            std::erase_if(on, [&](const Point& q) { return !g.at(q.x, q.y); });
    }
    remove_redundant(g);
    return SkeletonGrid{std::move(g)};
}

SkeletonGrid prune_spurs(const SkeletonGrid& skel, int min_branch_px) {
    BinaryGrid g = skel.pixels;
    if (min_branch_px <= 0) return SkeletonGrid{std::move(g)};

    struct Spur {
        std::vector<Point> path;  // tip first, junction excluded
        Point junction;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<Spur> spurs;
        for (const Point& tip : g.points()) {
            if (skeleton_neighbors(g, tip).size() != 1) continue;
            Spur s;
            s.path.push_back(tip);
            Point prev = tip;
            Point cur = skeleton_neighbors(g, tip).front();
            bool is_spur = false;
            while (static_cast<int>(s.path.size()) < min_branch_px) {
                const auto nb = skeleton_neighbors(g, cur);
                if (nb.size() >= 3) {
                    is_spur = true;
                    s.junction = cur;
                    break;
                }
                if (nb.size() != 2) break;  // isolated segment, both ends are tips
                s.path.push_back(cur);
                const Point next = nb[0] == prev ? nb[1] : nb[0];
                prev = cur;
                cur = next;
            }
            if (!is_spur) continue;
            spurs.push_back(std::move(s));
        }
        std::sort(spurs.begin(), spurs.end(), [](const Spur& a, const Spur& b) {
            if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
            return a.path.front() < b.path.front();
        });
        for (const Spur& s : spurs) {
            // An earlier removal may have turned this junction into a plain
            // path pixel, in which case the branch is no longer a spur.
            if (skeleton_neighbors(g, s.junction).size() < 3) continue;
            bool intact = true;
            for (const Point& p : s.path) intact = intact && g.at(p.x, p.y);
            if (!intact) continue;
            for (const Point& p : s.path) g.set(p.x, p.y, false);
            changed = true;
        }
        if (changed) remove_redundant(g);
    }
    return SkeletonGrid{std::move(g)};
}

double longest_path_px(const SkeletonGrid& skel) {
    const BinaryGrid& g = skel.pixels;
    const int w = g.width();
    const auto index = [w](Point p) { return static_cast<std::size_t>(p.y) * w + p.x; };
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(static_cast<std::size_t>(w) * g.height(), inf);

    // Dijkstra from `src`, writing into dist; returns the farthest pixel.
    std::vector<Point> touched;
    const auto sweep = [&](Point src, double& far_dist) {
        for (const Point& t : touched) dist[index(t)] = inf;
        touched.clear();
        using Item = std::pair<double, std::pair<int, int>>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[index(src)] = 0.0;
        touched.push_back(src);
        pq.push({0.0, {src.y, src.x}});
        Point far = src;
        far_dist = 0.0;
        while (!pq.empty()) {
            const auto [d, yx] = pq.top();
            pq.pop();
            const Point p{yx.second, yx.first};
            if (d > dist[index(p)]) continue;
            if (d > far_dist || (d == far_dist && p < far)) {
                far_dist = d;
                far = p;
            }
            for (const Point& q : skeleton_neighbors(g, p)) {
                const double nd = d + step_length(p, q);
                if (nd < dist[index(q)]) {
                    if (dist[index(q)] == inf) touched.push_back(q);
                    dist[index(q)] = nd;
                    pq.push({nd, {q.y, q.x}});
                }
            }
        }
        return far;
    };

    std::vector<std::uint8_t> done(dist.size(), 0);
    double best = 0.0;
    for (const Point& p : g.points()) {
        if (done[index(p)]) continue;
        double d1 = 0.0;
        const Point a = sweep(p, d1);
        for (const Point& t : touched) done[index(t)] = 1;
        double d2 = 0.0;
        sweep(a, d2);
        best = std::max(best, d2);
    }
    return best;
}

}  // namespace rootpipe

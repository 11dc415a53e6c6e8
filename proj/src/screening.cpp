#include "rootpipe/screening.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rootpipe/fda.hpp"
#include "rootpipe/morphology.hpp"
#include "rootpipe/skeleton.hpp"

namespace rootpipe {

namespace {

// Pixels of class `cls` inside the region, in region-local coordinates.
BinaryGrid class_in_region(const LabelMask& mask, const PixelRect& r, int cls) {
    const int x0 = std::max(r.x0, 0), y0 = std::max(r.y0, 0);
    const int x1 = std::min(r.x1, mask.width()), y1 = std::min(r.y1, mask.height());
    BinaryGrid g(std::max(x1 - x0, 0), std::max(y1 - y0, 0));
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            if (mask.at(x, y) == cls) g.set(x - x0, y - y0);
    return g;
}

const Component* largest(const std::vector<Component>& comps) {
    const Component* best = nullptr;
    for (const auto& c : comps)
        if (!best || c.pixels.size() > best->pixels.size()) best = &c;
    return best;
}

double longest_component_path_mm(const BinaryGrid& g, double mm_per_pixel) {
    if (g.empty()) return 0.0;
    return longest_path_px(thin(g)) * mm_per_pixel;
}

using Vec4 = Eigen::Vector4d;

struct Bounds {
    double horizon;

    Vec4 project(Vec4 p) const {
        p(0) = std::clamp(p(0), 0.0, 20.0);
        p(1) = std::clamp(p(1), 0.0, 100.0);
        p(2) = std::clamp(p(2), 1.0, 50.0);
        p(3) = std::clamp(p(3), horizon * 1e-6, horizon);
        if (p(0) + p(1) > 100.0) p(1) = 100.0 - p(0);
        return p;
    }
};

HillParams from_vec(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }

double sse(const Vec4& p, std::span<const double> t, std::span<const double> y) {
    const auto hp = from_vec(p);
    double s = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double r = hill(hp, t[k]) - y[k];
        s += r * r;
    }
    return s;
}

// Damped Gauss-Newton (Levenberg-Marquardt) with projection onto the bounds.
Vec4 levenberg_marquardt(Vec4 p, std::span<const double> t, std::span<const double> y, const Bounds& bounds) {
    p = bounds.project(p);
    double cost = sse(p, t, y);
    double lambda = 1e-3;
    for (int iter = 0; iter < 500; ++iter) {
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Vec4 jtr = Vec4::Zero();
        for (std::size_t k = 0; k < t.size(); ++k) {
            Vec4 j = Vec4::Zero();
            double h = 0.0;
            if (t[k] > 0.0) {
                const double lr = std::log(t[k] / p(3));
                const double q = std::exp(p(2) * lr);
                h = std::isinf(q) ? 1.0 : q / (1.0 + q);
                const double dh = h * (1.0 - h);
                j(2) = p(1) * dh * lr;
                j(3) = -p(1) * dh * p(2) / p(3);
            }
            j(0) = 1.0;
            j(1) = h;
            const double r = p(0) + p(1) * h - y[k];
            jtj += j * j.transpose();
            jtr += j * r;
        }
        bool accepted = false;
        while (lambda < 1e12) {
            Eigen::Matrix4d a = jtj;
            for (int i = 0; i < 4; ++i) a(i, i) += lambda * (jtj(i, i) + 1e-12);
            const Vec4 trial = bounds.project(p - a.ldlt().solve(jtr));
            const double c = sse(trial, t, y);
            if (c < cost) {
                const double gain = cost - c;
                const double moved = (trial - p).cwiseAbs().maxCoeff();
                p = trial;
                cost = c;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (gain <= 1e-15 * (1.0 + cost) || moved < 1e-12) return p;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) break;
    }
    return p;
}

}  // namespace

PixelRect region_around(const BBox& box, int margin, int width, int height) {
    PixelRect r;
    r.x0 = std::max(0, static_cast<int>(std::floor(box.cx - box.w / 2.0)) - margin);
    r.y0 = std::max(0, static_cast<int>(std::floor(box.cy - box.h / 2.0)) - margin);
    r.x1 = std::min(width, static_cast<int>(std::ceil(box.cx + box.w / 2.0)) + margin);
    r.y1 = std::min(height, static_cast<int>(std::ceil(box.cy + box.h / 2.0)) + margin);
    r.x1 = std::max(r.x1, r.x0);
    r.y1 = std::max(r.y1, r.y0);
    return r;
}

int attached_root_pixels(const LabelMask& mask, const PixelRect& region) {
    const auto seeds = connected_components(class_in_region(mask, region, 3));
    const Component* seed = largest(seeds);
    if (!seed) return 0;
    const BinaryGrid roots = class_in_region(mask, region, 1);
    BinaryGrid seed_px(roots.width(), roots.height());
    for (const auto& p : seed->pixels) seed_px.set(p.x, p.y);

    int total = 0;
    for (const auto& comp : connected_components(roots)) {
        const bool touches = std::any_of(comp.pixels.begin(), comp.pixels.end(), [&](const Point& p) {
            for (int k = 0; k < 8; ++k)
                if (seed_px.get(p.x + kNeighborDx[k], p.y + kNeighborDy[k])) return true;
            return false;
        });
        if (touches) total += static_cast<int>(comp.pixels.size());
    }
    return total;
}

std::optional<double> detect_germination(std::span<const Frame> frames, const PixelRect& region,
                                         const GerminationParams& params) {
    int run = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (attached_root_pixels(frames[i].mask, region) >= params.min_root_px) {
            if (run == 0) start = i;
            if (++run >= params.min_frames) return frames[start].time_hours;
        } else {
            run = 0;
        }
    }
    return std::nullopt;
}

double hill(const HillParams& p, double t) {
    if (t <= 0.0) return p.g0;
    // Written via the ratio so that t = t50 gives exactly one half.
    const double q = std::pow(t / p.t50, p.n);
    if (std::isinf(q)) return p.g0 + p.g_max;
    return p.g0 + p.g_max * q / (1.0 + q);
}

double tmgr(double n, double t50) {
    if (n <= 1.0) return 0.0;
    return t50 * std::pow((n - 1.0) / (n + 1.0), 1.0 / n);
}

GerminationFit fit_hill(std::span<const double> event_times, int total_seeds, std::span<const double> sample_times) {
    if (total_seeds < 1) throw ValidationError("total seed count must be at least 1");
    if (static_cast<int>(event_times.size()) > total_seeds)
        throw ValidationError("more germination events than seeds");
    GerminationFit fit;
    fit.sample_times.assign(sample_times.begin(), sample_times.end());
    fit.final_percent = 100.0 * static_cast<double>(event_times.size()) / total_seeds;

    std::vector<double> events(event_times.begin(), event_times.end());
    std::sort(events.begin(), events.end());
    for (double t : sample_times) {
        const auto k = std::upper_bound(events.begin(), events.end(), t) - events.begin();
        fit.empirical_percent.push_back(100.0 * static_cast<double>(k) / total_seeds);
    }
    if (events.empty() || sample_times.empty()) return fit;
    const double horizon = *std::max_element(sample_times.begin(), sample_times.end());
    if (!(horizon > 0.0)) throw ValidationError("sample times must reach past zero");

    const Bounds bounds{horizon};
    const double g_start = fit.empirical_percent.back();
    Vec4 best = Vec4::Zero();
    double best_cost = std::numeric_limits<double>::infinity();
    for (double q : {0.25, 0.5, 0.75}) {
        for (double n : {2.0, 4.0, 8.0}) {
            const Vec4 start(0.0, g_start, n, std::max(sample_quantile(events, q), horizon * 1e-3));
            const Vec4 p = levenberg_marquardt(start, sample_times, fit.empirical_percent, bounds);
            const double c = sse(p, sample_times, fit.empirical_percent);
            if (c < best_cost) {
                best_cost = c;
                best = p;
            }
        }
    }
    fit.fitted = true;
    fit.params = from_vec(best);
    fit.tmgr = tmgr(fit.params.n, fit.params.t50);
    fit.rmse = std::sqrt(best_cost / static_cast<double>(sample_times.size()));
    for (double t : sample_times) fit.fitted_percent.push_back(hill(fit.params, t));
    return fit;
}

GerminationFit fit_germination(const std::map<int, std::optional<double>>& per_seed_times, int total_seeds,
                               std::span<const double> sample_times) {
    std::vector<double> events;
    for (const auto& [id, t] : per_seed_times)
        if (t) events.push_back(*t);
    auto fit = fit_hill(events, total_seeds, sample_times);
    fit.per_seed_times = per_seed_times;
    return fit;
}

double hypocotyl_length(const LabelMask& mask, const PixelRect& region, double mm_per_pixel) {
    const BinaryGrid hyp = class_in_region(mask, region, 4);
    const auto comps = connected_components(hyp);
    const Component* c = largest(comps);
    if (!c) return 0.0;
    BinaryGrid g(hyp.width(), hyp.height());
    for (const auto& p : c->pixels) g.set(p.x, p.y);
    return longest_component_path_mm(g, mm_per_pixel);
}

PlantMeasures plant_measures(const LabelMask& mask, const LabelMask& first_mask, const PixelRect& region,
                             double mm_per_pixel) {
    const double px_area = mm_per_pixel * mm_per_pixel;
    PlantMeasures m;
    int plant = 0;
    for (int y = region.y0; y < region.y1; ++y)
        for (int x = region.x0; x < region.x1; ++x)
            if (mask.at(x, y) != 0) ++plant;
    m.plant_area_mm2 = plant * px_area;

    int seed = 0;
    for (int y = region.y0; y < region.y1; ++y)
        for (int x = region.x0; x < region.x1; ++x)
            if (first_mask.at(x, y) == 3) ++seed;
    if (seed > 0) m.seed_size_mm2 = seed * px_area;

    m.root_length_mm = longest_component_path_mm(class_in_region(mask, region, 1), mm_per_pixel);
    return m;
}

}  // namespace rootpipe

#include "rootpipe/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

namespace rootpipe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void stamp(LabelMask& m, double x, double y, int radius, std::uint8_t label) {
    const int cx = static_cast<int>(std::lround(x)), cy = static_cast<int>(std::lround(y));
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            if (dx * dx + dy * dy > radius * radius + radius) continue;
            const int px = cx + dx, py = cy + dy;
            if (px >= 0 && py >= 0 && px < m.width() && py < m.height()) m.set(px, py, label);
        }
}

void segment(LabelMask& m, PointF a, PointF b, int radius, std::uint8_t label) {
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
    for (int k = 0; k <= steps; ++k) {
        const double f = double(k) / steps;
        stamp(m, a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), radius, label);
    }
}

void ellipse(LabelMask& m, double cx, double cy, double rx, double ry, std::uint8_t label) {
    for (int y = static_cast<int>(std::floor(cy - ry)); y <= static_cast<int>(std::ceil(cy + ry)); ++y)
        for (int x = static_cast<int>(std::floor(cx - rx)); x <= static_cast<int>(std::ceil(cx + rx)); ++x) {
            const double u = (x - cx) / rx, v = (y - cy) / ry;
            if (u * u + v * v <= 1.0 && x >= 0 && y >= 0 && x < m.width() && y < m.height()) m.set(x, y, label);
        }
}

// Main-root length in px after t hours: integral of a speed carrying 24 h
// and 12 h rhythms around a mean rate.
double main_length_px(double t, double mean_mm_per_h, double mm_per_px) {
    const double w24 = kTwoPi / 24.0, w12 = kTwoPi / 12.0;
    const double mm = mean_mm_per_h * (t + 0.35 / w24 * (1.0 - std::cos(w24 * t)) + 0.2 / w12 * (1.0 - std::cos(w12 * t)));
    return mm / mm_per_px;
}

struct PlantModel {
    double cx = 0.0;
    double seed_y = 40.0;
    double rate_mm_per_h = 0.25;
    double wiggle_phase = 0.0;
    std::vector<PointF> path;  // unit-spaced main-root centreline
    struct Lateral {
        double at_px = 0.0;     // attachment arc length along the main root
        double angle_deg = 60.0;
        int side = 1;
        double emerge_hours = 0.0;
        double rate_px_per_h = 3.0;
        double max_px = 140.0;
    };
    std::vector<Lateral> laterals;
};

PlantModel make_plant(double cx, double rate, double phase, double max_len_px, double horizon, double mm,
                      std::mt19937& rng) {
    PlantModel p;
    p.cx = cx;
    p.rate_mm_per_h = rate;
    p.wiggle_phase = phase;
    const double top = p.seed_y + 7.0;
    for (int s = 0; s <= static_cast<int>(max_len_px); ++s)
        p.path.push_back({cx + 6.0 * std::sin(s / 120.0 + phase), top + s});
    std::uniform_real_distribution<double> angle(50.0, 75.0), rate_px(2.5, 4.0);
    int side = rng() % 2 ? 1 : -1;
    for (double at = 70.0; at + 40.0 < max_len_px; at += 55.0) {
        PlantModel::Lateral l;
        l.at_px = at;
        l.angle_deg = angle(rng);
        l.side = side;
        side = -side;
        l.rate_px_per_h = rate_px(rng);
        // Emerges once the main root tip is 40 px past the attachment point.
        double t = 0.0;
        while (t < horizon && main_length_px(t, rate, mm) < at + 40.0) t += 0.05;
        if (t >= horizon) break;
        l.emerge_hours = t;
        p.laterals.push_back(l);
    }
    return p;
}

void draw_plant(LabelMask& m, const PlantModel& p, double t, double mm, std::mt19937& rng, double noise) {
    // Seed, hypocotyl and leaves above the root.
    ellipse(m, p.cx, p.seed_y, 7.0, 5.0, 3);
    const double hyp = std::min(20.0, std::max(0.0, 1.5 * (t - 2.0)));
    if (hyp > 0.0) segment(m, {p.cx, p.seed_y - 5.0}, {p.cx, p.seed_y - 5.0 - hyp}, 1, 4);
    if (t > 12.0) {
        const double size = std::min(9.0, 0.4 * (t - 12.0) + 2.0);
        const double top = p.seed_y - 5.0 - hyp;
        segment(m, {p.cx, top}, {p.cx - 8.0, top - 4.0}, 0, 6);
        segment(m, {p.cx, top}, {p.cx + 8.0, top - 4.0}, 0, 6);
        ellipse(m, p.cx - 8.0 - size, top - 4.0, size, size * 0.6, 5);
        ellipse(m, p.cx + 8.0 + size, top - 4.0, size, size * 0.6, 5);
    }

    const int len = std::min(static_cast<int>(p.path.size()) - 1,
                             static_cast<int>(main_length_px(t, p.rate_mm_per_h, mm)));
    for (int s = 0; s < len; ++s) segment(m, p.path[s], p.path[s + 1], 1, 1);
    for (const auto& l : p.laterals) {
        if (t < l.emerge_hours || l.at_px >= len) continue;
        const double L = std::min(l.max_px, 2.0 + l.rate_px_per_h * (t - l.emerge_hours));
        const double a = l.angle_deg * std::numbers::pi / 180.0;
        const PointF base = p.path[static_cast<std::size_t>(l.at_px)];
        const PointF tip{base.x + l.side * L * std::sin(a), base.y + L * std::cos(a)};
        segment(m, base, tip, 1, 2);
    }

    if (noise <= 0.0) return;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Specks well away from the plant, smaller than the cleaning threshold.
    if (u(rng) < 0.3 * noise) {
        const double x = p.cx + (u(rng) < 0.5 ? -1.0 : 1.0) * (60.0 + 80.0 * u(rng));
        const double y = 100.0 + 400.0 * u(rng);
        stamp(m, x, y, 1, u(rng) < 0.5 ? 1 : 2);
    }
    // A droplet hiding part of the main root for one frame.
    if (len > 60 && u(rng) < 0.05 * noise) {
        const int s0 = 20 + static_cast<int>(u(rng) * (len - 40));
        for (int s = s0; s < s0 + 6 && s < len; ++s) {
            const PointF q = p.path[s];
            for (int dx = -2; dx <= 2; ++dx) {
                const int x = static_cast<int>(std::lround(q.x)) + dx, y = static_cast<int>(std::lround(q.y));
                if (x >= 0 && y >= 0 && x < m.width() && y < m.height()) m.set(x, y, 0);
            }
        }
    }
    // A short false lateral lasting one frame.
    if (len > 60 && u(rng) < 0.03 * noise) {
        const PointF base = p.path[20 + static_cast<int>(u(rng) * (len - 40))];
        segment(m, base, {base.x + 12.0, base.y + 6.0}, 1, 2);
    }
}

}  // namespace

GeneratedExperiment generate_standard(const StandardSceneOptions& o) {
    if (o.width < 40 || o.height < 120 || o.frames < 1 || o.plants < 1 || !(o.interval_hours > 0.0) ||
        !(o.mm_per_pixel > 0.0))
        throw ValidationError("invalid standard scene options");
    std::mt19937 rng(o.seed);
    const double slot = double(o.width) / o.plants;
    if (slot < 40.0) throw ValidationError("too many plants for the frame width");
    const double horizon = o.frames * o.interval_hours;
    const double max_len = o.height - 47.0 - 20.0;

    GeneratedExperiment out;
    std::uniform_real_distribution<double> rate(0.22, 0.28), phase(0.0, kTwoPi);
    std::vector<PlantModel> plants;
    for (int k = 0; k < o.plants; ++k) {
        const double cx = std::floor((k + 0.5) * slot);
        plants.push_back(make_plant(cx, rate(rng), phase(rng), max_len, horizon, o.mm_per_pixel, rng));
        PlantRoi roi;
        char id[16];
        std::snprintf(id, sizeof id, "plant%02d", k + 1);
        roi.roi.plant_id = id;
        roi.roi.x = static_cast<int>(std::floor(k * slot)) + 2;
        roi.roi.w = static_cast<int>(std::floor(slot)) - 4;
        roi.roi.y = 0;
        roi.roi.h = o.height;
        roi.roi.seed_hint = Point{static_cast<int>(cx), static_cast<int>(plants.back().seed_y)};
        roi.group = k % 2 == 0 ? "control" : "treated";
        out.config.rois.push_back(roi);
    }

    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(o.frames));
    for (int i = 0; i < o.frames; ++i) {
        const double t = i * o.interval_hours;
        LabelMask m(o.width, o.height);
        for (const auto& p : plants) draw_plant(m, p, t, o.mm_per_pixel, rng, o.noise);
        frames.push_back({std::move(m), t});
    }
    out.sequence = make_sequence(std::move(frames), o.mm_per_pixel, o.interval_hours);
    out.config.mode = RunMode::standard;
    return out;
}

GeneratedExperiment generate_screening(const ScreeningSceneOptions& o) {
    if (o.groups < 1 || o.columns < 1 || o.rows < 1 || o.frames < 1 || o.curves.empty() ||
        !(o.interval_hours > 0.0) || !(o.mm_per_pixel > 0.0))
        throw ValidationError("invalid screening scene options");
    const double sx = double(o.width) / (o.groups * o.columns), sy = double(o.height) / o.rows;
    if (sx < 30.0 || sy < 45.0) throw ValidationError("seed grid too dense for the frame");
    std::mt19937 rng(o.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    struct Seed {
        double x = 0.0, y = 0.0;
        std::optional<double> germinates;
    };
    std::vector<Seed> seeds;
    GeneratedExperiment out;
    for (int g = 0; g < o.groups; ++g) {
        const HillParams& h = o.curves[static_cast<std::size_t>(g) % o.curves.size()];
        GroupSpec spec;
        spec.group_id = std::string("group") + char('A' + g % 26) + (g >= 26 ? std::to_string(g / 26) : "");
        spec.x = static_cast<int>(std::floor(g * o.columns * sx));
        spec.y = 0;
        spec.w = static_cast<int>(std::floor((g + 1) * o.columns * sx)) - spec.x;
        spec.h = o.height;
        spec.expected_seed_count = o.columns * o.rows;
        out.config.groups.push_back(spec);
        for (int r = 0; r < o.rows; ++r)
            for (int c = 0; c < o.columns; ++c) {
                Seed s;
                s.x = std::floor(spec.x + (c + 0.5) * sx + 4.0 * (u(rng) - 0.5));
                s.y = std::floor((r + 0.5) * sy - 8.0 + 4.0 * (u(rng) - 0.5));
                // Inverse of the group's germination curve at a uniform draw.
                const double p = 100.0 * u(rng);
                if (p > h.g0 && p < h.g0 + h.g_max)
                    s.germinates = h.t50 * std::pow((p - h.g0) / (h.g0 + h.g_max - p), 1.0 / h.n);
                seeds.push_back(s);
            }
    }

    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(o.frames));
    for (int i = 0; i < o.frames; ++i) {
        const double t = i * o.interval_hours;
        LabelMask m(o.width, o.height);
        for (const auto& s : seeds) {
            ellipse(m, s.x, s.y, 4.0, 3.0, 3);
            if (!s.germinates || t < *s.germinates) continue;
            const double dt = t - *s.germinates;
            const double root = std::min(18.0, 4.0 + 6.0 * dt);
            segment(m, {s.x, s.y + 3.0}, {s.x, s.y + 3.0 + root}, 0, 1);
            if (dt > 2.0) {
                const double hyp = std::min(12.0, 1.5 * (dt - 2.0) + 1.0);
                segment(m, {s.x, s.y - 3.0}, {s.x, s.y - 3.0 - hyp}, 0, 4);
            }
        }
        frames.push_back({std::move(m), t});
    }
    out.sequence = make_sequence(std::move(frames), o.mm_per_pixel, o.interval_hours);
    out.config.mode = RunMode::screening;
    return out;
}

void write_experiment(const GeneratedExperiment& e, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_sequence(dir / "masks" / "manifest.json", e.sequence);
    nlohmann::ordered_json j;
    j["mode"] = to_string(e.config.mode);
    j["manifest"] = "masks/manifest.json";
    j["output"] = "out";
    if (!e.config.rois.empty()) {
        auto rois = nlohmann::ordered_json::array();
        for (const auto& r : e.config.rois) {
            nlohmann::ordered_json o;
            o["plant_id"] = r.roi.plant_id;
            o["group"] = r.group;
            o["x"] = r.roi.x;
            o["y"] = r.roi.y;
            o["w"] = r.roi.w;
            o["h"] = r.roi.h;
            if (r.roi.seed_hint) o["seed"] = {r.roi.seed_hint->x, r.roi.seed_hint->y};
            rois.push_back(o);
        }
        j["rois"] = rois;
    }
    if (!e.config.groups.empty()) {
        auto groups = nlohmann::ordered_json::array();
        for (const auto& g : e.config.groups) {
            nlohmann::ordered_json o;
            o["group_id"] = g.group_id;
            o["x"] = g.x;
            o["y"] = g.y;
            o["w"] = g.w;
            o["h"] = g.h;
            if (g.expected_seed_count) o["expected_seed_count"] = *g.expected_seed_count;
            groups.push_back(o);
        }
        j["groups"] = groups;
    }
    std::ofstream out(dir / "config.json");
    if (!out) throw Error("cannot write " + (dir / "config.json").string());
    out << j.dump(2) << '\n';
}

}  // namespace rootpipe

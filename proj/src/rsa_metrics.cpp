#include "rootpipe/rsa_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "rootpipe/fft.hpp"

namespace rootpipe {

namespace {

double median_gap(const std::vector<Sample>& s) {
    if (s.size() < 2) return 0.0;
    std::vector<double> gaps;
    gaps.reserve(s.size() - 1);
    for (std::size_t i = 1; i < s.size(); ++i) gaps.push_back(s[i].time_hours - s[i - 1].time_hours);
    std::sort(gaps.begin(), gaps.end());
    const std::size_t m = gaps.size() / 2;
    return gaps.size() % 2 ? gaps[m] : 0.5 * (gaps[m - 1] + gaps[m]);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double angle_from_vertical(double dx, double dy) {
    const double norm = std::hypot(dx, dy);
    const double c = std::clamp(dy / norm, -1.0, 1.0);
    return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace

std::string to_string(Unit u) {
    switch (u) {
        case Unit::mm: return "mm";
        case Unit::mm_per_h: return "mm/h";
        case Unit::mm2: return "mm^2";
        case Unit::count: return "count";
        case Unit::lrs_per_cm: return "LRs/cm";
        case Unit::ratio: return "ratio";
        case Unit::degrees: return "degrees";
        case Unit::percent: return "%";
        case Unit::hours: return "hours";
        case Unit::mm_per_mm2: return "mm/mm^2";
    }
    return "";
}

Unit unit_from_string(const std::string& s) {
    for (Unit u : {Unit::mm, Unit::mm_per_h, Unit::mm2, Unit::count, Unit::lrs_per_cm, Unit::ratio,
                   Unit::degrees, Unit::percent, Unit::hours, Unit::mm_per_mm2})
        if (to_string(u) == s) return u;
    throw ValidationError("unknown unit '" + s + "'");
}

void MetricSeries::validate() const {
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (!(samples[i].time_hours > samples[i - 1].time_hours))
            throw ValidationError("series '" + metric_name + "' of '" + plant_id +
                                  "': times must be strictly increasing");
}

std::vector<double> MetricSeries::times() const {
    std::vector<double> t;
    t.reserve(samples.size());
    for (const auto& s : samples) t.push_back(s.time_hours);
    return t;
}

std::vector<double> MetricSeries::values() const {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.value);
    return v;
}

ArchitectureMetrics architecture_from(double main_mm, double lateral_mm, int lateral_count) {
    ArchitectureMetrics m;
    m.main_root_mm = main_mm;
    m.lateral_root_mm = lateral_mm;
    m.total_root_mm = main_mm + lateral_mm;
    m.lateral_count = lateral_count;
    if (main_mm > 0.0) m.lateral_density = 10.0 * lateral_count / main_mm;
    m.main_over_total = m.total_root_mm > 0.0 ? main_mm / m.total_root_mm : 1.0;
    return m;
}

ArchitectureMetrics basic_architecture(const RootGraph& graph) {
    double main = 0.0;
    double lateral = 0.0;
    for (const auto& e : graph.edges) {
        if (e.cls == EdgeClass::main)
            main += e.length_mm;
        else
            lateral += e.length_mm;
    }
    return architecture_from(main, lateral, static_cast<int>(lateral_roots(graph).size()));
}

double base_tip_angle(PointF base, PointF tip) {
    const double dx = tip.x - base.x;
    const double dy = tip.y - base.y;
    if (dx == 0.0 && dy == 0.0) throw ValidationError("angle undefined for coincident points");
    return angle_from_vertical(dx, dy);
}

std::optional<double> emergence_angle(std::span<const Point> polyline, double d_mm,
                                      double mm_per_pixel) {
    if (polyline.size() < 2 || !(d_mm > 0.0)) return std::nullopt;
    const double target = d_mm / mm_per_pixel;  // in pixel units
    double arc = 0.0;
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        const Point a = polyline[i - 1];
        const Point b = polyline[i];
        const double seg = std::hypot(b.x - a.x, b.y - a.y);
        if (arc + seg >= target - 1e-9) {
            const double f = seg > 0.0 ? std::clamp((target - arc) / seg, 0.0, 1.0) : 0.0;
            const double x = a.x + f * (b.x - a.x);
            const double y = a.y + f * (b.y - a.y);
            const double dx = x - polyline.front().x;
            const double dy = y - polyline.front().y;
            if (dx == 0.0 && dy == 0.0) return std::nullopt;
            return angle_from_vertical(dx, dy);
        }
        arc += seg;
    }
    return std::nullopt;
}

std::vector<PointF> convex_hull(std::vector<PointF> pts) {
    std::sort(pts.begin(), pts.end(), [](const PointF& a, const PointF& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    const auto cross = [](const PointF& o, const PointF& a, const PointF& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<PointF> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double polygon_area(std::span<const PointF> polygon) {
    if (polygon.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const PointF& a = polygon[i];
        const PointF& b = polygon[(i + 1) % polygon.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
}

HullMetrics convex_hull_metrics(std::span<const PointF> points_mm, double total_root_mm) {
    HullMetrics m;
    if (points_mm.empty()) return m;
    double min_x = points_mm[0].x, max_x = min_x, min_y = points_mm[0].y, max_y = min_y;
    for (const auto& p : points_mm) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    m.width_mm = max_x - min_x;
    m.height_mm = max_y - min_y;
    const auto hull = convex_hull({points_mm.begin(), points_mm.end()});
    m.area_mm2 = polygon_area(hull);
    if (m.area_mm2 > 0.0) m.root_density = total_root_mm / m.area_mm2;
    if (m.width_mm > 0.0) m.aspect_ratio = m.height_mm / m.width_mm;
    return m;
}

HullMetrics convex_hull_metrics(const RootGraph& graph, double mm_per_pixel) {
    std::vector<PointF> pts;
    for (const auto& e : graph.edges)
        for (const Point& p : e.polyline) pts.push_back({p.x * mm_per_pixel, p.y * mm_per_pixel});
    for (const auto& n : graph.nodes)
        pts.push_back({n.position.x * mm_per_pixel, n.position.y * mm_per_pixel});
    return convex_hull_metrics(pts, graph.total_length_mm());
}

MetricSeries growth_speed(const MetricSeries& series) {
    series.validate();
    const auto& s = series.samples;
    if (s.size() < 2) throw ValidationError("growth speed needs at least two samples");
    MetricSeries out{series.plant_id, series.metric_name + "_speed", Unit::mm_per_h, {}};
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
        out.samples.push_back(
            {s[i].time_hours, (s[hi].value - s[lo].value) / (s[hi].time_hours - s[lo].time_hours)});
    }
    return out;
}

MetricSeries detrend(const MetricSeries& series, double window_hours) {
    series.validate();
    const auto& s = series.samples;
    const double dt = median_gap(s);
    if (s.size() < 3 || !(dt > 0.0)) throw ValidationError("series shorter than the detrend window");
    long window = std::lround(window_hours / dt);
    if (window % 2 == 0) ++window;
    window = std::max<long>(window, 3);
    if (static_cast<long>(s.size()) < window)
        throw ValidationError("series shorter than the detrend window");
    const long half = window / 2;
    MetricSeries out{series.plant_id, series.metric_name + "_detrended", series.units, {}};
    const long n = static_cast<long>(s.size());
    std::vector<double> buf;
    for (long i = 0; i < n; ++i) {
        buf.clear();
        for (long j = std::max(0L, i - half); j <= std::min(n - 1, i + half); ++j)
            buf.push_back(s[j].value);
        out.samples.push_back({s[i].time_hours, s[i].value - median_of(buf)});
    }
    return out;
}

Spectrum fourier_components(const MetricSeries& series) {
    series.validate();
    const auto& s = series.samples;
    if (s.size() < 16) throw ValidationError("fourier analysis needs at least 16 samples");
    const double dt = median_gap(s);
    const double t0 = s.front().time_hours;
    const std::size_t n =
        static_cast<std::size_t>(std::floor((s.back().time_hours - t0) / dt + 1e-9)) + 1;
    if (n < 16) throw ValidationError("fourier analysis needs at least 16 samples");

    std::vector<std::complex<double>> x(n);
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        while (j + 2 < s.size() && s[j + 1].time_hours < t) ++j;
        const Sample& a = s[j];
        const Sample& b = s[j + 1];
        const double f = std::clamp((t - a.time_hours) / (b.time_hours - a.time_hours), 0.0, 1.0);
        x[k] = a.value + f * (b.value - a.value);
    }
    const auto X = fft(x);
    Spectrum spec;
    spec.sample_interval_hours = dt;
    spec.n = n;
    spec.dc = X[0].real() / static_cast<double>(n);
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const bool nyquist = (n % 2 == 0) && k == n / 2;
        const double amp = (nyquist ? 1.0 : 2.0) * std::abs(X[k]) / static_cast<double>(n);
        spec.lines.push_back({static_cast<double>(n) * dt / static_cast<double>(k), amp});
    }
    return spec;
}

MetricSeries persistence_filter(const MetricSeries& series, double min_hours) {
    series.validate();
    MetricSeries out = series;
    auto& s = out.samples;
    if (s.empty()) return out;
    const double dt = median_gap(s);

    struct Run {
        std::size_t begin, end;  // [begin, end)
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < s.size();) {
        if (s[i].value == 0.0) {
            ++i;
            continue;
        }
        std::size_t k = i;
        while (k < s.size() && s[k].value != 0.0) ++k;
        runs.push_back({i, k});
        i = k;
    }
    const auto duration = [dt](const Run& r) { return static_cast<double>(r.end - r.begin) * dt; };
    constexpr double eps = 1e-9;

    std::size_t first = 0;
    if (!runs.empty() && duration(runs.front()) < min_hours - eps) {
        for (std::size_t i = runs.front().begin; i < runs.front().end; ++i) s[i].value = 0.0;
        first = 1;
    }
    double total = 0.0;
    for (std::size_t r = first; r < runs.size(); ++r) total += duration(runs[r]);
    if (total < min_hours - eps) s.clear();
    return out;
}

MetricSeries enforce_monotone(const MetricSeries& series) {
    MetricSeries out = series;
    for (std::size_t i = 1; i < out.samples.size(); ++i)
        out.samples[i].value = std::max(out.samples[i].value, out.samples[i - 1].value);
    return out;
}

}  // namespace rootpipe

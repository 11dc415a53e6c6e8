#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "rootpipe/fft.hpp"
#include "rootpipe/rsa_metrics.hpp"

using namespace rootpipe;
using test::draw_line;

namespace {

MetricSeries series_of(const std::vector<double>& values, double dt = 1.0) {
    MetricSeries s{"p", "m", Unit::mm, {}};
    for (std::size_t i = 0; i < values.size(); ++i) s.samples.push_back({dt * i, values[i]});
    return s;
}

std::vector<Point> raster(Point a, Point b) {
    // Bresenham walk kept in path order.
    std::vector<Point> out;
    int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
    int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        out.push_back(a);
        if (a == b) break;
        const int e2 = 2 * err;
        if (e2 >= dy) { err += dy; a.x += sx; }
        if (e2 <= dx) { err += dx; a.y += sy; }
    }
    return out;
}

// Direct DFT, O(n^2).
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j)
            out[k] += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(j * k) / double(n));
    return out;
}

}  // namespace

TEST_CASE("basic_architecture") {
    SUBCASE("density formula") {
        const auto m = architecture_from(50.0, 20.0, 10);
        REQUIRE(m.lateral_density);
        CHECK(*m.lateral_density == doctest::Approx(2.0));
        CHECK(*m.lateral_density * m.main_root_mm / 10.0 == doctest::Approx(10.0));
    }
    SUBCASE("lateral-free line") {
        BinaryGrid g(10, 60);
        draw_line(g, {5, 0}, {5, 50});
        const auto graph = classify_main(build_graph(SkeletonGrid{g}, Point{5, 0}, 0.04), std::nullopt);
        const auto m = basic_architecture(graph);
        CHECK(m.lateral_root_mm == 0.0);
        CHECK(m.main_over_total == 1.0);
        CHECK(m.lateral_count == 0);
    }
    SUBCASE("T fixture") {
        const auto graph =
            classify_main(build_graph(SkeletonGrid{test::t_fixture()}, Point{20, 0}, 0.04), std::nullopt);
        const auto m = basic_architecture(graph);
        CHECK(m.main_root_mm == doctest::Approx(3.96));
        CHECK(m.lateral_root_mm == doctest::Approx(1.96));
        CHECK(m.total_root_mm == doctest::Approx(5.92));
        CHECK(m.lateral_count == 1);
        CHECK(m.main_over_total == doctest::Approx(3.96 / 5.92));
    }
    SUBCASE("zero main root") {
        const auto m = architecture_from(0.0, 0.0, 0);
        CHECK_FALSE(m.lateral_density);
        CHECK(m.main_over_total == 1.0);
    }
}

TEST_CASE("base_tip_angle") {
    CHECK(base_tip_angle({0, 0}, {0, 10}) == doctest::Approx(0.0));
    CHECK(base_tip_angle({0, 0}, {10, 0}) == doctest::Approx(90.0));
    CHECK(base_tip_angle({0, 0}, {10, 10}) == doctest::Approx(45.0));
    CHECK(base_tip_angle({0, 0}, {-10, 10}) == doctest::Approx(45.0));
    CHECK(base_tip_angle({0, 0}, {0, -10}) == doctest::Approx(180.0));
    CHECK_THROWS_AS(base_tip_angle({3, 4}, {3, 4}), ValidationError);
}

TEST_CASE("base_tip_angle is scale and translation invariant") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-50, 50), sc(0.1, 20);
    for (int i = 0; i < 200; ++i) {
        const PointF b{u(rng), u(rng)}, t{u(rng), u(rng)};
        const double a = base_tip_angle(b, t);
        const double s = sc(rng), ox = u(rng), oy = u(rng);
        CHECK(base_tip_angle({b.x * s + ox, b.y * s + oy}, {t.x * s + ox, t.y * s + oy}) ==
              doctest::Approx(a).epsilon(1e-9));
    }
}

TEST_CASE("emergence_angle") {
    SUBCASE("straight 45 degree root") {
        const auto line = raster({0, 0}, {90, 90});  // 5.09 mm at 0.04
        const auto a = emergence_angle(line, 2.0, 0.04);
        REQUIRE(a);
        CHECK(*a == doctest::Approx(45.0));
    }
    SUBCASE("L-shaped root: only the first 2 mm matter") {
        auto path = raster({0, 0}, {50, 0});
        const auto down = raster({50, 1}, {50, 80});
        path.insert(path.end(), down.begin(), down.end());
        const auto a = emergence_angle(path, 2.0, 0.04);
        REQUIRE(a);
        CHECK(*a == doctest::Approx(90.0));
    }
    SUBCASE("root shorter than d is skipped") {
        CHECK_FALSE(emergence_angle(raster({0, 0}, {0, 25}), 2.0, 0.04));
    }
    SUBCASE("straight polylines: emergence equals base-tip for every valid d") {
        std::mt19937 rng(4);
        std::uniform_int_distribution<int> u(-120, 120);
        for (int i = 0; i < 100; ++i) {
            const Point tip{u(rng), std::abs(u(rng))};
            if (std::hypot(tip.x, tip.y) < 60) continue;
            const auto line = raster({0, 0}, tip);
            const double bt = base_tip_angle({0, 0}, {double(tip.x), double(tip.y)});
            for (double d : {1.0, 2.0}) {
                const auto e = emergence_angle(line, d, 0.04);
                REQUIRE(e);
                CHECK(std::abs(*e - bt) < 2.0);
            }
        }
    }
}

TEST_CASE("convex hull metrics") {
    SUBCASE("square") {
        const std::vector<PointF> pts{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
        const auto m = convex_hull_metrics(pts, 40.0);
        CHECK(m.area_mm2 == doctest::Approx(100.0));
        CHECK(m.width_mm == doctest::Approx(10.0));
        CHECK(m.height_mm == doctest::Approx(10.0));
        REQUIRE(m.aspect_ratio);
        CHECK(*m.aspect_ratio == doctest::Approx(1.0));
        REQUIRE(m.root_density);
        CHECK(*m.root_density == doctest::Approx(0.4));
    }
    SUBCASE("collinear points") {
        const std::vector<PointF> pts{{0, 0}, {1, 1}, {2, 2}, {5, 5}};
        const auto m = convex_hull_metrics(pts, 7.0);
        CHECK(m.area_mm2 == 0.0);
        CHECK_FALSE(m.root_density);
    }
    SUBCASE("right triangle") {
        const std::vector<PointF> pts{{0, 0}, {10, 0}, {0, 10}, {2, 2}};
        CHECK(convex_hull_metrics(pts, 1.0).area_mm2 == doctest::Approx(50.0));
    }
    SUBCASE("permutation invariance and subset monotonicity") {
        std::mt19937 rng(8);
        std::uniform_real_distribution<double> u(0, 20);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<PointF> pts(40);
            for (auto& p : pts) p = {u(rng), u(rng)};
            const double area = polygon_area(convex_hull(pts));
            auto shuffled = pts;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            CHECK(polygon_area(convex_hull(shuffled)) == doctest::Approx(area));
            shuffled.resize(15);
            CHECK(polygon_area(convex_hull(shuffled)) <= area + 1e-12);
        }
    }
}

TEST_CASE("growth_speed") {
    CHECK(growth_speed(series_of({0, 1, 2, 3, 4})).values() == std::vector<double>{1, 1, 1, 1, 1});
    CHECK(growth_speed(series_of({3, 3, 3})).values() == std::vector<double>{0, 0, 0});
    const auto s = growth_speed(series_of({0, 2, 2}));
    CHECK(s.values() == std::vector<double>{2.0, 1.0, 0.0});
    CHECK(s.units == Unit::mm_per_h);
    CHECK_THROWS_AS(growth_speed(series_of({1})), ValidationError);
}

TEST_CASE("detrend") {
    SUBCASE("constant series") {
        for (double v : detrend(series_of(std::vector<double>(50, 4.0), 0.25), 5.0).values())
            CHECK(v == 0.0);
    }
    SUBCASE("fast sinusoid survives a long window") {
        std::vector<double> v;
        for (int i = 0; i < 400; ++i) v.push_back(3.0 + std::sin(2 * std::numbers::pi * i * 0.25 / 2.0));
        const auto s = series_of(v, 0.25);
        const auto d = detrend(s, 25.0);
        // Oracle: median taken directly over each centred 101-sample window.
        for (int i = 50; i < 350; ++i) {
            std::vector<double> w(v.begin() + i - 50, v.begin() + i + 51);
            std::nth_element(w.begin(), w.begin() + 50, w.end());
            CHECK(d.samples[i].value == doctest::Approx(v[i] - w[50]));
            CHECK(std::abs(d.samples[i].value - (v[i] - 3.0)) < 0.05);
        }
    }
    SUBCASE("linear ramp: residual only at the edges, bounded by slope x half-window") {
        std::vector<double> v;
        for (int i = 0; i < 100; ++i) v.push_back(0.5 * i);
        const auto d = detrend(series_of(v, 1.0), 11.0);
        for (int i = 0; i < 100; ++i) {
            const double r = std::abs(d.samples[i].value);
            CHECK(r <= 0.5 * 5 + 1e-12);
            if (i >= 5 && i < 95) CHECK(r == doctest::Approx(0.0));
        }
    }
    SUBCASE("series shorter than window") {
        CHECK_THROWS_AS(detrend(series_of({1, 2, 3, 4}, 1.0), 11.0), ValidationError);
    }
}

TEST_CASE("fft matches a direct DFT for assorted lengths") {
    std::mt19937 rng(12);
    std::normal_distribution<double> n01;
    for (std::size_t n : {1u, 2u, 3u, 7u, 12u, 16u, 30u, 97u, 576u}) {
        std::vector<std::complex<double>> x(n);
        for (auto& v : x) v = {n01(rng), n01(rng)};
        const auto a = fft(x);
        const auto b = naive_dft(x);
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-8 * (1 + std::abs(b[k])));
    }
}

TEST_CASE("fourier_components") {
    const double dt = 0.25;
    const auto make = [&](auto f) {
        std::vector<double> v;
        for (int i = 0; i < 576; ++i) v.push_back(f(i * dt));
        return series_of(v, dt);
    };
    const auto peak = [](const Spectrum& s) {
        return *std::max_element(s.lines.begin(), s.lines.end(),
                                 [](const auto& a, const auto& b) { return a.amplitude < b.amplitude; });
    };

    SUBCASE("24 h sinusoid") {
        const auto spec = fourier_components(make([](double t) { return std::sin(2 * std::numbers::pi * t / 24.0); }));
        const auto p = peak(spec);
        CHECK(p.period_hours == doctest::Approx(24.0));
        CHECK(p.amplitude == doctest::Approx(1.0));
    }
    SUBCASE("24 h + 12 h sinusoids") {
        const auto spec = fourier_components(make([](double t) {
            return 0.8 * std::sin(2 * std::numbers::pi * t / 24.0) + 0.3 * std::cos(2 * std::numbers::pi * t / 12.0);
        }));
        auto lines = spec.lines;
        std::sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) { return a.amplitude > b.amplitude; });
        CHECK(lines[0].period_hours == doctest::Approx(24.0));
        CHECK(lines[0].amplitude == doctest::Approx(0.8));
        CHECK(lines[1].period_hours == doctest::Approx(12.0));
        CHECK(lines[1].amplitude == doctest::Approx(0.3));
    }
    SUBCASE("constant signal") {
        const auto spec = fourier_components(make([](double) { return 5.0; }));
        for (const auto& l : spec.lines) CHECK(l.amplitude < 1e-9);
        CHECK(spec.dc == doctest::Approx(5.0));
    }
    SUBCASE("Parseval") {
        std::mt19937 rng(6);
        std::normal_distribution<double> n01;
        for (int len : {64, 99, 576}) {
            std::vector<double> v(len);
            for (auto& x : v) x = n01(rng);
            const auto spec = fourier_components(series_of(v, dt));
            double energy = 0.0;
            for (double x : v) energy += x * x;
            energy /= len;
            double sum = spec.dc * spec.dc;
            for (std::size_t k = 0; k < spec.lines.size(); ++k) {
                const bool nyq = len % 2 == 0 && k + 1 == spec.lines.size();
                sum += nyq ? spec.lines[k].amplitude * spec.lines[k].amplitude
                           : spec.lines[k].amplitude * spec.lines[k].amplitude / 2.0;
            }
            CHECK(std::abs(sum - energy) <= 1e-6 * energy);
        }
    }
    SUBCASE("too few samples") {
        CHECK_THROWS_AS(fourier_components(series_of(std::vector<double>(10, 1.0))), ValidationError);
    }
}

TEST_CASE("persistence_filter") {
    const auto visible_for = [](int samples) {
        std::vector<double> v(80, 0.0);
        for (int i = 20; i < 20 + samples; ++i) v[i] = 1.0 + 0.01 * i;
        return series_of(v, 0.25);
    };
    CHECK(persistence_filter(visible_for(20), 6.0).samples.empty());   // 5.0 h
    CHECK(persistence_filter(visible_for(25), 6.0).values() == visible_for(25).values());  // 6.25 h
    CHECK(persistence_filter(series_of({}), 6.0).samples.empty());

    SUBCASE("false start zeroed") {
        std::vector<double> v(100, 0.0);
        for (int i = 5; i < 9; ++i) v[i] = 1.0;    // 1 h blip
        for (int i = 40; i < 100; ++i) v[i] = 2.0; // 15 h
        const auto out = persistence_filter(series_of(v, 0.25), 6.0);
        REQUIRE(out.samples.size() == 100);
        for (int i = 0; i < 40; ++i) CHECK(out.samples[i].value == 0.0);
        for (int i = 40; i < 100; ++i) CHECK(out.samples[i].value == 2.0);
    }
}

TEST_CASE("enforce_monotone") {
    CHECK(enforce_monotone(series_of({1, 3, 2, 4})).values() == std::vector<double>{1, 3, 3, 4});
    CHECK(enforce_monotone(series_of({1, 2, 5})).values() == std::vector<double>{1, 2, 5});
    CHECK(enforce_monotone(series_of({2, 2, 2})).values() == std::vector<double>{2, 2, 2});

    std::mt19937 rng(10);
    std::uniform_real_distribution<double> u(0, 10);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(30);
        for (auto& x : v) x = u(rng);
        const auto once = enforce_monotone(series_of(v));
        CHECK(enforce_monotone(once).values() == once.values());
        for (std::size_t i = 0; i < v.size(); ++i) {
            CHECK(once.samples[i].value >= v[i]);
            if (i) CHECK(once.samples[i].value >= once.samples[i - 1].value);
        }
    }
}

TEST_CASE("unit names round trip") {
    for (Unit u : {Unit::mm, Unit::mm_per_h, Unit::mm2, Unit::count, Unit::lrs_per_cm, Unit::ratio,
                   Unit::degrees, Unit::percent, Unit::hours, Unit::mm_per_mm2})
        CHECK(unit_from_string(to_string(u)) == u);
    CHECK_THROWS_AS(unit_from_string("furlong"), ValidationError);
}

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "rootpipe/screening.hpp"

using namespace rootpipe;

namespace {

// Inverse of the Hill curve with g0 = 0.
double hill_inverse(double g, double g_max, double n, double t50) {
    return t50 * std::pow(g / (g_max - g), 1.0 / n);
}

// Noise-free events: seed i germinates when the curve reaches its mid-rank.
std::vector<double> hill_events(int seeds, double g_max, double n, double t50) {
    std::vector<double> out;
    const int germinated = static_cast<int>(std::lround(seeds * g_max / 100.0));
    for (int i = 0; i < germinated; ++i) out.push_back(hill_inverse(100.0 * (i + 0.5) / seeds, g_max, n, t50));
    return out;
}

std::vector<double> frame_times(double horizon, double dt) {
    std::vector<double> t;
    for (int k = 0; k * dt <= horizon + 1e-9; ++k) t.push_back(k * dt);
    return t;
}

LabelMask seed_with_root(int root_px) {
    LabelMask m(40, 40);
    for (int y = 10; y < 14; ++y)
        for (int x = 10; x < 14; ++x) m.set(x, y, 3);
    for (int k = 0; k < root_px; ++k) m.set(12, 14 + k, 1);
    m.set(30, 30, 1);  // detached root pixels never count
    m.set(30, 31, 1);
    m.set(30, 32, 1);
    return m;
}

}  // namespace

TEST_CASE("hill curve identities") {
    const HillParams p{3.0, 80.0, 6.0, 12.0};
    CHECK(hill(p, p.t50) - p.g0 == p.g_max / 2.0);
    CHECK(hill(p, 0.0) == p.g0);
    double prev = hill(p, 0.0);
    for (double t = 0.1; t < 60.0; t += 0.1) {
        CHECK(hill(p, t) >= prev);
        prev = hill(p, t);
    }
    CHECK(tmgr(1.0, 13.0) == 0.0);
    CHECK(tmgr(8.0, 13.4) == doctest::Approx(13.4 * std::pow(7.0 / 9.0, 1.0 / 8.0)));
    CHECK(tmgr(8.0, 13.4) < 13.4);
}

TEST_CASE("fit_hill recovers generating parameters") {
    const auto events = hill_events(200, 95.0, 8.0, 13.4);
    CHECK(events.size() == 190);
    const auto t = frame_times(48.0, 0.25);
    const auto fit = fit_hill(events, 200, t);
    REQUIRE(fit.fitted);
    CHECK(std::abs(fit.params.g0) <= 2.0);
    CHECK(std::abs(fit.params.g_max - 95.0) <= 0.02 * 95.0);
    CHECK(std::abs(fit.params.n - 8.0) <= 0.02 * 8.0);
    CHECK(std::abs(fit.params.t50 - 13.4) <= 0.02 * 13.4);
    CHECK(fit.params.g0 + fit.params.g_max <= 100.0);
    CHECK(fit.tmgr == tmgr(fit.params.n, fit.params.t50));
    CHECK(fit.final_percent == 95.0);
    CHECK(fit.fitted_percent.size() == t.size());
    CHECK(fit.rmse < 1.0);
}

TEST_CASE("fit_hill with no events skips the fit") {
    const auto t = frame_times(24.0, 0.25);
    const auto fit = fit_hill({}, 50, t);
    CHECK_FALSE(fit.fitted);
    CHECK(fit.final_percent == 0.0);
    CHECK_THROWS_AS(fit_hill({}, 0, t), ValidationError);
}

TEST_CASE("final percentage counts germinated seeds") {
    std::map<int, std::optional<double>> seeds{{1, 5.0}, {2, std::nullopt}, {3, 6.0}, {4, 7.5}};
    const auto fit = fit_germination(seeds, 8, frame_times(12.0, 0.25));
    CHECK(fit.final_percent == 3.0 / 8.0 * 100.0);
    CHECK(fit.per_seed_times.size() == 4);
    CHECK(fit.empirical_percent.back() == 37.5);
}

TEST_CASE("germination needs persistent attached root pixels") {
    const PixelRect all{0, 0, 40, 40};
    CHECK(attached_root_pixels(seed_with_root(0), all) == 0);
    CHECK(attached_root_pixels(seed_with_root(4), all) == 4);

    std::vector<Frame> frames;
    for (int i = 0; i < 80; ++i) frames.push_back({seed_with_root(0), i * 0.25});
    CHECK_FALSE(detect_germination(frames, all).has_value());

    frames[20].mask = seed_with_root(5);  // one-frame flicker
    CHECK_FALSE(detect_germination(frames, all).has_value());

    for (int i = 54; i < 80; ++i) frames[i].mask = seed_with_root(3 + (i - 54) / 4);
    const auto g = detect_germination(frames, all);
    REQUIRE(g.has_value());
    CHECK(*g == 13.5);
}

TEST_CASE("hypocotyl length is the skeleton path") {
    LabelMask m(80, 20);
    for (int x = 10; x < 60; ++x) m.set(x, 5, 4);
    const PixelRect all{0, 0, 80, 20};
    CHECK(hypocotyl_length(m, all, 0.04) == doctest::Approx(1.96));
    CHECK(hypocotyl_length(LabelMask(80, 20), all, 0.04) == 0.0);
}

TEST_CASE("plant measures") {
    LabelMask m(30, 120);
    for (int y = 0; y < 100; ++y) m.set(10, y, 1);
    const PixelRect all{0, 0, 30, 120};
    const auto pm = plant_measures(m, m, all, 0.04);
    CHECK(pm.plant_area_mm2 == doctest::Approx(0.16));
    CHECK_FALSE(pm.seed_size_mm2.has_value());
    CHECK(pm.root_length_mm == doctest::Approx(3.96));

    LabelMask first(30, 120);
    for (int x = 0; x < 5; ++x) first.set(x, 110, 3);
    CHECK(*plant_measures(m, first, all, 0.04).seed_size_mm2 == doctest::Approx(5 * 0.0016));
}

TEST_CASE("region_around clips to the frame") {
    const auto r = region_around({5.0, 5.0, 4.0, 4.0}, 10, 50, 40);
    CHECK(r.x0 == 0);
    CHECK(r.y0 == 0);
    CHECK(r.x1 == 17);
    CHECK(r.y1 == 17);
}

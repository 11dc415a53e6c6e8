#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "rootpipe/temporal_fusion.hpp"

using namespace rootpipe;

namespace {

LabelMask single(int label) {
    LabelMask m(1, 1);
    m.set(0, 0, static_cast<std::uint8_t>(label));
    return m;
}

// Recurrence unrolled by hand: a_t = s_t + alpha * a_{t-1}, a_0 = 0.
double unrolled(const std::vector<int>& s, double alpha) {
    double a = 0.0;
    for (int v : s) a = v + alpha * a;
    return a;
}

}  // namespace

TEST_CASE("accumulate converges to the geometric-series limit") {
    AccumulatorState st(0.5);
    for (int i = 0; i < 25; ++i) st = accumulate(st, single(1));
    CHECK(st.main_at(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(st.main_at(0, 0) - 2.0) < 1e-6);
    CHECK(st.lateral_at(0, 0) == 0.0);
}

TEST_CASE("accumulate decays monotonically without input") {
    AccumulatorState st(0.8);
    st = accumulate(st, single(2));
    double prev = st.lateral_at(0, 0);
    for (int i = 0; i < 10; ++i) {
        st = accumulate(st, single(0));
        CHECK(st.lateral_at(0, 0) < prev);
        CHECK(st.lateral_at(0, 0) >= 0.0);
        prev = st.lateral_at(0, 0);
    }
}

TEST_CASE("alternating input follows the unrolled recurrence") {
    const std::vector<int> s{1, 0, 1, 0};
    CHECK(unrolled(s, 0.5) == doctest::Approx(0.625));
    AccumulatorState st(0.5);
    for (int v : s) st = accumulate(st, single(v));
    CHECK(st.main_at(0, 0) == doctest::Approx(0.5 + 0.125));
}

TEST_CASE("accumulate rejects mismatched dimensions") {
    AccumulatorState st(0.5);
    st = accumulate(st, LabelMask(3, 3));
    CHECK_THROWS_AS(accumulate(st, LabelMask(4, 3)), ValidationError);
    CHECK_THROWS_AS(AccumulatorState(1.0), ValidationError);
}

TEST_CASE("fuse") {
    SUBCASE("present now, threshold 1.0") {
        AccumulatorState st(0.7);
        st = accumulate(st, single(1));
        CHECK(fuse(st, single(1), 1.0).at(0, 0) == 1);
    }
    SUBCASE("droplet occlusion is bridged") {
        std::vector<int> s(10, 1);
        s.push_back(0);
        const double expected = unrolled(s, 0.9);
        CHECK(expected > 1.0);
        AccumulatorState st(0.9);
        for (int v : s) st = accumulate(st, single(v * 2));
        CHECK(st.lateral_at(0, 0) == doctest::Approx(expected));
        CHECK(fuse(st, single(0), 1.0).at(0, 0) == 2);
    }
    SUBCASE("fresh state, empty mask") {
        AccumulatorState st(0.7);
        const LabelMask empty(5, 5);
        st = accumulate(st, empty);
        CHECK(fuse(st, empty, 1.0) == empty);
    }
    SUBCASE("conflict goes to the larger accumulator") {
        AccumulatorState st(0.9);
        for (int i = 0; i < 5; ++i) st = accumulate(st, single(2));
        st = accumulate(st, single(1));
        CHECK(fuse(st, single(1), 1.0).at(0, 0) == 2);
    }
}

TEST_CASE("fusion invariants on random sequences") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> label(0, 6);
    const int w = 12, h = 9;
    const auto random_mask = [&] {
        std::vector<std::uint8_t> v(w * h);
        for (auto& x : v) x = static_cast<std::uint8_t>(label(rng));
        return LabelMask(w, h, v);
    };

    SUBCASE("alpha 0 with threshold 0.5 reproduces the input") {
        AccumulatorState st(0.0);
        for (int f = 0; f < 10; ++f) {
            const LabelMask m = random_mask();
            st = accumulate(st, m);
            CHECK(fuse(st, m, 0.5) == m);
        }
    }
    SUBCASE("bounded memory and shoot classes untouched") {
        const double alpha = 0.85;
        AccumulatorState st(alpha);
        for (int f = 0; f < 60; ++f) {
            const LabelMask m = random_mask();
            st = accumulate(st, m);
            for (double v : st.accum_main) CHECK(v <= 1.0 / (1.0 - alpha) + 1e-9);
            for (double v : st.accum_lateral) CHECK(v <= 1.0 / (1.0 - alpha) + 1e-9);
            const LabelMask out = fuse(st, m, 1.0);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (m.at(x, y) >= 3) CHECK(out.at(x, y) == m.at(x, y));
                    if (out.at(x, y) >= 3) CHECK(out.at(x, y) == m.at(x, y));
                }
        }
    }
}

TEST_CASE("default alpha keeps the half-life fixed in hours") {
    CHECK(default_alpha(0.25) == doctest::Approx(0.7));
    CHECK(default_alpha(0.5) == doctest::Approx(0.49));
}

TEST_CASE("clean_binary") {
    SUBCASE("2-pixel speck removed") {
        BinaryGrid g(20, 20);
        g.set(5, 5);
        g.set(6, 5);
        CHECK(clean_binary(g, 5).empty());
    }
    SUBCASE("100-pixel blob unchanged") {
        BinaryGrid g(30, 30);
        test::fill_rect(g, 10, 10, 10, 10);
        CHECK(clean_binary(g, 5) == g);
    }
    SUBCASE("4 and 6 pixel blobs, only the larger survives") {
        BinaryGrid g(30, 30);
        test::fill_rect(g, 2, 2, 2, 2);
        test::fill_rect(g, 20, 20, 2, 3);
        BinaryGrid expected(30, 30);
        test::fill_rect(expected, 20, 20, 2, 3);
        CHECK(clean_binary(g, 5) == expected);
    }
    SUBCASE("closing bridges a one-pixel gap") {
        BinaryGrid g(30, 5);
        test::draw_line(g, {2, 2}, {12, 2});
        test::draw_line(g, {14, 2}, {25, 2});
        const auto out = clean_binary(g, 5);
        CHECK(out.at(13, 2));
    }
}

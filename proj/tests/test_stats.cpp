#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rootpipe/common.hpp"
#include "rootpipe/stats.hpp"

using namespace rootpipe;

namespace {

// Two-sided exact p by listing every split of the pooled ranks.
double enumerated_p(const std::vector<double>& a, const std::vector<double>& b) {
    const int n_a = static_cast<int>(a.size()), n = n_a + static_cast<int>(b.size());
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    auto u_of = [&](const std::vector<int>& members) {
        double u = 0.0;
        for (int i : members)
            for (int j = 0; j < n; ++j)
                if (std::find(members.begin(), members.end(), j) == members.end() && sorted[i] > sorted[j]) u += 1.0;
        return u;
    };
    std::vector<int> observed;
    for (double v : a) observed.push_back(static_cast<int>(std::find(sorted.begin(), sorted.end(), v) - sorted.begin()));
    const double u_obs = u_of(observed);

    std::vector<char> pick(n, 0);
    std::fill(pick.begin(), pick.begin() + n_a, 1);
    double lower = 0, upper = 0, total = 0;
    do {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (pick[i]) members.push_back(i);
        const double u = u_of(members);
        total += 1;
        if (u <= u_obs) lower += 1;
        if (u >= u_obs) upper += 1;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

std::vector<double> draw(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("separated samples give the enumerated p") {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    const auto r = mann_whitney(a, b);
    CHECK(r.u == 0.0);
    CHECK(r.exact);
    CHECK(r.p_value == doctest::Approx(0.1));
}

TEST_CASE("identical samples sit at the centre") {
    const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
    const auto r = mann_whitney(a, b);
    CHECK(r.u == 8.0);
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("exact p agrees with enumeration for small samples") {
    std::mt19937 rng(99);
    for (int n_a = 1; n_a <= 9; ++n_a) {
        for (int n_b = 1; n_a + n_b <= 10; ++n_b) {
            const auto a = draw(rng, n_a), b = draw(rng, n_b);
            const auto r = mann_whitney(a, b);
            CHECK(r.exact);
            CHECK(r.p_value == doctest::Approx(enumerated_p(a, b)).epsilon(1e-12));
        }
    }
}

TEST_CASE("normal approximation tracks the exact null at six per group") {
    std::mt19937 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(6), b(6);
        const double shift = (trial % 5) * 0.4;
        for (auto& x : a) x = g(rng);
        for (auto& x : b) x = g(rng) + shift;
        const double exact = mann_whitney(a, b, MwMethod::exact).p_value;
        const double approx = mann_whitney(a, b, MwMethod::normal).p_value;
        CHECK(std::abs(exact - approx) <= 0.02);
    }
}

TEST_CASE("U identity and invariances") {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = draw(rng, 3 + trial % 9), b = draw(rng, 2 + trial % 7);
        const auto ab = mann_whitney(a, b), ba = mann_whitney(b, a);
        CHECK(ab.u + ba.u == doctest::Approx(static_cast<double>(a.size() * b.size())));
        CHECK(ab.u <= static_cast<double>(a.size() * b.size()));
        CHECK(ab.p_value == doctest::Approx(ba.p_value));
        CHECK(ab.p_value >= 0.0);
        CHECK(ab.p_value <= 1.0);
        auto a2 = a, b2 = b;
        for (auto& x : a2) x = std::exp(x) + 3.0;
        for (auto& x : b2) x = std::exp(x) + 3.0;
        const auto t = mann_whitney(a2, b2);
        CHECK(t.u == ab.u);
        CHECK(t.p_value == doctest::Approx(ab.p_value));
    }
    CHECK_THROWS_AS(mann_whitney({}, std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("ties use the corrected normal approximation") {
    const std::vector<double> a{1, 1, 2, 2, 3}, b{2, 3, 3, 4, 4};
    const auto r = mann_whitney(a, b);
    CHECK_FALSE(r.exact);
    // Pairwise count: 2 x 0 + 2 x 0.5 + (1 + 0.5 + 0.5) = 3.
    CHECK(r.u == doctest::Approx(3.0));
    // mu = 12.5; tie groups of 2, 3, 3, 2 give sum(t^3 - t) = 60.
    const double z = (12.5 - 3.0 - 0.5) / std::sqrt(25.0 / 12.0 * (11.0 - 60.0 / 90.0));
    CHECK(r.p_value == doctest::Approx(std::erfc(z / std::sqrt(2.0))));
    const std::vector<double> same{5, 5, 5};
    CHECK(mann_whitney(same, same).p_value == 1.0);
}

TEST_CASE("summary moments") {
    const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    const auto s = summarize(v);
    CHECK(s.mean == 5.0);
    CHECK(s.sd == doctest::Approx(std::sqrt(32.0 / 7.0)));
    CHECK(s.se == doctest::Approx(s.sd / std::sqrt(8.0)));
    const std::vector<double> one{3.0};
    CHECK(summarize(one).se == 0.0);
    CHECK(summarize({}).n == 0);
}

TEST_CASE("markers and number formatting") {
    CHECK(significance_marker(0.0005) == "**");
    CHECK(significance_marker(0.01) == "*");
    CHECK(significance_marker(0.05).empty());
    CHECK(format_number(1.0 / 3.0) == "0.333333");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1234567.0) == "1.23457e+06");
    CHECK(format_optional(std::nullopt) == "NA");
}

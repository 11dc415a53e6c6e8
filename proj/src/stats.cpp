#include "rootpipe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "rootpipe/common.hpp"

namespace rootpipe {

namespace {

// Number of orderings of n_a + n_b distinct values giving U = u, for each u.
std::vector<double> u_distribution(int n_a, int n_b) {
    // f[i][j] holds the distribution for i values of a and j of b.
    std::vector<std::vector<std::vector<double>>> f(n_a + 1, std::vector<std::vector<double>>(n_b + 1));
    for (int i = 0; i <= n_a; ++i) {
        for (int j = 0; j <= n_b; ++j) {
            auto& d = f[i][j];
            d.assign(static_cast<std::size_t>(i * j + 1), 0.0);
            if (i == 0 || j == 0) {
                d[0] = 1.0;
                continue;
            }
            // Largest value is from a (adds j to U) or from b (adds nothing).
            const auto& from_a = f[i - 1][j];
            const auto& from_b = f[i][j - 1];
            for (std::size_t u = 0; u < from_a.size(); ++u) d[u + j] += from_a[u];
            for (std::size_t u = 0; u < from_b.size(); ++u) d[u] += from_b[u];
        }
    }
    return f[n_a][n_b];
}

}  // namespace

MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b, MwMethod method) {
    if (a.empty() || b.empty()) throw ValidationError("Mann-Whitney needs two non-empty samples");
    const int n_a = static_cast<int>(a.size());
    const int n_b = static_cast<int>(b.size());
    const int n = n_a + n_b;

    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(n);
    for (double v : a) pooled.emplace_back(v, 0);
    for (double v : b) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end());

    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    bool ties = false;
    for (int i = 0; i < n;) {
        int j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const double mid = (i + 1 + j) / 2.0;
        for (int k = i; k < j; ++k)
            if (pooled[k].second == 0) rank_sum_a += mid;
        const double t = j - i;
        if (t > 1) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j;
    }

    MannWhitneyResult r;
    r.u = rank_sum_a - n_a * (n_a + 1) / 2.0;
    const bool use_exact = method == MwMethod::exact || (method == MwMethod::automatic && n <= 12 && !ties);
    if (use_exact) {
        if (ties) throw ValidationError("exact Mann-Whitney null requires untied data");
        const auto dist = u_distribution(n_a, n_b);
        const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
        const auto u = static_cast<std::size_t>(std::llround(r.u));
        double lower = 0.0, upper = 0.0;
        for (std::size_t k = 0; k < dist.size(); ++k) {
            if (k <= u) lower += dist[k];
            if (k >= u) upper += dist[k];
        }
        r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / total);
        r.exact = true;
        return r;
    }

    const double mu = n_a * static_cast<double>(n_b) / 2.0;
    const double var = n_a * static_cast<double>(n_b) / 12.0 * ((n + 1) - tie_term / (static_cast<double>(n) * (n - 1)));
    if (!(var > 0.0)) {
        r.p_value = 1.0;
        return r;
    }
    const double z = std::max(0.0, std::abs(r.u - mu) - 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return r;
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.n = static_cast<int>(values.size());
    if (s.n == 0) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / (s.n - 1));
        s.se = s.sd / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

std::string significance_marker(double p) {
    if (p < 0.001) return "**";
    if (p < 0.05) return "*";
    return "";
}

std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds negative zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

}  // namespace rootpipe

#include "rootpipe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "rootpipe/skeleton.hpp"

namespace rootpipe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_size(const BinaryGrid& a, const BinaryGrid& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw ValidationError("grids differ in size: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                              " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
}

// One-dimensional squared distance transform of sampled function f.
void transform_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (std::isinf(f[q])) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double s = 0.0;
        for (;;) {
            const int p = v[k];
            s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
            if (s > z[k]) break;
            if (--k < 0) break;
        }
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(d.begin(), d.end(), kInf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const double dq = q - v[j];
        d[q] = dq * dq + f[v[j]];
    }
}

// Pixels of class `cls` from both masks, cropped to their joint bounding box
// grown by one pixel. Every metric below depends only on pixel offsets, and
// the background border keeps thinning identical to the full-frame result.
std::pair<BinaryGrid, BinaryGrid> class_crops(const LabelMask& pred, const LabelMask& truth, int cls) {
    int x0 = pred.width(), y0 = pred.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < pred.height(); ++y)
        for (int x = 0; x < pred.width(); ++x)
            if (pred.at(x, y) == cls || truth.at(x, y) == cls) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) return {};
    x0 = std::max(0, x0 - 1);
    y0 = std::max(0, y0 - 1);
    x1 = std::min(pred.width() - 1, x1 + 1);
    y1 = std::min(pred.height() - 1, y1 + 1);
    BinaryGrid p(x1 - x0 + 1, y1 - y0 + 1), t(x1 - x0 + 1, y1 - y0 + 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            if (pred.at(x, y) == cls) p.set(x - x0, y - y0);
            if (truth.at(x, y) == cls) t.set(x - x0, y - y0);
        }
    return {std::move(p), std::move(t)};
}

}  // namespace

std::vector<double> squared_distance_transform(const BinaryGrid& set) {
    const int w = set.width(), h = set.height();
    std::vector<double> out(static_cast<std::size_t>(w) * h, kInf);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (set.at(x, y)) out[static_cast<std::size_t>(y) * w + x] = 0.0;

    const int n = std::max(w, h);
    std::vector<double> f, d;
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    f.resize(h);
    d.resize(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = out[static_cast<std::size_t>(y) * w + x];
        transform_1d(f, d, v, z);
        for (int y = 0; y < h; ++y) out[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    f.resize(w);
    d.resize(w);
    for (int y = 0; y < h; ++y) {
        std::copy_n(out.begin() + static_cast<std::ptrdiff_t>(y) * w, w, f.begin());
        transform_1d(f, d, v, z);
        std::copy_n(d.begin(), w, out.begin() + static_cast<std::ptrdiff_t>(y) * w);
    }
    return out;
}

double dice(const BinaryGrid& pred, const BinaryGrid& truth) {
    require_same_size(pred, truth);
    std::size_t a = 0, b = 0, both = 0;
    const auto& pa = pred.raw();
    const auto& pb = truth.raw();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        a += pa[i] != 0;
        b += pb[i] != 0;
        both += (pa[i] != 0) && (pb[i] != 0);
    }
    if (a + b == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

double directed_hausdorff_px(const BinaryGrid& from, const BinaryGrid& to) {
    require_same_size(from, to);
    if (from.empty()) return 0.0;
    if (to.empty()) return kInf;
    const auto dt = squared_distance_transform(to);
    double worst = 0.0;
    const auto& raw = from.raw();
    for (std::size_t i = 0; i < raw.size(); ++i)
        if (raw[i]) worst = std::max(worst, dt[i]);
    return std::sqrt(worst);
}

double hausdorff(const BinaryGrid& pred, const BinaryGrid& truth, double mm_per_pixel) {
    require_same_size(pred, truth);
    if (pred.empty() || truth.empty()) return kInf;
    return std::max(directed_hausdorff_px(pred, truth), directed_hausdorff_px(truth, pred)) * mm_per_pixel;
}

std::optional<double> fraction_within(const BinaryGrid& of, const BinaryGrid& near, double tolerance_px) {
    require_same_size(of, near);
    const std::size_t total = of.count();
    if (total == 0) return std::nullopt;
    const auto dt = squared_distance_transform(near);
    const double tol2 = tolerance_px * tolerance_px;
    std::size_t hit = 0;
    const auto& raw = of.raw();
    for (std::size_t i = 0; i < raw.size(); ++i)
        if (raw[i] && dt[i] <= tol2) ++hit;
    return static_cast<double>(hit) / static_cast<double>(total);
}

SkeletonMatch skeleton_completeness_correctness(const BinaryGrid& pred_skel, const BinaryGrid& truth_skel,
                                                double tolerance_px) {
    return {fraction_within(truth_skel, pred_skel, tolerance_px), fraction_within(pred_skel, truth_skel, tolerance_px)};
}

std::vector<EvalResult> evaluate_masks(const LabelMask& pred, const LabelMask& truth, double mm_per_pixel,
                                       double tolerance_px) {
    if (pred.width() != truth.width() || pred.height() != truth.height())
        throw ValidationError("prediction and truth masks differ in size");
    std::vector<EvalResult> out;
    for (int c = 1; c < kNumClasses; ++c) {
        const auto [p, t] = class_crops(pred, truth, c);
        if (p.empty() && t.empty()) continue;
        EvalResult r;
        r.label = c;
        r.dice = dice(p, t);
        r.hausdorff_mm = hausdorff(p, t, mm_per_pixel);
        const auto m = skeleton_completeness_correctness(thin(p).pixels, thin(t).pixels, tolerance_px);
        r.completeness = m.completeness;
        r.correctness = m.correctness;
        out.push_back(r);
    }
    return out;
}

}  // namespace rootpipe

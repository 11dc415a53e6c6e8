#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rootpipe/mask_io.hpp"
#include "rootpipe/tracking.hpp"

namespace rootpipe {

/// Inclusive-exclusive pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    [[nodiscard]] bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

/// Pixels covered by `box` grown by `margin`, clipped to the frame.
PixelRect region_around(const BBox& box, int margin, int width, int height);

struct GerminationParams {
    int min_root_px = 3;       // class-1 pixels attached to the seed
    int min_frames = 4;        // consecutive frames
};

/// Class-1 pixels inside `region` whose 8-connected class-1 component touches
/// (8-adjacency) the largest class-3 component in the region.
int attached_root_pixels(const LabelMask& mask, const PixelRect& region);

/// Time of the first frame of the first run of >= min_frames consecutive frames
/// with at least min_root_px attached root pixels; none if never.
std::optional<double> detect_germination(std::span<const Frame> frames, const PixelRect& region,
                                         const GerminationParams& params = {});

/// G(t) = g0 + g_max t^n / (t50^n + t^n), in percent.
struct HillParams {
    double g0 = 0.0;
    double g_max = 0.0;
    double n = 1.0;
    double t50 = 1.0;
};

double hill(const HillParams& p, double t);
/// Inflection time of the Hill curve: t50 ((n-1)/(n+1))^(1/n).
double tmgr(double n, double t50);

struct GerminationFit {
    bool fitted = false;
    HillParams params;
    double tmgr = 0.0;
    double rmse = 0.0;
    double final_percent = 0.0;
    std::map<int, std::optional<double>> per_seed_times;
    std::vector<double> sample_times;
    std::vector<double> empirical_percent;
    std::vector<double> fitted_percent;
};

/// Least-squares Hill fit to the cumulative germination percentage observed at
/// each sample time. Multi-start damped Gauss-Newton with bounds
/// g0 in [0, 20], g_max in [0, 100], g0 + g_max <= 100, n in [1, 50],
/// t50 in (0, last sample time]. No events: fitted = false, final 0 %.
GerminationFit fit_hill(std::span<const double> event_times, int total_seeds,
                        std::span<const double> sample_times);

/// Same fit, keeping the per-seed germination times in the result.
GerminationFit fit_germination(const std::map<int, std::optional<double>>& per_seed_times, int total_seeds,
                               std::span<const double> sample_times);

/// Longest skeleton path of the largest class-4 component inside `region`, mm;
/// 0 when no hypocotyl pixels are present.
double hypocotyl_length(const LabelMask& mask, const PixelRect& region, double mm_per_pixel);

struct PlantMeasures {
    double plant_area_mm2 = 0.0;
    std::optional<double> seed_size_mm2;
    double root_length_mm = 0.0;
};

/// Area of classes 1-6 and the longest class-1 skeleton path inside `region`.
/// Seed size is the class-3 area of `first_mask` (the first confirmed frame).
PlantMeasures plant_measures(const LabelMask& mask, const LabelMask& first_mask, const PixelRect& region,
                             double mm_per_pixel);

}  // namespace rootpipe

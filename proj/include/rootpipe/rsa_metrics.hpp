#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rootpipe/common.hpp"
#include "rootpipe/root_graph.hpp"

namespace rootpipe {

/// Units a metric may carry.
enum class Unit { mm, mm_per_h, mm2, count, lrs_per_cm, ratio, degrees, percent, hours, mm_per_mm2 };

std::string to_string(Unit u);
Unit unit_from_string(const std::string& s);

struct Sample {
    double time_hours = 0.0;
    double value = 0.0;
};

/// Per-plant time series of one quantity. Times strictly increase.
struct MetricSeries {
    std::string plant_id;
    std::string metric_name;
    Unit units = Unit::mm;
    std::vector<Sample> samples;

    /// Throws ValidationError when times are not strictly increasing.
    void validate() const;
    [[nodiscard]] std::vector<double> times() const;
    [[nodiscard]] std::vector<double> values() const;
};

/// Lateral angle measurements at one time point.
struct AngleRecord {
    int lateral_track_id = 0;
    double time_hours = 0.0;
    double base_tip_deg = 0.0;
    std::optional<double> emergence_deg;  // missing until the lateral reaches d_mm
    double d_mm = 2.0;
};

struct ArchitectureMetrics {
    double main_root_mm = 0.0;
    double lateral_root_mm = 0.0;
    double total_root_mm = 0.0;
    int lateral_count = 0;
    std::optional<double> lateral_density;  // LRs/cm, missing for a zero-length main root
    double main_over_total = 1.0;
};

ArchitectureMetrics basic_architecture(const RootGraph& graph);
/// Same quantities from already-aggregated lengths and counts.
ArchitectureMetrics architecture_from(double main_mm, double lateral_mm, int lateral_count);

/// Angle to the downward vertical of the base->tip vector, image y pointing
/// down. Throws ValidationError for coincident points.
double base_tip_angle(PointF base, PointF tip);

/// Angle to the downward vertical of the vector from the polyline start to the
/// point at arc length `d_mm`. Missing when the polyline is shorter than d_mm.
std::optional<double> emergence_angle(std::span<const Point> polyline, double d_mm,
                                      double mm_per_pixel);

struct HullMetrics {
    double area_mm2 = 0.0;
    double width_mm = 0.0;
    double height_mm = 0.0;
    std::optional<double> root_density;  // mm / mm^2, missing when area is 0
    std::optional<double> aspect_ratio;  // height / width, missing when width is 0
};

/// Convex hull (monotone chain), counter-clockwise in a y-up sense, no
/// collinear points.
std::vector<PointF> convex_hull(std::vector<PointF> points);
double polygon_area(std::span<const PointF> polygon);

HullMetrics convex_hull_metrics(std::span<const PointF> points_mm, double total_root_mm);
HullMetrics convex_hull_metrics(const RootGraph& graph, double mm_per_pixel);

/// Central differences inside, one-sided at the ends. Needs >= 2 samples.
MetricSeries growth_speed(const MetricSeries& series);

/// Value minus the running median over a centred window (truncated at the
/// edges). The window spans round(window_hours / sampling interval) samples,
/// made odd and at least 3; the series must be at least that long.
MetricSeries detrend(const MetricSeries& series, double window_hours);

struct SpectralLine {
    double period_hours = 0.0;
    double amplitude = 0.0;
};

struct Spectrum {
    double sample_interval_hours = 0.0;
    std::size_t n = 0;
    double dc = 0.0;                  // mean of the resampled signal
    std::vector<SpectralLine> lines;  // bins 1..n/2, longest period first
};

/// One-sided amplitude spectrum after linear resampling onto a uniform grid
/// at the median sampling interval. Needs >= 16 samples.
Spectrum fourier_components(const MetricSeries& series);

/// Zeroes a leading run shorter than `min_hours`; drops the series (returns
/// no samples) when the remaining presence is shorter than `min_hours`.
/// A run of k samples lasts k sampling intervals.
MetricSeries persistence_filter(const MetricSeries& series, double min_hours);

/// Running maximum.
MetricSeries enforce_monotone(const MetricSeries& series);

}  // namespace rootpipe

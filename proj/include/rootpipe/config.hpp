#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rootpipe/mask_io.hpp"
#include "rootpipe/tracking.hpp"

namespace rootpipe {

enum class RunMode { standard, screening, eval, fpca };

std::string to_string(RunMode m);
RunMode mode_from_string(const std::string& s);

struct PlantRoi {
    RoiSpec roi;
    std::string group = "default";
};

struct FusionConfig {
    std::optional<double> alpha;  // default derived from the frame interval
    double threshold = 1.0;
    int min_component_px = 10;
};

struct SkeletonConfig {
    int min_branch_px = 5;
    double snap_radius_mm = 2.0;
    double lateral_match_tolerance_mm = 1.0;
    double overlap_radius_px = 3.0;
};

struct MetricsConfig {
    double emergence_distance_mm = 2.0;
    double persistence_hours = 6.0;
    double detrend_window_hours = 25.0;
    double hull_interval_hours = 24.0;
};

enum class FpcaBasis { monomial, grid };

struct FpcaConfig {
    FpcaBasis basis = FpcaBasis::monomial;
    int degree = 5;
    int grid_size = 100;
    double variance_target = 0.99;
    int max_components = 10;
    std::vector<std::string> metrics;  // empty: mode defaults
    std::filesystem::path series_csv;  // input of the fpca mode
};

struct StatsConfig {
    std::vector<double> report_hours;  // empty: every 24 h plus the end
};

struct TrackingConfig {
    double iou_threshold = 0.3;
    int min_hits = 3;
    int max_age = 20;
    int min_area_px = 5;
    int touching_frames = 4;
    double max_speed_mm_per_frame = 1.0;
};

struct GerminationConfig {
    int min_root_px = 3;
    int min_frames = 4;
    int region_margin_px = 4;   // seed box growth for attachment checks
    int measure_margin_px = 20;  // seed box growth for plant measures
};

struct EvalPair {
    std::string id;
    std::filesystem::path prediction;
    std::filesystem::path truth;
};

struct EvalConfig {
    std::vector<EvalPair> pairs;
    double tolerance_px = 3.0;
};

struct ExperimentConfig {
    RunMode mode = RunMode::standard;
    std::filesystem::path manifest;
    std::filesystem::path output = "rootpipe_out";
    std::vector<PlantRoi> rois;
    std::vector<GroupSpec> groups;
    FusionConfig fusion;
    SkeletonConfig skeleton;
    MetricsConfig metrics;
    FpcaConfig fpca;
    StatsConfig stats;
    TrackingConfig tracking;
    GerminationConfig germination;
    EvalConfig eval;
    bool per_frame_rsml = false;

    /// Throws ValidationError when the sections required by `mode` are
    /// missing or a numeric key is outside its documented range.
    void validate() const;
};

/// Parses a JSON config; relative paths resolve against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

}  // namespace rootpipe

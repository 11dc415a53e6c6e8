#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rootpipe/config.hpp"
#include "rootpipe/eval.hpp"
#include "rootpipe/fda.hpp"
#include "rootpipe/rsa_metrics.hpp"
#include "rootpipe/rsml.hpp"
#include "rootpipe/screening.hpp"
#include "rootpipe/tracking.hpp"

namespace rootpipe {

/// Everything measured for one plant (standard mode) or one seed (screening).
struct PlantResult {
    std::string plant_id;
    std::string group;
    std::vector<MetricSeries> series;  // post-processed values plus *_raw lengths
    std::vector<AngleRecord> angles;
    std::optional<Spectrum> spectrum;  // detrended main-root growth speed
    std::vector<RsmlDocument> rsml;    // last frame, or every frame when requested
    bool failed = false;
};

struct FpcaResult {
    std::string metric;
    Unit units = Unit::mm;
    std::vector<std::string> plant_ids;
    std::vector<std::string> groups;
    std::vector<double> grid_hours;
    FunctionalDecomposition decomposition;
};

struct GroupGermination {
    std::string group_id;
    int total_seeds = 0;
    GerminationFit fit;
};

struct ScreeningResult {
    std::vector<TrackSnapshot> tracks;  // after quality control
    std::vector<GroupGermination> groups;
};

struct EvalRow {
    std::string image_id;
    EvalResult result;
};

struct ExperimentResult {
    RunMode mode = RunMode::standard;
    std::vector<PlantResult> plants;
    std::vector<FpcaResult> fpca;
    std::optional<ScreeningResult> screening;
    std::vector<EvalRow> eval;
    std::vector<std::string> warnings;
    std::vector<double> report_hours;
};

/// Worker count: `requested` when positive, else ROOTPIPE_THREADS, else 1.
int resolve_threads(int requested);

/// Per-plant architecture analysis of one frame sequence. Frames that fail a
/// stage are skipped with a warning; a plant without any usable frame is
/// marked failed.
PlantResult analyze_plant(const FrameSequence& seq, const PlantRoi& roi, const ExperimentConfig& config,
                          std::vector<std::string>& warnings);

/// FPCA of every requested metric across plants with at least two samples.
std::vector<FpcaResult> analyze_fpca(const std::vector<PlantResult>& plants, const FpcaConfig& config,
                                     const std::vector<std::string>& default_metrics,
                                     std::vector<std::string>& warnings);

/// Report times: the configured list, or every 24 h plus the last time.
std::vector<double> report_times(const std::vector<double>& configured, const std::vector<PlantResult>& plants);

ExperimentResult run_standard(const ExperimentConfig& config, int threads = 1);
ExperimentResult run_standard(const FrameSequence& seq, const ExperimentConfig& config, int threads = 1);
ExperimentResult run_screening(const ExperimentConfig& config, int threads = 1);
ExperimentResult run_screening(const FrameSequence& seq, const ExperimentConfig& config, int threads = 1);
/// Throws ValidationError when a pair's sequences differ in frame count or size.
ExperimentResult run_eval(const ExperimentConfig& config, int threads = 1);
/// Reads the long-format series table written by the other modes.
ExperimentResult run_fpca(const ExperimentConfig& config);

ExperimentResult run(const ExperimentConfig& config, int threads = 1);

/// Long-format table: plant_id, group, metric, units, time_hours, value.
std::string series_table(const std::vector<PlantResult>& plants);
std::vector<PlantResult> parse_series_table(const std::string& text);

}  // namespace rootpipe

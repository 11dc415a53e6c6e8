#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rootpipe/config.hpp"
#include "rootpipe/mask_io.hpp"
#include "rootpipe/screening.hpp"

namespace rootpipe {

/// Synthetic plates of growing plants rasterized into label masks.
struct StandardSceneOptions {
    int width = 820;
    int height = 616;
    int frames = 300;
    double interval_hours = 0.25;
    double mm_per_pixel = 0.04;
    int plants = 2;
    std::uint32_t seed = 1;
    /// Per-frame segmentation noise: specks, gaps in the main root and
    /// one-frame spurious laterals. 0 disables it.
    double noise = 1.0;
};

struct ScreeningSceneOptions {
    int width = 820;
    int height = 616;
    int frames = 193;
    double interval_hours = 0.25;
    double mm_per_pixel = 0.04;
    int groups = 2;
    int columns = 5;  // seeds per group row
    int rows = 10;
    std::uint32_t seed = 1;
    /// Germination curve of each group (cycled when there are more groups).
    std::vector<HillParams> curves = {{0.0, 95.0, 8.0, 13.4}, {0.0, 80.0, 6.0, 18.0}};
};

struct GeneratedExperiment {
    FrameSequence sequence;
    ExperimentConfig config;  // manifest and output left for write_experiment
};

GeneratedExperiment generate_standard(const StandardSceneOptions& options);
GeneratedExperiment generate_screening(const ScreeningSceneOptions& options);

/// Writes masks/ (PGM frames plus manifest.json) and config.json under `dir`.
/// The config points at the manifest and at `dir`/out.
void write_experiment(const GeneratedExperiment& experiment, const std::filesystem::path& dir);

}  // namespace rootpipe

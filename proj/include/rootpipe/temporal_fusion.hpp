#pragma once

#include <vector>

#include "rootpipe/common.hpp"
#include "rootpipe/mask_io.hpp"

namespace rootpipe {

/// Trailing weighted accumulation a_t = s_t + alpha * a_{t-1}, kept separately
/// for the main-root and lateral-root channels. An empty state (frame_count 0)
/// adopts the geometry of the first mask it sees.
struct AccumulatorState {
    double alpha = 0.7;
    int width = 0;
    int height = 0;
    std::vector<double> accum_main;
    std::vector<double> accum_lateral;
    int frame_count = 0;

    explicit AccumulatorState(double alpha_ = 0.7);

    [[nodiscard]] double main_at(int x, int y) const {
        return accum_main[static_cast<std::size_t>(y) * width + x];
    }
    [[nodiscard]] double lateral_at(int x, int y) const {
        return accum_lateral[static_cast<std::size_t>(y) * width + x];
    }
};

struct FusionParams {
    double alpha = 0.7;
    double threshold = 1.0;
    int min_component_px = 10;
};

/// Memory weight whose half-life in hours is independent of the sampling
/// interval: 0.7 per 15 minutes.
double default_alpha(double interval_hours);

AccumulatorState accumulate(AccumulatorState state, const LabelMask& mask);

/// Re-asserts classes 1/2 wherever their accumulator reaches `threshold`;
/// the larger accumulator wins when both qualify. Root labels whose
/// accumulator falls short become background. Classes 3-6 are never touched.
LabelMask fuse(const AccumulatorState& state, const LabelMask& mask, double threshold);

/// 3x3 closing, then removal of 8-connected components smaller than
/// `min_component_px`.
BinaryGrid clean_binary(const BinaryGrid& mask, int min_component_px);

}  // namespace rootpipe

#include "rootpipe/temporal_fusion.hpp"

#include <cmath>

#include "rootpipe/morphology.hpp"

namespace rootpipe {

AccumulatorState::AccumulatorState(double alpha_) : alpha(alpha_) {
    if (!(alpha_ >= 0.0 && alpha_ < 1.0)) throw ValidationError("fusion alpha must lie in [0, 1)");
}

double default_alpha(double interval_hours) {
    if (!(interval_hours > 0.0)) throw ValidationError("interval_hours must be positive");
    return std::pow(0.7, interval_hours / 0.25);
}

AccumulatorState accumulate(AccumulatorState state, const LabelMask& mask) {
    if (state.frame_count == 0) {
        state.width = mask.width();
        state.height = mask.height();
        const std::size_t n = static_cast<std::size_t>(state.width) * state.height;
        state.accum_main.assign(n, 0.0);
        state.accum_lateral.assign(n, 0.0);
    } else if (mask.width() != state.width || mask.height() != state.height) {
        throw ValidationError("mask dimensions do not match the accumulator");
    }
    const auto& labels = mask.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double s_main = labels[i] == 1 ? 1.0 : 0.0;
        const double s_lat = labels[i] == 2 ? 1.0 : 0.0;
        state.accum_main[i] = s_main + state.alpha * state.accum_main[i];
        state.accum_lateral[i] = s_lat + state.alpha * state.accum_lateral[i];
    }
    ++state.frame_count;
    return state;
}

LabelMask fuse(const AccumulatorState& state, const LabelMask& mask, double threshold) {
    if (state.frame_count == 0) return mask;
    if (mask.width() != state.width || mask.height() != state.height)
        throw ValidationError("mask dimensions do not match the accumulator");
    std::vector<std::uint8_t> out = mask.labels();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] > 2) continue;
        const double m = state.accum_main[i];
        const double l = state.accum_lateral[i];
        const bool main_ok = m >= threshold;
        const bool lat_ok = l >= threshold;
        if (main_ok && lat_ok)
            out[i] = m >= l ? 1 : 2;
        else if (main_ok)
            out[i] = 1;
        else if (lat_ok)
            out[i] = 2;
        else
            out[i] = 0;
    }
    return LabelMask(mask.width(), mask.height(), std::move(out));
}

BinaryGrid clean_binary(const BinaryGrid& mask, int min_component_px) {
    BinaryGrid closed = close3x3(mask);
    for (const auto& comp : connected_components(closed)) {
        if (static_cast<int>(comp.pixels.size()) >= min_component_px) continue;
        for (const Point& p : comp.pixels) closed.set(p.x, p.y, false);
    }
    return closed;
}

}  // namespace rootpipe

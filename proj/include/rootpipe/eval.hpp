#pragma once

#include <optional>
#include <vector>

#include "rootpipe/common.hpp"
#include "rootpipe/mask_io.hpp"

namespace rootpipe {

/// Squared Euclidean distance from every pixel to the nearest set pixel
/// (exact, separable lower-envelope transform). Infinity when the set is empty.
std::vector<double> squared_distance_transform(const BinaryGrid& set);

/// 2|A n B| / (|A| + |B|); 1 when both are empty.
double dice(const BinaryGrid& pred, const BinaryGrid& truth);

/// Largest distance from a pixel of `from` to the nearest pixel of `to`, px.
/// Infinity when `to` is empty and `from` is not; 0 when `from` is empty.
double directed_hausdorff_px(const BinaryGrid& from, const BinaryGrid& to);

/// Symmetric Hausdorff distance in mm; infinity when either set is empty.
double hausdorff(const BinaryGrid& pred, const BinaryGrid& truth, double mm_per_pixel);

/// Fraction of `of` pixels lying within `tolerance_px` of a `near` pixel;
/// missing when `of` is empty.
std::optional<double> fraction_within(const BinaryGrid& of, const BinaryGrid& near, double tolerance_px);

struct SkeletonMatch {
    std::optional<double> completeness;  // truth covered by pred
    std::optional<double> correctness;   // pred covered by truth
};

SkeletonMatch skeleton_completeness_correctness(const BinaryGrid& pred_skel, const BinaryGrid& truth_skel,
                                                double tolerance_px = 3.0);

struct EvalResult {
    int label = 0;
    double dice = 0.0;
    double hausdorff_mm = 0.0;  // infinity when a set is empty
    std::optional<double> completeness;
    std::optional<double> correctness;
};

/// One row per class 1..6 present in either mask. Completeness and
/// correctness compare skeletons of the class masks.
std::vector<EvalResult> evaluate_masks(const LabelMask& pred, const LabelMask& truth, double mm_per_pixel,
                                       double tolerance_px = 3.0);

}  // namespace rootpipe

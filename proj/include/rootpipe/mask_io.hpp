#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rootpipe/common.hpp"

namespace rootpipe {

/// Segmentation class codes.
enum class PlantClass : std::uint8_t {
    background = 0,
    main_root = 1,
    lateral_root = 2,
    seed = 3,
    hypocotyl = 4,
    leaf = 5,
    petiole = 6,
};

inline constexpr int kNumClasses = 7;

/// One frame of per-pixel class labels. Every label is in [0, 6].
class LabelMask {
public:
    LabelMask() = default;
    /// Throws ValidationError on bad dimensions or labels.
    LabelMask(int width, int height, std::vector<std::uint8_t> labels);
    /// All-background mask.
    LabelMask(int width, int height);

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] std::uint8_t at(int x, int y) const {
        return labels_[static_cast<std::size_t>(y) * width_ + x];
    }
    void set(int x, int y, std::uint8_t label);
    [[nodiscard]] const std::vector<std::uint8_t>& labels() const { return labels_; }

    friend bool operator==(const LabelMask&, const LabelMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> labels_;
};

struct Frame {
    LabelMask mask;
    double time_hours = 0.0;
};

/// Time-ordered frames sharing one geometry and calibration.
struct FrameSequence {
    std::vector<Frame> frames;
    double mm_per_pixel = 0.0;
    /// Median inter-frame gap.
    double interval_hours = 0.0;

    [[nodiscard]] int width() const { return frames.empty() ? 0 : frames.front().mask.width(); }
    [[nodiscard]] int height() const { return frames.empty() ? 0 : frames.front().mask.height(); }
};

struct RoiSpec {
    std::string plant_id;
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    std::optional<Point> seed_hint;  // frame coordinates
};

/// Throws ValidationError unless the ROI lies inside a width x height frame.
void validate_roi(const RoiSpec& roi, int width, int height);

LabelMask read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const LabelMask& mask);

/// Builds a sequence from in-memory frames, applying the same checks as
/// load_sequence. `fallback_interval` is used when there is a single frame.
FrameSequence make_sequence(std::vector<Frame> frames, double mm_per_pixel,
                            double fallback_interval = 0.25);

/// Reads a JSON manifest {"mm_per_pixel": f, "frames": [{"file", "time_hours"}]}.
/// Mask paths are relative to the manifest's directory.
FrameSequence load_sequence(const std::filesystem::path& manifest_path);

/// Writes masks as PGM files next to a manifest describing them.
void save_sequence(const std::filesystem::path& manifest_path, const FrameSequence& seq);

LabelMask crop(const LabelMask& mask, const RoiSpec& roi);

/// Pixels whose label is one of `classes`.
BinaryGrid class_mask(const LabelMask& mask, std::span<const int> classes);
BinaryGrid class_mask(const LabelMask& mask, std::initializer_list<int> classes);

}  // namespace rootpipe

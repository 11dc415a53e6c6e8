#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rootpipe/common.hpp"
#include "rootpipe/mask_io.hpp"

namespace rootpipe {

/// Axis-aligned box, centre + size, in pixel-edge coordinates (pixel (x, y)
/// covers [x, x+1) x [y, y+1)).
struct BBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    [[nodiscard]] double area() const { return w * h; }
};

double intersection_area(const BBox& a, const BBox& b);
double iou(const BBox& a, const BBox& b);

struct Detection {
    BBox bbox;
    PointF centroid;  // mean pixel centre
    int area_px = 0;
    std::uint8_t classes_present = 0;  // bit k set when class k occurs
};

/// One detection per 8-connected component of pixels whose class is in
/// `classes` (all non-background classes by default) with area >= min_area_px.
std::vector<Detection> detect(const LabelMask& mask, int min_area_px,
                              std::span<const int> classes = {});

enum QcFlag : unsigned {
    qc_none = 0,
    qc_touching = 1u << 0,
    qc_abnormal_motion = 1u << 1,
};

std::string qc_flags_to_string(unsigned flags);

/// Constant-velocity box tracker. State (cx, cy, s = area, r = aspect, vx, vy,
/// vs); measurement (cx, cy, s, r).
struct KalmanTrack {
    using State = Eigen::Matrix<double, 7, 1>;
    using Cov = Eigen::Matrix<double, 7, 7>;

    int id = 0;
    State state = State::Zero();
    Cov covariance = Cov::Identity();
    int age = 0;
    int hits = 0;
    int time_since_update = 0;
    unsigned qc_flags = qc_none;

    [[nodiscard]] BBox bbox() const;
};

/// Diagonal noise settings. Defaults follow the usual SORT tuning except the
/// velocity prior, which is tight because seeds on a plate barely move.
struct KalmanParams {
    double measurement_noise_pos = 1.0;     // R for cx, cy
    double measurement_noise_shape = 10.0;  // R for s, r
    double initial_var = 10.0;              // P for cx, cy, s, r
    double initial_velocity_var = 1.0;      // P for vx, vy, vs
    double process_noise_pos = 1.0;         // Q for cx, cy, s, r
    double process_noise_velocity = 0.01;   // Q for vx, vy
    double process_noise_scale_velocity = 1e-4;  // Q for vs
};

KalmanTrack make_track(int id, const BBox& box, const KalmanParams& params = {});
KalmanTrack predict(KalmanTrack track, const KalmanParams& params = {});
KalmanTrack update(KalmanTrack track, const BBox& measurement, const KalmanParams& params = {});

struct Association {
    std::vector<std::pair<int, int>> matches;  // (track index, detection index)
    std::vector<int> unmatched_tracks;
    std::vector<int> unmatched_detections;
};

/// Hungarian assignment minimizing the summed (1 - IoU); pairs whose IoU is
/// below the threshold are split and reported unmatched.
Association associate(std::span<const BBox> tracks, std::span<const BBox> detections,
                      double iou_threshold);

struct GroupSpec {
    std::string group_id;
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    std::optional<int> expected_seed_count;

    [[nodiscard]] bool contains(double px, double py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
};

/// Throws ValidationError on empty ids, duplicate ids, non-positive sizes or
/// overlapping regions.
void validate_groups(std::span<const GroupSpec> groups);

/// Group whose region holds the point, or an empty string.
std::string group_of(std::span<const GroupSpec> groups, double px, double py);

struct TrackerParams {
    double iou_threshold = 0.3;
    int min_hits = 3;
    int max_age = 20;
    KalmanParams kalman;
};

struct TrackSnapshot {
    int frame = 0;
    double time_hours = 0.0;
    int track_id = 0;
    std::string group_id;
    BBox bbox;
    unsigned flags = qc_none;
};

struct TrackerState {
    TrackerParams params;
    std::vector<KalmanTrack> tracks;
    int next_id = 1;
    int frame_count = 0;
};

/// One SORT step: predict, associate, update matched tracks, spawn tracks for
/// unmatched detections, retire tracks unmatched for more than max_age frames.
/// Snapshots are emitted for confirmed tracks (hits >= min_hits) that were
/// matched in this frame; the box reported is the matched detection.
std::vector<TrackSnapshot> step(TrackerState& state, std::span<const Detection> detections,
                                int frame_index, double time_hours,
                                std::span<const GroupSpec> groups = {});

struct QcParams {
    int touching_frames = 4;          // K consecutive overlapping frames
    double max_speed_mm_per_frame = 1.0;
    double mm_per_pixel = 0.04;
};

/// Sets qc flags on every snapshot from the first offending frame onward.
/// Touching: two tracks' boxes overlap in >= K consecutive frames (flagged
/// from the first frame of that contact run). Abnormal motion: the centre
/// moves faster than the limit between consecutive snapshots of a track,
/// per elapsed frame. The result is sorted by (frame, track_id).
std::vector<TrackSnapshot> quality_control(std::vector<TrackSnapshot> history, const QcParams& params);

/// Flags per track id after quality_control.
std::map<int, unsigned> track_flags(std::span<const TrackSnapshot> history);

}  // namespace rootpipe

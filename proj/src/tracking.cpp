#include "rootpipe/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rootpipe/hungarian.hpp"
#include "rootpipe/morphology.hpp"

namespace rootpipe {

namespace {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat47 = Eigen::Matrix<double, 4, 7>;

Vec4 to_measurement(const BBox& b) {
    if (!(b.w > 0.0) || !(b.h > 0.0)) throw ValidationError("box sizes must be positive");
    return Vec4(b.cx, b.cy, b.w * b.h, b.w / b.h);
}

Mat47 observation() {
    Mat47 h = Mat47::Zero();
    for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
    return h;
}

KalmanTrack::Cov process_noise(const KalmanParams& p) {
    KalmanTrack::Cov q = KalmanTrack::Cov::Zero();
    for (int i = 0; i < 4; ++i) q(i, i) = p.process_noise_pos;
    q(4, 4) = q(5, 5) = p.process_noise_velocity;
    q(6, 6) = p.process_noise_scale_velocity;
    return q;
}

}  // namespace

double intersection_area(const BBox& a, const BBox& b) {
    const double ix = std::min(a.cx + a.w / 2, b.cx + b.w / 2) - std::max(a.cx - a.w / 2, b.cx - b.w / 2);
    const double iy = std::min(a.cy + a.h / 2, b.cy + b.h / 2) - std::max(a.cy - a.h / 2, b.cy - b.h / 2);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    return ix * iy;
}

double iou(const BBox& a, const BBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Detection> detect(const LabelMask& mask, int min_area_px, std::span<const int> classes) {
    bool wanted[kNumClasses] = {};
    if (classes.empty()) {
        for (int c = 1; c < kNumClasses; ++c) wanted[c] = true;
    } else {
        for (int c : classes)
            if (c > 0 && c < kNumClasses) wanted[c] = true;
    }
    BinaryGrid fg(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (wanted[mask.at(x, y)]) fg.set(x, y, true);

    std::vector<Detection> out;
    for (const auto& comp : connected_components(fg)) {
        const int area = static_cast<int>(comp.pixels.size());
        if (area < min_area_px) continue;
        Detection d;
        d.area_px = area;
        d.bbox.w = comp.max_x - comp.min_x + 1;
        d.bbox.h = comp.max_y - comp.min_y + 1;
        d.bbox.cx = comp.min_x + d.bbox.w / 2.0;
        d.bbox.cy = comp.min_y + d.bbox.h / 2.0;
        double sx = 0.0, sy = 0.0;
        for (const auto& p : comp.pixels) {
            sx += p.x + 0.5;
            sy += p.y + 0.5;
            d.classes_present |= static_cast<std::uint8_t>(1u << mask.at(p.x, p.y));
        }
        d.centroid = {sx / area, sy / area};
        out.push_back(d);
    }
    return out;
}

std::string qc_flags_to_string(unsigned flags) {
    std::string s;
    if (flags & qc_touching) s += "touching";
    if (flags & qc_abnormal_motion) {
        if (!s.empty()) s += '|';
        s += "abnormal_motion";
    }
    return s;
}

BBox KalmanTrack::bbox() const {
    const double s = std::max(state(2), 0.0);
    const double r = state(3);
    BBox b;
    b.cx = state(0);
    b.cy = state(1);
    b.w = r > 0.0 ? std::sqrt(s * r) : 0.0;
    b.h = b.w > 0.0 ? s / b.w : 0.0;
    return b;
}

KalmanTrack make_track(int id, const BBox& box, const KalmanParams& params) {
    KalmanTrack t;
    t.id = id;
    t.state.head<4>() = to_measurement(box);
    t.covariance = KalmanTrack::Cov::Zero();
    for (int i = 0; i < 4; ++i) t.covariance(i, i) = params.initial_var;
    for (int i = 4; i < 7; ++i) t.covariance(i, i) = params.initial_velocity_var;
    t.hits = 1;
    t.age = 1;
    return t;
}

KalmanTrack predict(KalmanTrack track, const KalmanParams& params) {
    // Keep the predicted area positive.
    if (track.state(2) + track.state(6) <= 0.0) track.state(6) = 0.0;
    KalmanTrack::Cov f = KalmanTrack::Cov::Identity();
    f(0, 4) = f(1, 5) = f(2, 6) = 1.0;
    track.state = f * track.state;
    track.covariance = f * track.covariance * f.transpose() + process_noise(params);
    ++track.age;
    ++track.time_since_update;
    return track;
}

KalmanTrack update(KalmanTrack track, const BBox& measurement, const KalmanParams& params) {
    const Vec4 z = to_measurement(measurement);
    const Mat47 h = observation();
    Mat4 r = Mat4::Zero();
    r(0, 0) = r(1, 1) = params.measurement_noise_pos;
    r(2, 2) = r(3, 3) = params.measurement_noise_shape;
    const Mat4 s = h * track.covariance * h.transpose() + r;
    const Eigen::Matrix<double, 7, 4> k = track.covariance * h.transpose() * s.inverse();
    track.state += k * (z - h * track.state);
    const KalmanTrack::Cov ikh = KalmanTrack::Cov::Identity() - k * h;
    // Joseph form keeps the covariance symmetric positive semidefinite.
    track.covariance = ikh * track.covariance * ikh.transpose() + k * r * k.transpose();
    track.covariance = 0.5 * (track.covariance + track.covariance.transpose());
    track.time_since_update = 0;
    ++track.hits;
    return track;
}

Association associate(std::span<const BBox> tracks, std::span<const BBox> detections, double iou_threshold) {
    Association out;
    const auto nt = static_cast<Eigen::Index>(tracks.size());
    const auto nd = static_cast<Eigen::Index>(detections.size());
    std::vector<char> det_used(detections.size(), 0), trk_used(tracks.size(), 0);
    if (nt > 0 && nd > 0) {
        Eigen::MatrixXd ious(nt, nd);
        for (Eigen::Index i = 0; i < nt; ++i)
            for (Eigen::Index j = 0; j < nd; ++j) ious(i, j) = iou(tracks[i], detections[j]);
        const Eigen::MatrixXd cost = Eigen::MatrixXd::Ones(nt, nd) - ious;
        const auto assignment = hungarian(cost);
        for (Eigen::Index i = 0; i < nt; ++i) {
            const int j = assignment[i];
            if (j < 0 || ious(i, j) < iou_threshold) continue;
            out.matches.emplace_back(static_cast<int>(i), j);
            trk_used[i] = 1;
            det_used[j] = 1;
        }
    }
    for (std::size_t i = 0; i < tracks.size(); ++i)
        if (!trk_used[i]) out.unmatched_tracks.push_back(static_cast<int>(i));
    for (std::size_t j = 0; j < detections.size(); ++j)
        if (!det_used[j]) out.unmatched_detections.push_back(static_cast<int>(j));
    return out;
}

void validate_groups(std::span<const GroupSpec> groups) {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& g = groups[i];
        if (g.group_id.empty()) throw ValidationError("group id must not be empty");
        if (!ids.insert(g.group_id).second) throw ValidationError("duplicate group id '" + g.group_id + "'");
        if (g.w <= 0 || g.h <= 0) throw ValidationError("group '" + g.group_id + "' has an empty region");
        if (g.expected_seed_count && *g.expected_seed_count < 0)
            throw ValidationError("group '" + g.group_id + "' has a negative seed count");
        for (std::size_t j = 0; j < i; ++j) {
            const auto& o = groups[j];
            const bool apart = g.x + g.w <= o.x || o.x + o.w <= g.x || g.y + g.h <= o.y || o.y + o.h <= g.y;
            if (!apart) throw ValidationError("groups '" + o.group_id + "' and '" + g.group_id + "' overlap");
        }
    }
}

std::string group_of(std::span<const GroupSpec> groups, double px, double py) {
    for (const auto& g : groups)
        if (g.contains(px, py)) return g.group_id;
    return {};
}

std::vector<TrackSnapshot> step(TrackerState& state, std::span<const Detection> detections, int frame_index,
                                double time_hours, std::span<const GroupSpec> groups) {
    const auto& p = state.params;
    ++state.frame_count;

    std::vector<BBox> predicted;
    predicted.reserve(state.tracks.size());
    for (auto& t : state.tracks) {
        t = predict(std::move(t), p.kalman);
        predicted.push_back(t.bbox());
    }
    std::vector<BBox> boxes;
    boxes.reserve(detections.size());
    for (const auto& d : detections) boxes.push_back(d.bbox);

    const auto assoc = associate(predicted, boxes, p.iou_threshold);
    std::vector<int> matched_det(state.tracks.size(), -1);
    for (const auto& [ti, di] : assoc.matches) {
        state.tracks[ti] = update(std::move(state.tracks[ti]), boxes[di], p.kalman);
        matched_det[ti] = di;
    }

    std::vector<TrackSnapshot> out;
    for (std::size_t i = 0; i < state.tracks.size(); ++i) {
        const auto& t = state.tracks[i];
        if (matched_det[i] < 0 || t.hits < p.min_hits) continue;
        const BBox& b = boxes[matched_det[i]];
        out.push_back({frame_index, time_hours, t.id, group_of(groups, b.cx, b.cy), b, t.qc_flags});
    }

    for (int di : assoc.unmatched_detections) state.tracks.push_back(make_track(state.next_id++, boxes[di], p.kalman));

    std::erase_if(state.tracks, [&](const KalmanTrack& t) { return t.time_since_update > p.max_age; });

    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
    return out;
}

std::vector<TrackSnapshot> quality_control(std::vector<TrackSnapshot> history, const QcParams& params) {
    std::sort(history.begin(), history.end(), [](const auto& a, const auto& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.track_id < b.track_id;
    });
    std::map<int, int> flag_from_touching;  // track id -> first frame
    std::map<int, int> flag_from_motion;

    // Abnormal motion between consecutive snapshots of one track.
    std::map<int, const TrackSnapshot*> last;
    const double limit_px = params.max_speed_mm_per_frame / params.mm_per_pixel;
    for (const auto& s : history) {
        auto it = last.find(s.track_id);
        if (it != last.end()) {
            const auto* prev = it->second;
            const int gap = std::max(1, s.frame - prev->frame);
            const double d = std::hypot(s.bbox.cx - prev->bbox.cx, s.bbox.cy - prev->bbox.cy);
            if (d > limit_px * gap + 1e-9 && !flag_from_motion.count(s.track_id)) flag_from_motion[s.track_id] = s.frame;
        }
        last[s.track_id] = &s;
    }

    // Touching: per pair, runs of consecutive frames with overlapping boxes.
    struct Run {
        int start = 0;
        int last = 0;
        int length = 0;
    };
    std::map<std::pair<int, int>, Run> runs;
    auto flag_pair = [&](std::pair<int, int> ids, int from) {
        for (int id : {ids.first, ids.second}) {
            auto [it, inserted] = flag_from_touching.emplace(id, from);
            if (!inserted) it->second = std::min(it->second, from);
        }
    };
    std::size_t i = 0;
    while (i < history.size()) {
        std::size_t j = i;
        while (j < history.size() && history[j].frame == history[i].frame) ++j;
        const int frame = history[i].frame;
        for (std::size_t a = i; a < j; ++a) {
            for (std::size_t b = a + 1; b < j; ++b) {
                if (intersection_area(history[a].bbox, history[b].bbox) <= 0.0) continue;
                const std::pair<int, int> key{history[a].track_id, history[b].track_id};
                auto& run = runs[key];
                if (run.length > 0 && run.last == frame - 1) {
                    ++run.length;
                } else {
                    run.start = frame;
                    run.length = 1;
                }
                run.last = frame;
                if (run.length >= params.touching_frames) flag_pair(key, run.start);
            }
        }
        i = j;
    }

    for (auto& s : history) {
        auto t = flag_from_touching.find(s.track_id);
        if (t != flag_from_touching.end() && s.frame >= t->second) s.flags |= qc_touching;
        auto m = flag_from_motion.find(s.track_id);
        if (m != flag_from_motion.end() && s.frame >= m->second) s.flags |= qc_abnormal_motion;
    }
    return history;
}

std::map<int, unsigned> track_flags(std::span<const TrackSnapshot> history) {
    std::map<int, unsigned> out;
    for (const auto& s : history) out[s.track_id] |= s.flags;
    return out;
}

}  // namespace rootpipe

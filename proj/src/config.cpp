#include "rootpipe/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rootpipe {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError("'" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("key '" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

void check(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

}  // namespace

std::string to_string(RunMode m) {
    switch (m) {
        case RunMode::standard: return "standard";
        case RunMode::screening: return "screening";
        case RunMode::eval: return "eval";
        case RunMode::fpca: return "fpca";
    }
    return "standard";
}

RunMode mode_from_string(const std::string& s) {
    if (s == "standard") return RunMode::standard;
    if (s == "screening") return RunMode::screening;
    if (s == "eval") return RunMode::eval;
    if (s == "fpca") return RunMode::fpca;
    throw ValidationError("unknown mode '" + s + "' (expected standard, screening, eval or fpca)");
}

void ExperimentConfig::validate() const {
    check(!output.empty(), "output directory must be set");
    switch (mode) {
        case RunMode::standard: {
            check(!manifest.empty(), "standard mode needs a manifest");
            check(!rois.empty(), "standard mode needs at least one ROI");
            std::set<std::string> ids;
            for (const auto& r : rois) {
                check(!r.roi.plant_id.empty(), "ROI plant_id must not be empty");
                check(ids.insert(r.roi.plant_id).second, "duplicate ROI plant_id '" + r.roi.plant_id + "'");
                check(r.roi.w > 0 && r.roi.h > 0, "ROI '" + r.roi.plant_id + "' has an empty rectangle");
                check(r.roi.x >= 0 && r.roi.y >= 0, "ROI '" + r.roi.plant_id + "' starts outside the frame");
                check(!r.group.empty(), "ROI '" + r.roi.plant_id + "' has an empty group");
            }
            break;
        }
        case RunMode::screening:
            check(!manifest.empty(), "screening mode needs a manifest");
            check(!groups.empty(), "screening mode needs at least one group");
            validate_groups(groups);
            break;
        case RunMode::eval:
            check(!eval.pairs.empty(), "eval mode needs at least one prediction/truth pair");
            break;
        case RunMode::fpca:
            check(!fpca.series_csv.empty(), "fpca mode needs fpca.series_csv");
            break;
    }
    if (fusion.alpha) check(*fusion.alpha >= 0.0 && *fusion.alpha < 1.0, "fusion.alpha must lie in [0, 1)");
    check(fusion.threshold > 0.0, "fusion.threshold must be positive");
    check(fusion.min_component_px >= 0, "fusion.min_component_px must be non-negative");
    check(skeleton.min_branch_px >= 0, "skeleton.min_branch_px must be non-negative");
    check(skeleton.snap_radius_mm > 0.0, "skeleton.snap_radius_mm must be positive");
    check(skeleton.lateral_match_tolerance_mm > 0.0, "skeleton.lateral_match_tolerance_mm must be positive");
    check(skeleton.overlap_radius_px >= 0.0, "skeleton.overlap_radius_px must be non-negative");
    check(metrics.emergence_distance_mm > 0.0, "metrics.emergence_distance_mm must be positive");
    check(metrics.persistence_hours >= 0.0, "metrics.persistence_hours must be non-negative");
    check(metrics.detrend_window_hours > 0.0, "metrics.detrend_window_hours must be positive");
    check(metrics.hull_interval_hours > 0.0, "metrics.hull_interval_hours must be positive");
    check(fpca.degree >= 0 && fpca.degree <= 15, "fpca.degree must lie in [0, 15]");
    check(fpca.grid_size >= 2, "fpca.grid_size must be at least 2");
    check(fpca.variance_target > 0.0 && fpca.variance_target <= 1.0, "fpca.variance_target must lie in (0, 1]");
    check(fpca.max_components >= 1, "fpca.max_components must be at least 1");
    for (double h : stats.report_hours) check(h >= 0.0, "stats.report_hours must be non-negative");
    check(tracking.iou_threshold >= 0.0 && tracking.iou_threshold <= 1.0, "tracking.iou_threshold must lie in [0, 1]");
    check(tracking.min_hits >= 1, "tracking.min_hits must be at least 1");
    check(tracking.max_age >= 0, "tracking.max_age must be non-negative");
    check(tracking.min_area_px >= 1, "tracking.min_area_px must be at least 1");
    check(tracking.touching_frames >= 1, "tracking.touching_frames must be at least 1");
    check(tracking.max_speed_mm_per_frame > 0.0, "tracking.max_speed_mm_per_frame must be positive");
    check(germination.min_root_px >= 1, "germination.min_root_px must be at least 1");
    check(germination.min_frames >= 1, "germination.min_frames must be at least 1");
    check(germination.region_margin_px >= 0, "germination.region_margin_px must be non-negative");
    check(germination.measure_margin_px >= 0, "germination.measure_margin_px must be non-negative");
    check(eval.tolerance_px >= 0.0, "eval.tolerance_px must be non-negative");
}

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(doc, "config",
                   {"mode", "manifest", "output", "rois", "groups", "fusion", "skeleton", "metrics", "fpca", "stats",
                    "tracking", "germination", "eval", "rsml"});
    ExperimentConfig c;
    std::string mode = "standard";
    read(doc, "mode", mode, "config");
    c.mode = mode_from_string(mode);
    std::string manifest, output;
    read(doc, "manifest", manifest, "config");
    if (!manifest.empty()) c.manifest = resolve(base_dir, manifest);
    read(doc, "output", output, "config");
    if (!output.empty()) c.output = resolve(base_dir, output);

    if (doc.contains("rois")) {
        if (!doc["rois"].is_array()) throw ValidationError("'rois' must be an array");
        for (const auto& r : doc["rois"]) {
            reject_unknown(r, "roi", {"plant_id", "x", "y", "w", "h", "seed", "group"});
            PlantRoi p;
            read(r, "plant_id", p.roi.plant_id, "roi");
            read(r, "x", p.roi.x, "roi");
            read(r, "y", p.roi.y, "roi");
            read(r, "w", p.roi.w, "roi");
            read(r, "h", p.roi.h, "roi");
            read(r, "group", p.group, "roi");
            if (r.contains("seed")) {
                std::vector<int> s;
                read(r, "seed", s, "roi");
                if (s.size() != 2) throw ValidationError("roi seed must be [x, y]");
                p.roi.seed_hint = Point{s[0], s[1]};
            }
            c.rois.push_back(std::move(p));
        }
    }
    if (doc.contains("groups")) {
        if (!doc["groups"].is_array()) throw ValidationError("'groups' must be an array");
        for (const auto& g : doc["groups"]) {
            reject_unknown(g, "group", {"group_id", "x", "y", "w", "h", "expected_seed_count"});
            GroupSpec s;
            read(g, "group_id", s.group_id, "group");
            read(g, "x", s.x, "group");
            read(g, "y", s.y, "group");
            read(g, "w", s.w, "group");
            read(g, "h", s.h, "group");
            if (g.contains("expected_seed_count")) {
                int n = 0;
                read(g, "expected_seed_count", n, "group");
                s.expected_seed_count = n;
            }
            c.groups.push_back(std::move(s));
        }
    }
    if (doc.contains("fusion")) {
        const auto& f = doc["fusion"];
        reject_unknown(f, "fusion", {"alpha", "threshold", "min_component_px"});
        if (f.contains("alpha")) {
            double a = 0.0;
            read(f, "alpha", a, "fusion");
            c.fusion.alpha = a;
        }
        read(f, "threshold", c.fusion.threshold, "fusion");
        read(f, "min_component_px", c.fusion.min_component_px, "fusion");
    }
    if (doc.contains("skeleton")) {
        const auto& s = doc["skeleton"];
        reject_unknown(s, "skeleton", {"min_branch_px", "snap_radius_mm", "lateral_match_tolerance_mm", "overlap_radius_px"});
        read(s, "min_branch_px", c.skeleton.min_branch_px, "skeleton");
        read(s, "snap_radius_mm", c.skeleton.snap_radius_mm, "skeleton");
        read(s, "lateral_match_tolerance_mm", c.skeleton.lateral_match_tolerance_mm, "skeleton");
        read(s, "overlap_radius_px", c.skeleton.overlap_radius_px, "skeleton");
    }
    if (doc.contains("metrics")) {
        const auto& m = doc["metrics"];
        reject_unknown(m, "metrics",
                       {"emergence_distance_mm", "persistence_hours", "detrend_window_hours", "hull_interval_hours"});
        read(m, "emergence_distance_mm", c.metrics.emergence_distance_mm, "metrics");
        read(m, "persistence_hours", c.metrics.persistence_hours, "metrics");
        read(m, "detrend_window_hours", c.metrics.detrend_window_hours, "metrics");
        read(m, "hull_interval_hours", c.metrics.hull_interval_hours, "metrics");
    }
    if (doc.contains("fpca")) {
        const auto& f = doc["fpca"];
        reject_unknown(f, "fpca",
                       {"basis", "degree", "grid_size", "variance_target", "max_components", "metrics", "series_csv"});
        std::string basis = "monomial";
        read(f, "basis", basis, "fpca");
        if (basis == "monomial") c.fpca.basis = FpcaBasis::monomial;
        else if (basis == "grid") c.fpca.basis = FpcaBasis::grid;
        else throw ValidationError("fpca.basis must be 'monomial' or 'grid'");
        read(f, "degree", c.fpca.degree, "fpca");
        read(f, "grid_size", c.fpca.grid_size, "fpca");
        read(f, "variance_target", c.fpca.variance_target, "fpca");
        read(f, "max_components", c.fpca.max_components, "fpca");
        read(f, "metrics", c.fpca.metrics, "fpca");
        std::string csv;
        read(f, "series_csv", csv, "fpca");
        if (!csv.empty()) c.fpca.series_csv = resolve(base_dir, csv);
    }
    if (doc.contains("stats")) {
        const auto& s = doc["stats"];
        reject_unknown(s, "stats", {"report_hours"});
        read(s, "report_hours", c.stats.report_hours, "stats");
    }
    if (doc.contains("tracking")) {
        const auto& t = doc["tracking"];
        reject_unknown(t, "tracking",
                       {"iou_threshold", "min_hits", "max_age", "min_area_px", "touching_frames", "max_speed_mm_per_frame"});
        read(t, "iou_threshold", c.tracking.iou_threshold, "tracking");
        read(t, "min_hits", c.tracking.min_hits, "tracking");
        read(t, "max_age", c.tracking.max_age, "tracking");
        read(t, "min_area_px", c.tracking.min_area_px, "tracking");
        read(t, "touching_frames", c.tracking.touching_frames, "tracking");
        read(t, "max_speed_mm_per_frame", c.tracking.max_speed_mm_per_frame, "tracking");
    }
    if (doc.contains("germination")) {
        const auto& g = doc["germination"];
        reject_unknown(g, "germination", {"min_root_px", "min_frames", "region_margin_px", "measure_margin_px"});
        read(g, "min_root_px", c.germination.min_root_px, "germination");
        read(g, "min_frames", c.germination.min_frames, "germination");
        read(g, "region_margin_px", c.germination.region_margin_px, "germination");
        read(g, "measure_margin_px", c.germination.measure_margin_px, "germination");
    }
    if (doc.contains("eval")) {
        const auto& e = doc["eval"];
        reject_unknown(e, "eval", {"pairs", "tolerance_px"});
        read(e, "tolerance_px", c.eval.tolerance_px, "eval");
        if (e.contains("pairs")) {
            if (!e["pairs"].is_array()) throw ValidationError("'eval.pairs' must be an array");
            for (const auto& p : e["pairs"]) {
                reject_unknown(p, "eval pair", {"id", "prediction", "truth"});
                EvalPair pair;
                std::string pred, truth;
                read(p, "id", pair.id, "eval pair");
                read(p, "prediction", pred, "eval pair");
                read(p, "truth", truth, "eval pair");
                if (pred.empty() || truth.empty()) throw ValidationError("eval pair needs prediction and truth");
                pair.prediction = resolve(base_dir, pred);
                pair.truth = resolve(base_dir, truth);
                if (pair.id.empty()) pair.id = "pair" + std::to_string(c.eval.pairs.size() + 1);
                c.eval.pairs.push_back(std::move(pair));
            }
        }
    }
    if (doc.contains("rsml")) {
        const auto& r = doc["rsml"];
        reject_unknown(r, "rsml", {"per_frame"});
        read(r, "per_frame", c.per_frame_rsml, "rsml");
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

}  // namespace rootpipe

#include "rootpipe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "rootpipe/report.hpp"
#include "rootpipe/root_graph.hpp"
#include "rootpipe/skeleton.hpp"
#include "rootpipe/stats.hpp"
#include "rootpipe/temporal_fusion.hpp"

namespace rootpipe {

namespace {

// Runs job(i) for i in [0, n) on up to `threads` workers. Each index is
// processed exactly once; the caller stores results by index.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) job(i);
        });
    for (auto& t : pool) t.join();
}

std::string hours_label(double t) { return format_number(t) + " h"; }

MetricSeries named(MetricSeries s, const std::string& plant, const std::string& name, Unit units) {
    s.plant_id = plant;
    s.metric_name = name;
    s.units = units;
    return s;
}

struct FrameRecord {
    double time_hours = 0.0;
    double main_mm = 0.0;
    std::map<int, double> lateral_mm;
    HullMetrics hull;
};

const std::vector<std::string> kStandardFpcaMetrics = {"main_root_length", "lateral_root_length",
                                                       "total_root_length", "lateral_root_count"};
const std::vector<std::string> kScreeningFpcaMetrics = {"hypocotyl_length"};

}  // namespace

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ROOTPIPE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 256L));
    }
    return 1;
}

PlantResult analyze_plant(const FrameSequence& seq, const PlantRoi& plant, const ExperimentConfig& config,
                          std::vector<std::string>& warnings) {
    PlantResult out;
    out.plant_id = plant.roi.plant_id;
    out.group = plant.group;
    auto warn = [&](const std::string& msg) { warnings.push_back("plant " + out.plant_id + ": " + msg); };

    try {
        validate_roi(plant.roi, seq.width(), seq.height());
    } catch (const Error& e) {
        warn(std::string("skipped: ") + e.what());
        out.failed = true;
        return out;
    }
    const double mm = seq.mm_per_pixel;
    const double alpha = config.fusion.alpha ? *config.fusion.alpha : default_alpha(seq.interval_hours);
    std::optional<Point> seed;
    if (plant.roi.seed_hint) seed = Point{plant.roi.seed_hint->x - plant.roi.x, plant.roi.seed_hint->y - plant.roi.y};

    AccumulatorState acc(alpha);
    std::optional<std::vector<Point>> previous_main;
    LateralIdentityMap ids;
    ids.tolerance_mm = config.skeleton.lateral_match_tolerance_mm;
    std::vector<FrameRecord> records;
    std::vector<AngleRecord> angles;
    std::optional<RsmlDocument> last_doc;

    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const auto& frame = seq.frames[i];
        try {
            const LabelMask local = crop(frame.mask, plant.roi);
            acc = accumulate(std::move(acc), local);
            const LabelMask fused = fuse(acc, local, config.fusion.threshold);
            const BinaryGrid roots = clean_binary(class_mask(fused, {1, 2}), config.fusion.min_component_px);
            const SkeletonGrid skel = prune_spurs(thin(roots), config.skeleton.min_branch_px);
            FrameRecord rec;
            rec.time_hours = frame.time_hours;
            if (skel.empty()) {
                records.push_back(std::move(rec));
                continue;
            }
            RootGraph graph = build_graph(skel, seed, mm, GraphParams{config.skeleton.snap_radius_mm});
            std::optional<std::span<const Point>> prev;
            if (previous_main) prev = std::span<const Point>(*previous_main);
            graph = classify_main(std::move(graph), prev, MainPathParams{config.skeleton.overlap_radius_px});
            previous_main = graph.main_polyline();

            const auto lats = lateral_roots(graph);
            ids = match_laterals(lats, mm, std::move(ids));
            rec.main_mm = basic_architecture(graph).main_root_mm;
            for (std::size_t k = 0; k < lats.size(); ++k) {
                const int id = ids.assignments[k];
                rec.lateral_mm[id] += lats[k].length_mm;
                if (lats[k].base == lats[k].tip) continue;
                AngleRecord a;
                a.lateral_track_id = id;
                a.time_hours = frame.time_hours;
                a.base_tip_deg = base_tip_angle(PointF{double(lats[k].base.x), double(lats[k].base.y)},
                                                PointF{double(lats[k].tip.x), double(lats[k].tip.y)});
                a.d_mm = config.metrics.emergence_distance_mm;
                a.emergence_deg = emergence_angle(lats[k].polyline, a.d_mm, mm);
                angles.push_back(a);
            }
            rec.hull = convex_hull_metrics(graph, mm);
            records.push_back(std::move(rec));

            RsmlDocument doc;
            doc.metadata.resolution_mm_per_px = mm;
            doc.metadata.time_hours = frame.time_hours;
            doc.plants.push_back(rsml_plant_from_graph(graph, out.plant_id, ids.assignments));
            if (config.per_frame_rsml) out.rsml.push_back(doc);
            last_doc = std::move(doc);
        } catch (const Error& e) {
            warn("frame " + std::to_string(i) + " (" + hours_label(frame.time_hours) + ") skipped: " + e.what());
        }
    }
    if (records.empty()) {
        warn("no usable frame");
        out.failed = true;
        return out;
    }
    if (!config.per_frame_rsml && last_doc) out.rsml.push_back(*last_doc);

    const std::string& pid = out.plant_id;
    MetricSeries main_raw{pid, "main_root_length_raw", Unit::mm, {}};
    for (const auto& r : records) main_raw.samples.push_back({r.time_hours, r.main_mm});
    const MetricSeries main = named(enforce_monotone(main_raw), pid, "main_root_length", Unit::mm);

    // Laterals: drop false starts and short-lived detections, then forbid shrinking.
    std::set<int> all_ids;
    for (const auto& r : records)
        for (const auto& [id, len] : r.lateral_mm) all_ids.insert(id);
    std::vector<double> lr_raw(records.size(), 0.0), lr(records.size(), 0.0);
    std::vector<int> count(records.size(), 0);
    std::set<int> kept;
    for (int id : all_ids) {
        MetricSeries s{pid, "lateral", Unit::mm, {}};
        for (std::size_t k = 0; k < records.size(); ++k) {
            const auto it = records[k].lateral_mm.find(id);
            const double v = it == records[k].lateral_mm.end() ? 0.0 : it->second;
            lr_raw[k] += v;
            s.samples.push_back({records[k].time_hours, v});
        }
        const MetricSeries filtered = persistence_filter(s, config.metrics.persistence_hours);
        if (filtered.samples.empty()) continue;
        kept.insert(id);
        const MetricSeries mono = enforce_monotone(filtered);
        for (std::size_t k = 0; k < records.size(); ++k) {
            lr[k] += mono.samples[k].value;
            if (mono.samples[k].value > 0.0) ++count[k];
        }
    }

    MetricSeries lateral{pid, "lateral_root_length", Unit::mm, {}};
    MetricSeries total{pid, "total_root_length", Unit::mm, {}};
    MetricSeries total_raw{pid, "total_root_length_raw", Unit::mm, {}};
    MetricSeries lateral_count{pid, "lateral_root_count", Unit::count, {}};
    MetricSeries density{pid, "lateral_density", Unit::lrs_per_cm, {}};
    MetricSeries ratio{pid, "main_over_total", Unit::ratio, {}};
    for (std::size_t k = 0; k < records.size(); ++k) {
        const double t = records[k].time_hours;
        const auto arch = architecture_from(main.samples[k].value, lr[k], count[k]);
        lateral.samples.push_back({t, arch.lateral_root_mm});
        total.samples.push_back({t, arch.total_root_mm});
        total_raw.samples.push_back({t, records[k].main_mm + lr_raw[k]});
        lateral_count.samples.push_back({t, double(arch.lateral_count)});
        if (arch.lateral_density) density.samples.push_back({t, *arch.lateral_density});
        ratio.samples.push_back({t, arch.main_over_total});
    }
    out.series = {main, lateral, total, lateral_count, density, ratio, main_raw, total_raw};

    if (records.size() < 2) {
        warn("single frame: growth speed and spectrum skipped");
    } else {
        const MetricSeries speed = named(growth_speed(main), pid, "main_root_speed", Unit::mm_per_h);
        out.series.push_back(speed);
        out.series.push_back(named(growth_speed(total), pid, "total_root_speed", Unit::mm_per_h));
        try {
            const MetricSeries detrended = named(detrend(speed, config.metrics.detrend_window_hours), pid,
                                                 "main_root_speed_detrended", Unit::mm_per_h);
            out.series.push_back(detrended);
            out.spectrum = fourier_components(detrended);
        } catch (const ValidationError& e) {
            warn(std::string("detrending or spectrum skipped: ") + e.what());
        }
    }

    // Spatial distribution on the last frame of each hull interval.
    MetricSeries hull_area{pid, "convex_hull_area", Unit::mm2, {}};
    MetricSeries hull_width{pid, "convex_hull_width", Unit::mm, {}};
    MetricSeries hull_height{pid, "convex_hull_height", Unit::mm, {}};
    MetricSeries root_density{pid, "root_density", Unit::mm_per_mm2, {}};
    MetricSeries aspect{pid, "aspect_ratio", Unit::ratio, {}};
    const double t0 = records.front().time_hours;
    auto bin_of = [&](double t) { return std::floor((t - t0) / config.metrics.hull_interval_hours); };
    for (std::size_t k = 0; k < records.size(); ++k) {
        if (k + 1 < records.size() && bin_of(records[k + 1].time_hours) == bin_of(records[k].time_hours)) continue;
        const auto& r = records[k];
        hull_area.samples.push_back({r.time_hours, r.hull.area_mm2});
        hull_width.samples.push_back({r.time_hours, r.hull.width_mm});
        hull_height.samples.push_back({r.time_hours, r.hull.height_mm});
        if (r.hull.root_density) root_density.samples.push_back({r.time_hours, *r.hull.root_density});
        if (r.hull.aspect_ratio) aspect.samples.push_back({r.time_hours, *r.hull.aspect_ratio});
    }
    for (auto* s : {&hull_area, &hull_width, &hull_height, &root_density, &aspect}) out.series.push_back(*s);

    for (const auto& a : angles)
        if (kept.count(a.lateral_track_id)) out.angles.push_back(a);
    std::stable_sort(out.angles.begin(), out.angles.end(), [](const AngleRecord& a, const AngleRecord& b) {
        return a.lateral_track_id != b.lateral_track_id ? a.lateral_track_id < b.lateral_track_id
                                                        : a.time_hours < b.time_hours;
    });
    return out;
}

std::vector<FpcaResult> analyze_fpca(const std::vector<PlantResult>& plants, const FpcaConfig& config,
                                     const std::vector<std::string>& default_metrics,
                                     std::vector<std::string>& warnings) {
    std::vector<std::string> metrics = config.metrics.empty() ? default_metrics : config.metrics;
    std::vector<FpcaResult> out;
    for (const auto& metric : metrics) {
        FpcaResult r;
        r.metric = metric;
        std::vector<MetricSeries> series;
        for (const auto& p : plants) {
            if (p.failed) continue;
            for (const auto& s : p.series) {
                if (s.metric_name != metric || s.samples.size() < 2) continue;
                series.push_back(s);
                r.plant_ids.push_back(p.plant_id);
                r.groups.push_back(p.group);
                r.units = s.units;
            }
        }
        if (series.size() < 2) {
            warnings.push_back("fpca " + metric + ": skipped, fewer than two usable curves");
            continue;
        }
        try {
            const SmoothedCollection sc = smooth(series, config.degree, config.grid_size);
            r.grid_hours = sc.grid_hours;
            const FpcaOptions opts{config.variance_target, config.max_components};
            if (config.basis == FpcaBasis::grid) {
                r.decomposition = decompose(sc.values, grid_basis(sc.grid), opts);
            } else {
                r.decomposition = decompose(sc.coefficients, monomial_basis(config.degree, sc.grid), opts);
            }
            out.push_back(std::move(r));
        } catch (const Error& e) {
            warnings.push_back("fpca " + metric + ": skipped: " + e.what());
        }
    }
    return out;
}

std::vector<double> report_times(const std::vector<double>& configured, const std::vector<PlantResult>& plants) {
    if (!configured.empty()) {
        std::vector<double> t = configured;
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        return t;
    }
    double last = -1.0;
    for (const auto& p : plants)
        for (const auto& s : p.series)
            if (!s.samples.empty()) last = std::max(last, s.samples.back().time_hours);
    std::vector<double> t;
    if (last < 0.0) return t;
    for (double d = 24.0; d < last; d += 24.0) t.push_back(d);
    t.push_back(last);
    return t;
}

ExperimentResult run_standard(const FrameSequence& seq, const ExperimentConfig& config, int threads) {
    ExperimentResult result;
    result.mode = RunMode::standard;
    if (seq.frames.size() == 1) result.warnings.push_back("sequence has a single frame");
    const std::size_t n = config.rois.size();
    result.plants.resize(n);
    std::vector<std::vector<std::string>> warnings(n);
    parallel_for(n, threads, [&](std::size_t i) {
        try {
            result.plants[i] = analyze_plant(seq, config.rois[i], config, warnings[i]);
        } catch (const std::exception& e) {
            result.plants[i].plant_id = config.rois[i].roi.plant_id;
            result.plants[i].group = config.rois[i].group;
            result.plants[i].failed = true;
            warnings[i].push_back("plant " + config.rois[i].roi.plant_id + ": failed: " + e.what());
        }
    });
    for (auto& w : warnings) result.warnings.insert(result.warnings.end(), w.begin(), w.end());
    result.fpca = analyze_fpca(result.plants, config.fpca, kStandardFpcaMetrics, result.warnings);
    result.report_hours = report_times(config.stats.report_hours, result.plants);
    return result;
}

ExperimentResult run_standard(const ExperimentConfig& config, int threads) {
    return run_standard(load_sequence(config.manifest), config, threads);
}

ExperimentResult run_screening(const FrameSequence& seq, const ExperimentConfig& config, int threads) {
    ExperimentResult result;
    result.mode = RunMode::screening;
    ScreeningResult screening;
    const double mm = seq.mm_per_pixel;
    const int w = seq.width(), h = seq.height();

    TrackerState tracker;
    tracker.params = TrackerParams{config.tracking.iou_threshold, config.tracking.min_hits, config.tracking.max_age, {}};
    std::vector<std::vector<Detection>> detections(seq.frames.size());
    const int seed_class[] = {static_cast<int>(PlantClass::seed)};
    parallel_for(seq.frames.size(), threads, [&](std::size_t i) {
        detections[i] = detect(seq.frames[i].mask, config.tracking.min_area_px, seed_class);
    });
    std::vector<TrackSnapshot> history;
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        auto snaps = step(tracker, detections[i], static_cast<int>(i), seq.frames[i].time_hours, config.groups);
        history.insert(history.end(), snaps.begin(), snaps.end());
    }
    history = quality_control(std::move(history),
                              QcParams{config.tracking.touching_frames, config.tracking.max_speed_mm_per_frame, mm});
    screening.tracks = history;

    std::map<int, std::vector<const TrackSnapshot*>> by_track;
    for (const auto& s : history) by_track[s.track_id].push_back(&s);

    struct SeedJob {
        int track_id = 0;
        std::string group;
        BBox box;
        int first = 0;  // frame range [first, last)
        int last = 0;
    };
    std::vector<SeedJob> jobs;
    for (const auto& [id, snaps] : by_track) {
        const TrackSnapshot& head = *snaps.front();
        if (head.group_id.empty()) {
            result.warnings.push_back("track " + std::to_string(id) + ": outside every group, ignored");
            continue;
        }
        int end = static_cast<int>(seq.frames.size());
        for (const auto* s : snaps)
            if (s->flags != qc_none) {
                end = s->frame;
                result.warnings.push_back("track " + std::to_string(id) + ": " + qc_flags_to_string(s->flags) +
                                          " from frame " + std::to_string(s->frame) + ", later frames discarded");
                break;
            }
        if (end <= head.frame) continue;
        jobs.push_back({id, head.group_id, head.bbox, std::max(0, head.frame - (config.tracking.min_hits - 1)), end});
    }

    std::vector<std::optional<double>> germination(jobs.size());
    result.plants.resize(jobs.size());
    const GerminationParams gparams{config.germination.min_root_px, config.germination.min_frames};
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        const SeedJob& job = jobs[j];
        const std::span<const Frame> frames(seq.frames.data() + job.first, static_cast<std::size_t>(job.last - job.first));
        const PixelRect attach = region_around(job.box, config.germination.region_margin_px, w, h);
        const PixelRect measure = region_around(job.box, config.germination.measure_margin_px, w, h);
        germination[j] = detect_germination(frames, attach, gparams);

        PlantResult& p = result.plants[j];
        char id[32];
        std::snprintf(id, sizeof id, "seed%04d", job.track_id);
        p.plant_id = id;
        p.group = job.group;
        MetricSeries hyp_raw{p.plant_id, "hypocotyl_length_raw", Unit::mm, {}};
        MetricSeries area{p.plant_id, "plant_area", Unit::mm2, {}};
        MetricSeries root_raw{p.plant_id, "root_length_raw", Unit::mm, {}};
        MetricSeries seed_size{p.plant_id, "seed_size", Unit::mm2, {}};
        for (const auto& f : frames) {
            hyp_raw.samples.push_back({f.time_hours, hypocotyl_length(f.mask, measure, mm)});
            const auto pm = plant_measures(f.mask, frames.front().mask, measure, mm);
            area.samples.push_back({f.time_hours, pm.plant_area_mm2});
            root_raw.samples.push_back({f.time_hours, pm.root_length_mm});
            if (seed_size.samples.empty() && pm.seed_size_mm2)
                seed_size.samples.push_back({frames.front().time_hours, *pm.seed_size_mm2});
        }
        p.series = {named(enforce_monotone(hyp_raw), p.plant_id, "hypocotyl_length", Unit::mm),
                    named(enforce_monotone(root_raw), p.plant_id, "root_length", Unit::mm),
                    area,
                    seed_size,
                    hyp_raw,
                    root_raw};
        if (germination[j]) p.series.push_back({p.plant_id, "germination_time", Unit::hours,
                                                {{frames.back().time_hours, *germination[j]}}});
    });

    std::vector<double> times;
    for (const auto& f : seq.frames) times.push_back(f.time_hours);
    for (const auto& g : config.groups) {
        std::map<int, std::optional<double>> per_seed;
        for (std::size_t j = 0; j < jobs.size(); ++j)
            if (jobs[j].group == g.group_id) per_seed[jobs[j].track_id] = germination[j];
        const int total = g.expected_seed_count ? *g.expected_seed_count : static_cast<int>(per_seed.size());
        if (total <= 0) {
            result.warnings.push_back("group " + g.group_id + ": no seeds tracked, germination skipped");
            continue;
        }
        int germinated = 0;
        for (const auto& [id, t] : per_seed) germinated += t.has_value();
        if (germinated > total) {
            result.warnings.push_back("group " + g.group_id + ": more germinated seeds than expected_seed_count");
            continue;
        }
        GroupGermination gg{g.group_id, total, fit_germination(per_seed, total, times)};
        if (!gg.fit.fitted) result.warnings.push_back("group " + g.group_id + ": no germination, fit skipped");
        screening.groups.push_back(std::move(gg));
    }
    result.screening = std::move(screening);
    result.fpca = analyze_fpca(result.plants, config.fpca, kScreeningFpcaMetrics, result.warnings);
    result.report_hours = report_times(config.stats.report_hours, result.plants);
    return result;
}

ExperimentResult run_screening(const ExperimentConfig& config, int threads) {
    return run_screening(load_sequence(config.manifest), config, threads);
}

ExperimentResult run_eval(const ExperimentConfig& config, int threads) {
    ExperimentResult result;
    result.mode = RunMode::eval;
    for (const auto& pair : config.eval.pairs) {
        const FrameSequence pred = load_sequence(pair.prediction);
        const FrameSequence truth = load_sequence(pair.truth);
        if (pred.frames.size() != truth.frames.size())
            throw ValidationError("eval pair " + pair.id + ": prediction has " + std::to_string(pred.frames.size()) +
                                  " frames, truth has " + std::to_string(truth.frames.size()));
        std::vector<std::vector<EvalResult>> rows(pred.frames.size());
        std::vector<std::string> errors(pred.frames.size());
        parallel_for(pred.frames.size(), threads, [&](std::size_t i) {
            try {
                rows[i] = evaluate_masks(pred.frames[i].mask, truth.frames[i].mask, truth.mm_per_pixel,
                                         config.eval.tolerance_px);
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        });
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!errors[i].empty())
                throw ValidationError("eval pair " + pair.id + ", frame " + std::to_string(i) + ": " + errors[i]);
            char id[32];
            std::snprintf(id, sizeof id, "/frame%04zu", i);
            for (const auto& r : rows[i]) result.eval.push_back({pair.id + id, r});
        }
    }
    return result;
}

ExperimentResult run_fpca(const ExperimentConfig& config) {
    std::ifstream in(config.fpca.series_csv);
    if (!in) throw ValidationError("cannot open series table " + config.fpca.series_csv.string());
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentResult result;
    result.mode = RunMode::fpca;
    result.plants = parse_series_table(ss.str());
    if (result.plants.empty()) throw ValidationError("series table has no rows");
    std::vector<std::string> metrics;
    for (const auto& p : result.plants)
        for (const auto& s : p.series)
            if (std::find(metrics.begin(), metrics.end(), s.metric_name) == metrics.end())
                metrics.push_back(s.metric_name);
    std::sort(metrics.begin(), metrics.end());
    result.fpca = analyze_fpca(result.plants, config.fpca, metrics, result.warnings);
    result.report_hours = report_times(config.stats.report_hours, result.plants);
    return result;
}

ExperimentResult run(const ExperimentConfig& config, int threads) {
    config.validate();
    switch (config.mode) {
        case RunMode::standard: return run_standard(config, threads);
        case RunMode::screening: return run_screening(config, threads);
        case RunMode::eval: return run_eval(config, threads);
        case RunMode::fpca: return run_fpca(config);
    }
    throw ValidationError("unknown mode");
}

std::string series_table(const std::vector<PlantResult>& plants) {
    std::string out = "plant_id,group,metric,units,time_hours,value\n";
    for (const auto& p : plants) {
        if (p.failed) continue;
        for (const auto& s : p.series)
            for (const auto& x : s.samples)
                out += csv_field(p.plant_id) + ',' + csv_field(p.group) + ',' + csv_field(s.metric_name) + ',' +
                       csv_field(to_string(s.units)) + ',' + format_number(x.time_hours) + ',' +
                       format_number(x.value) + '\n';
    }
    return out;
}

std::vector<PlantResult> parse_series_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) return {};
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    const std::vector<std::string> expected = {"plant_id", "group", "metric", "units", "time_hours", "value"};
    if (header != expected) throw ValidationError("series table header must be " + line);
    std::vector<PlantResult> plants;
    std::map<std::string, std::size_t> index;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) throw ValidationError("series table row " + std::to_string(row) + ": expected 6 fields");
        if (f[5] == "NA") continue;
        double t = 0.0, v = 0.0;
        try {
            std::size_t a = 0, b = 0;
            t = std::stod(f[4], &a);
            v = std::stod(f[5], &b);
            if (a != f[4].size() || b != f[5].size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ValidationError("series table row " + std::to_string(row) + ": bad number");
        }
        auto [it, fresh] = index.try_emplace(f[0], plants.size());
        if (fresh) {
            PlantResult p;
            p.plant_id = f[0];
            p.group = f[1];
            plants.push_back(std::move(p));
        }
        PlantResult& p = plants[it->second];
        if (p.group != f[1])
            throw ValidationError("series table row " + std::to_string(row) + ": plant " + f[0] + " changes group");
        auto s = std::find_if(p.series.begin(), p.series.end(),
                              [&](const MetricSeries& m) { return m.metric_name == f[2]; });
        if (s == p.series.end()) {
            p.series.push_back({p.plant_id, f[2], unit_from_string(f[3]), {}});
            s = std::prev(p.series.end());
        }
        s->samples.push_back({t, v});
    }
    for (const auto& p : plants)
        for (const auto& s : p.series) s.validate();
    return plants;
}

}  // namespace rootpipe

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rootpipe/generator.hpp"
#include "rootpipe/pipeline.hpp"
#include "rootpipe/report.hpp"

using namespace rootpipe;
namespace fs = std::filesystem;

namespace {

constexpr double kMm = 0.04;

void thick_line(LabelMask& m, double x0, double y0, double x1, double y1, std::uint8_t label) {
    const int steps = static_cast<int>(std::ceil(2.0 * std::hypot(x1 - x0, y1 - y0))) + 1;
    for (int k = 0; k <= steps; ++k) {
        const int x = static_cast<int>(std::lround(x0 + (x1 - x0) * k / steps));
        const int y = static_cast<int>(std::lround(y0 + (y1 - y0) * k / steps));
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) m.set(x + dx, y + dy, label);
    }
}

// Vertical main root growing 2 px per frame, one 45 degree lateral from frame
// 20, a one-frame false lateral at frame 40 and a gap in the main root at 45.
FrameSequence hand_sequence(int frames = 60) {
    std::vector<Frame> out;
    for (int i = 0; i < frames; ++i) {
        LabelMask m(120, 200);
        for (int y = 6; y <= 12; ++y)
            for (int x = 57; x <= 63; ++x) m.set(x, y, 3);
        thick_line(m, 60, 14, 60, 14 + 60 + 2 * i, 1);
        if (i >= 20) {
            const double k = 1.5 * (i - 20) + 2.0;
            thick_line(m, 60, 80, 60 + k / std::sqrt(2.0), 80 + k / std::sqrt(2.0), 2);
        }
        if (i == 40) thick_line(m, 60, 120, 45, 126, 2);
        if (i == 45)
            for (int y = 100; y < 104; ++y)
                for (int x = 58; x <= 62; ++x) m.set(x, y, 0);
        out.push_back({std::move(m), 0.25 * i});
    }
    return make_sequence(std::move(out), kMm);
}

ExperimentConfig hand_config() {
    ExperimentConfig c;
    PlantRoi roi;
    roi.roi = RoiSpec{"p1", 0, 0, 120, 200, Point{60, 9}};
    c.rois.push_back(roi);
    return c;
}

const MetricSeries& series(const PlantResult& p, const std::string& name) {
    for (const auto& s : p.series)
        if (s.metric_name == name) return s;
    FAIL("missing series " << name);
    throw std::logic_error("unreachable");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("rootpipe_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("standard pipeline on a hand-built plant") {
    const auto seq = hand_sequence();
    const auto result = run_standard(seq, hand_config());
    REQUIRE(result.plants.size() == 1);
    const auto& p = result.plants[0];
    REQUIRE_FALSE(p.failed);

    const auto& main = series(p, "main_root_length");
    REQUIRE(main.samples.size() == 60);
    for (int i = 0; i < 60; ++i) {
        // The skeleton reaches both ends of the 3 px bar, one pixel past the centreline.
        const double truth = (62 + 2 * i) * kMm;
        INFO("frame " << i);
        CHECK(std::abs(main.samples[i].value - truth) <= 2.5 * kMm);
    }
    for (std::size_t i = 1; i < main.samples.size(); ++i) CHECK(main.samples[i].value >= main.samples[i - 1].value);

    // The false lateral of frame 40 is dropped; the real one is kept.
    const auto& count = series(p, "lateral_root_count");
    CHECK(count.samples[10].value == 0.0);
    CHECK(count.samples[59].value == 1.0);
    for (const auto& s : count.samples) CHECK(s.value <= 1.0);

    const auto& lr = series(p, "lateral_root_length");
    const double lateral_truth = (1.5 * 39 + 2.0) * kMm;
    CHECK(std::abs(lr.samples[59].value - lateral_truth) <= 4 * kMm);

    const auto& total = series(p, "total_root_length");
    for (std::size_t i = 0; i < total.samples.size(); ++i)
        CHECK(total.samples[i].value == doctest::Approx(main.samples[i].value + lr.samples[i].value));
    const auto& density = series(p, "lateral_density");
    CHECK(density.samples.back().value * main.samples.back().value / 10.0 == doctest::Approx(1.0));

    REQUIRE_FALSE(p.angles.empty());
    const auto& last = p.angles.back();
    CHECK(last.time_hours == 59 * 0.25);
    CHECK(std::abs(last.base_tip_deg - 45.0) < 3.0);
    REQUIRE(last.emergence_deg.has_value());
    CHECK(std::abs(*last.emergence_deg - 45.0) < 3.0);

    // 15 h of data is shorter than the detrend window.
    CHECK_FALSE(p.spectrum.has_value());
    CHECK(std::any_of(result.warnings.begin(), result.warnings.end(),
                      [](const std::string& w) { return w.find("detrend window") != std::string::npos; }));
    REQUIRE(p.rsml.size() == 1);
    CHECK(p.rsml[0].metadata.time_hours == 59 * 0.25);
    CHECK(p.rsml[0].plants[0].roots.size() == 1);
    CHECK(p.rsml[0].plants[0].roots[0].children.size() == 1);
}

TEST_CASE("fusion bridges a one-frame gap") {
    const auto result = run_standard(hand_sequence(), hand_config());
    const auto& raw = series(result.plants[0], "main_root_length_raw");
    CHECK(raw.samples[45].value > raw.samples[44].value);
}

TEST_CASE("single-frame sequence gives metrics and skips speeds") {
    auto seq = hand_sequence(1);
    const auto result = run_standard(seq, hand_config());
    const auto& p = result.plants[0];
    REQUIRE_FALSE(p.failed);
    CHECK(series(p, "main_root_length").samples.size() == 1);
    bool speed_found = false;
    for (const auto& s : p.series) speed_found |= s.metric_name == "main_root_speed";
    CHECK_FALSE(speed_found);
    bool warned = false;
    for (const auto& w : result.warnings) warned |= w.find("growth speed") != std::string::npos;
    CHECK(warned);
}

TEST_CASE("bad plants are reported and others continue") {
    auto config = hand_config();
    PlantRoi outside;
    outside.roi = RoiSpec{"p2", 100, 0, 50, 50, std::nullopt};
    config.rois.push_back(outside);
    PlantRoi far_seed;
    far_seed.roi = RoiSpec{"p3", 0, 0, 120, 200, Point{5, 190}};
    config.rois.push_back(far_seed);
    const auto result = run_standard(hand_sequence(8), config);
    CHECK_FALSE(result.plants[0].failed);
    CHECK(result.plants[1].failed);
    CHECK(result.plants[2].failed);
    CHECK(result.warnings.size() >= 2);
}

TEST_CASE("threads do not change results") {
    StandardSceneOptions o;
    o.width = 400;
    o.height = 300;
    o.frames = 80;
    o.plants = 3;
    const auto e = generate_standard(o);
    const auto one = run_standard(e.sequence, e.config, 1);
    const auto many = run_standard(e.sequence, e.config, 3);
    CHECK(series_table(one.plants) == series_table(many.plants));
    CHECK(one.warnings == many.warnings);
}

TEST_CASE("series table round trip") {
    const auto result = run_standard(hand_sequence(30), hand_config());
    const std::string table = series_table(result.plants);
    const auto parsed = parse_series_table(table);
    CHECK(series_table(parsed) == table);
    CHECK_THROWS_AS(parse_series_table("a,b\n1,2\n"), ValidationError);
    CHECK_THROWS_AS(parse_series_table("plant_id,group,metric,units,time_hours,value\np,g,m,mm,x,1\n"),
                    ValidationError);
}

TEST_CASE("thread count resolution") {
    CHECK(resolve_threads(3) == 3);
    setenv("ROOTPIPE_THREADS", "5", 1);
    CHECK(resolve_threads(0) == 5);
    setenv("ROOTPIPE_THREADS", "junk", 1);
    CHECK(resolve_threads(0) == 1);
    unsetenv("ROOTPIPE_THREADS");
    CHECK(resolve_threads(0) == 1);
}

TEST_CASE("screening recovers germination and keeps tracks clean") {
    ScreeningSceneOptions o;
    o.width = 400;
    o.height = 300;
    o.rows = 5;
    o.frames = 161;
    o.curves = {{0.0, 90.0, 8.0, 13.4}, {0.0, 60.0, 6.0, 20.0}};
    const auto e = generate_screening(o);
    const auto r = run_screening(e.sequence, e.config);
    REQUIRE(r.screening.has_value());
    for (const auto& s : r.screening->tracks) CHECK(s.flags == qc_none);
    REQUIRE(r.screening->groups.size() == 2);
    const auto& a = r.screening->groups[0];
    CHECK(a.total_seeds == 25);
    REQUIRE(a.fit.fitted);
    CHECK(std::abs(a.fit.params.t50 - 13.4) < 2.0);
    CHECK(r.plants.size() == 50);
    for (const auto& p : r.plants) {
        const auto& hyp = series(p, "hypocotyl_length");
        for (std::size_t i = 1; i < hyp.samples.size(); ++i) CHECK(hyp.samples[i].value >= hyp.samples[i - 1].value);
    }
}

TEST_CASE("dormant plates give no fit and exit cleanly") {
    ScreeningSceneOptions o;
    o.width = 400;
    o.height = 300;
    o.rows = 5;
    o.frames = 40;
    o.curves = {{0.0, 0.0, 8.0, 13.4}};
    const auto e = generate_screening(o);
    const auto r = run_screening(e.sequence, e.config);
    REQUIRE(r.screening->groups.size() == 2);
    for (const auto& g : r.screening->groups) {
        CHECK_FALSE(g.fit.fitted);
        CHECK(g.fit.final_percent == 0.0);
    }
    TempDir dir("dormant");
    CHECK_NOTHROW(write_report(r, dir.path));
    CHECK(fs::exists(dir.path / "germination" / "summary.json"));
}

TEST_CASE("eval mode on files") {
    TempDir dir("eval");
    const auto seq = hand_sequence(4);
    save_sequence(dir.path / "truth" / "manifest.json", seq);
    FrameSequence dilated = seq;
    for (auto& f : dilated.frames)
        for (int y = 14; y < 190; ++y)
            if (f.mask.at(60, y) == 1) f.mask.set(62, y, 1), f.mask.set(58, y, 1);
    save_sequence(dir.path / "pred" / "manifest.json", dilated);
    FrameSequence shorter = seq;
    shorter.frames.pop_back();
    save_sequence(dir.path / "short" / "manifest.json", shorter);

    ExperimentConfig c;
    c.mode = RunMode::eval;
    c.eval.pairs = {{"self", dir.path / "truth" / "manifest.json", dir.path / "truth" / "manifest.json"},
                    {"dilated", dir.path / "pred" / "manifest.json", dir.path / "truth" / "manifest.json"}};
    const auto r = run_eval(c);
    for (const auto& row : r.eval) {
        if (row.image_id.rfind("self", 0) == 0) {
            CHECK(row.result.dice == 1.0);
        } else if (row.result.label == 1) {
            CHECK(row.result.dice < 1.0);
            CHECK(*row.result.completeness == 1.0);
        }
    }
    c.eval.pairs = {{"short", dir.path / "short" / "manifest.json", dir.path / "truth" / "manifest.json"}};
    CHECK_THROWS_AS(run_eval(c), ValidationError);
}

TEST_CASE("report bundle layout and determinism") {
    auto config = hand_config();
    PlantRoi second;
    second.roi = RoiSpec{"p2", 0, 0, 120, 200, Point{60, 9}};
    second.group = "mutant";
    config.rois.push_back(second);
    const auto r = run_standard(hand_sequence(40), config);
    TempDir a("report_a"), b("report_b");
    const auto files = write_report(r, a.path);
    write_report(r, b.path);
    for (const auto& f : files) CHECK(slurp(a.path / f) == slurp(b.path / f));
    for (const char* f : {"metrics/main_root_length.csv", "stats/comparisons.csv", "stats/summary.txt",
                          "fpca/main_root_length.json", "rsml/p1.rsml", "rsml/p2.rsml", "plants/p1.csv",
                          "plants/p1_angles.csv", "series.csv"})
        CHECK_MESSAGE(fs::exists(a.path / f), f);
    const std::string summary = slurp(a.path / "stats/summary.txt");
    CHECK(summary.find("post-processed") != std::string::npos);
    CHECK(summary.find("** p < 0.001") != std::string::npos);
    const std::string comparisons = slurp(a.path / "stats/comparisons.csv");
    CHECK(comparisons.find("main_root_length,9.75,default,mutant,1,1,") != std::string::npos);
}

TEST_CASE("report edge cases") {
    ExperimentResult r;
    PlantResult p;
    p.plant_id = "only";
    p.group = "g";
    p.series.push_back({"only", "len", Unit::mm, {{0.0, 1.0}, {1.0, 2.0}}});
    r.plants.push_back(p);
    r.report_hours = {1.0};
    CHECK(compare_groups(r).empty());
    TempDir dir("edge");
    write_report(r, dir.path);
    CHECK(slurp(dir.path / "metrics/len.csv") == "time_hours,group,n,mean,sd,se\n0,g,1,1,0,0\n1,g,1,2,0,0\n");

    // A metric missing from one group yields NA cells, not a crash.
    PlantResult q;
    q.plant_id = "other";
    q.group = "h";
    q.series.push_back({"other", "width", Unit::mm, {{1.0, 3.0}}});
    r.plants.push_back(q);
    const auto rows = compare_groups(r);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) CHECK_FALSE(row.test.has_value());
    write_report(r, dir.path);
    const std::string comparisons = slurp(dir.path / "stats/comparisons.csv");
    CHECK(comparisons.find("len,1,g,h,1,0,NA,NA,") != std::string::npos);
}

TEST_CASE("csv helpers") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(split_csv_line("a,\"b,c\",\"d\"\"e\",") == std::vector<std::string>{"a", "b,c", "d\"e", ""});
    CHECK_THROWS_AS(split_csv_line("\"open"), ValidationError);
}

#include "rootpipe/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

namespace rootpipe {

namespace {

using nlohmann::ordered_json;

std::string safe_name(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

// JSON number rounded to the report precision; null when not finite.
ordered_json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(format_number(v));
}

ordered_json num_array(const Eigen::VectorXd& v) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

ordered_json num_array(const std::vector<double>& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

class Bundle {
public:
    explicit Bundle(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& rel, const std::string& content) {
        const auto path = dir_ / rel;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out << content;
        if (!out) throw Error("failed writing " + path.string());
        written_.push_back(rel);
    }

    [[nodiscard]] const std::vector<std::string>& written() const { return written_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> written_;
};

std::set<std::string> metric_names(const ExperimentResult& r) {
    std::set<std::string> names;
    for (const auto& p : r.plants)
        if (!p.failed)
            for (const auto& s : p.series) names.insert(s.metric_name);
    return names;
}

std::set<std::string> group_names(const ExperimentResult& r) {
    std::set<std::string> names;
    for (const auto& p : r.plants)
        if (!p.failed) names.insert(p.group);
    return names;
}

const MetricSeries* find_series(const PlantResult& p, const std::string& metric) {
    for (const auto& s : p.series)
        if (s.metric_name == metric) return &s;
    return nullptr;
}

std::string summary_cells(const Summary& s) {
    if (s.n == 0) return "0,NA,NA,NA";
    return std::to_string(s.n) + ',' + format_number(s.mean) + ',' + format_number(s.sd) + ',' + format_number(s.se);
}

// Per-group summaries of one metric at every observed time.
std::string metric_table(const ExperimentResult& r, const std::string& metric, const std::set<std::string>& groups) {
    std::set<double> times;
    for (const auto& p : r.plants)
        if (!p.failed)
            if (const auto* s = find_series(p, metric))
                for (const auto& x : s->samples) times.insert(x.time_hours);
    std::string out = "time_hours,group,n,mean,sd,se\n";
    for (double t : times) {
        for (const auto& g : groups) {
            std::vector<double> values;
            for (const auto& p : r.plants) {
                if (p.failed || p.group != g) continue;
                const auto* s = find_series(p, metric);
                if (!s) continue;
                for (const auto& x : s->samples)
                    if (x.time_hours == t) values.push_back(x.value);
            }
            out += format_number(t) + ',' + csv_field(g) + ',' + summary_cells(summarize(values)) + '\n';
        }
    }
    return out;
}

std::string comparisons_table(const std::vector<GroupComparison>& rows) {
    std::string out = "metric,time_hours,group_a,group_b,n_a,n_b,u,p_value,marker\n";
    for (const auto& c : rows) {
        out += csv_field(c.metric) + ',' + format_optional(c.time_hours) + ',' + csv_field(c.group_a) + ',' +
               csv_field(c.group_b) + ',' + std::to_string(c.n_a) + ',' + std::to_string(c.n_b) + ',';
        if (c.test)
            out += format_number(c.test->u) + ',' + format_number(c.test->p_value) + ',' +
                   significance_marker(c.test->p_value) + '\n';
        else
            out += "NA,NA,\n";
    }
    return out;
}

std::vector<double> group_values(const ExperimentResult& r, const std::string& group, const std::string& metric,
                                 double t) {
    std::vector<double> v;
    for (const auto& p : r.plants) {
        if (p.failed || p.group != group) continue;
        if (const auto* s = find_series(p, metric))
            if (const auto x = value_at(*s, t)) v.push_back(*x);
    }
    return v;
}

std::string plant_table(const PlantResult& p) {
    std::string out = "time_hours,metric,value,units\n";
    for (const auto& s : p.series)
        for (const auto& x : s.samples)
            out += format_number(x.time_hours) + ',' + csv_field(s.metric_name) + ',' + format_number(x.value) + ',' +
                   csv_field(to_string(s.units)) + '\n';
    return out;
}

std::string angle_table(const PlantResult& p) {
    std::string out = "lateral_track_id,time_hours,base_tip_deg,emergence_deg,d_mm\n";
    for (const auto& a : p.angles)
        out += std::to_string(a.lateral_track_id) + ',' + format_number(a.time_hours) + ',' +
               format_number(a.base_tip_deg) + ',' + format_optional(a.emergence_deg) + ',' + format_number(a.d_mm) +
               '\n';
    return out;
}

std::string spectrum_table(const Spectrum& s) {
    std::string out = "period_hours,amplitude\n";
    for (const auto& l : s.lines) out += format_number(l.period_hours) + ',' + format_number(l.amplitude) + '\n';
    return out;
}

std::string fpca_json(const FpcaResult& f) {
    const auto& d = f.decomposition;
    ordered_json j;
    j["metric"] = f.metric;
    j["units"] = to_string(f.units);
    j["basis"] = d.basis_degree < 0 ? "grid" : "monomial";
    if (d.basis_degree >= 0) j["degree"] = d.basis_degree;
    j["n_curves"] = f.plant_ids.size();
    j["grid_hours"] = num_array(f.grid_hours);
    j["mean"] = num_array(d.mean_fn);
    ordered_json comps = ordered_json::array();
    for (Eigen::Index k = 0; k < d.components.rows(); ++k)
        comps.push_back(num_array(Eigen::VectorXd(d.components.row(k).transpose())));
    j["components"] = comps;
    j["explained_variance"] = num_array(d.explained_variance);
    ordered_json recon = ordered_json::array();
    const std::vector<double> qs = {0.05, 0.25, 0.5, 0.75, 0.95};
    for (int k = 0; k < d.num_components(); ++k) {
        ordered_json comp;
        comp["component"] = k + 1;
        ordered_json curves = ordered_json::array();
        const auto rec = quantile_reconstructions(d, k, qs);
        for (std::size_t q = 0; q < qs.size(); ++q) {
            ordered_json c;
            c["quantile"] = qs[q];
            c["curve"] = num_array(rec[q]);
            curves.push_back(c);
        }
        comp["curves"] = curves;
        recon.push_back(comp);
    }
    j["quantile_reconstructions"] = recon;
    return j.dump(2) + '\n';
}

std::string fpca_scores(const FpcaResult& f) {
    const auto& d = f.decomposition;
    std::string out = "plant_id,group";
    for (int k = 0; k < d.num_components(); ++k) out += ",pc" + std::to_string(k + 1);
    out += '\n';
    for (std::size_t i = 0; i < f.plant_ids.size(); ++i) {
        out += csv_field(f.plant_ids[i]) + ',' + csv_field(f.groups[i]);
        for (int k = 0; k < d.num_components(); ++k)
            out += ',' + format_number(d.scores(static_cast<Eigen::Index>(i), k));
        out += '\n';
    }
    return out;
}

std::string tracks_table(const std::vector<TrackSnapshot>& tracks) {
    std::string out = "frame,time_hours,track_id,group_id,cx,cy,w,h,flags\n";
    for (const auto& s : tracks)
        out += std::to_string(s.frame) + ',' + format_number(s.time_hours) + ',' + std::to_string(s.track_id) + ',' +
               csv_field(s.group_id) + ',' + format_number(s.bbox.cx) + ',' + format_number(s.bbox.cy) + ',' +
               format_number(s.bbox.w) + ',' + format_number(s.bbox.h) + ',' + qc_flags_to_string(s.flags) + '\n';
    return out;
}

std::string germination_table(const GerminationFit& fit) {
    std::string out = "time_hours,empirical_percent,fitted_percent\n";
    for (std::size_t i = 0; i < fit.sample_times.size(); ++i)
        out += format_number(fit.sample_times[i]) + ',' + format_number(fit.empirical_percent[i]) + ',' +
               (fit.fitted ? format_number(fit.fitted_percent[i]) : std::string("NA")) + '\n';
    return out;
}

std::string germination_summary(const ScreeningResult& s) {
    ordered_json groups = ordered_json::array();
    for (const auto& g : s.groups) {
        ordered_json j;
        j["group"] = g.group_id;
        j["total_seeds"] = g.total_seeds;
        int germinated = 0;
        for (const auto& [id, t] : g.fit.per_seed_times) germinated += t.has_value();
        j["germinated"] = germinated;
        j["final_percent"] = num(g.fit.final_percent);
        j["fitted"] = g.fit.fitted;
        if (g.fit.fitted) {
            j["g0"] = num(g.fit.params.g0);
            j["g_max"] = num(g.fit.params.g_max);
            j["n"] = num(g.fit.params.n);
            j["t50"] = num(g.fit.params.t50);
            j["tmgr"] = num(g.fit.tmgr);
            j["rmse"] = num(g.fit.rmse);
        } else {
            for (const char* k : {"g0", "g_max", "n", "t50", "tmgr", "rmse"}) j[k] = nullptr;
        }
        groups.push_back(j);
    }
    ordered_json root;
    root["groups"] = groups;
    return root.dump(2) + '\n';
}

std::string seeds_table(const ScreeningResult& s) {
    std::string out = "track_id,group,germination_hours\n";
    for (const auto& g : s.groups)
        for (const auto& [id, t] : g.fit.per_seed_times)
            out += std::to_string(id) + ',' + csv_field(g.group_id) + ',' + format_optional(t) + '\n';
    return out;
}

std::string eval_table(const std::vector<EvalRow>& rows) {
    std::string out = "image_id,class,dice,hausdorff_mm,completeness,correctness\n";
    for (const auto& r : rows)
        out += csv_field(r.image_id) + ',' + std::to_string(r.result.label) + ',' + format_number(r.result.dice) + ',' +
               format_number(r.result.hausdorff_mm) + ',' + format_optional(r.result.completeness) + ',' +
               format_optional(r.result.correctness) + '\n';
    return out;
}

std::string summary_text(const ExperimentResult& r, const std::vector<GroupComparison>& comparisons) {
    std::string out = "rootpipe statistics report\n";
    out += "mode: " + to_string(r.mode) + '\n';
    int failed = 0;
    for (const auto& p : r.plants) failed += p.failed;
    out += "subjects analyzed: " + std::to_string(r.plants.size() - failed) + ", failed: " + std::to_string(failed) +
           '\n';
    out += "test: two-sided Mann-Whitney U on post-processed values (running-maximum lengths and\n"
           "persistence-filtered laterals; *_raw metrics are the unfiltered measurements)\n";
    out += "exact null distribution when n_a + n_b <= 12 without ties, normal approximation otherwise\n";
    out += "markers: * p < 0.05, ** p < 0.001\n";

    if (r.screening) {
        out += "\n== germination ==\n";
        for (const auto& g : r.screening->groups) {
            out += "group " + g.group_id + ": seeds " + std::to_string(g.total_seeds) +
                   ", final " + format_number(g.fit.final_percent) + " %";
            if (g.fit.fitted)
                out += ", g0 " + format_number(g.fit.params.g0) + ", g_max " + format_number(g.fit.params.g_max) +
                       ", n " + format_number(g.fit.params.n) + ", t50 " + format_number(g.fit.params.t50) +
                       " h, tmgr " + format_number(g.fit.tmgr) + " h, rmse " + format_number(g.fit.rmse);
            else
                out += ", not fitted";
            out += '\n';
        }
    }

    const auto groups = group_names(r);
    for (const auto& metric : metric_names(r)) {
        out += "\n== " + metric + " ==\n";
        for (double t : r.report_hours) {
            out += "at " + format_number(t) + " h\n";
            for (const auto& g : groups) {
                const auto s = summarize(group_values(r, g, metric, t));
                out += "  " + g + ": n " + std::to_string(s.n);
                if (s.n > 0)
                    out += ", mean " + format_number(s.mean) + ", sd " + format_number(s.sd) + ", se " +
                           format_number(s.se);
                out += '\n';
            }
            for (const auto& c : comparisons) {
                if (c.metric != metric || !c.time_hours || *c.time_hours != t) continue;
                out += "  " + c.group_a + " vs " + c.group_b + ": ";
                if (c.test)
                    out += "U " + format_number(c.test->u) + ", p " + format_number(c.test->p_value) +
                           (c.test->exact ? " (exact)" : " (normal)") + ' ' + significance_marker(c.test->p_value);
                else
                    out += "NA (missing data)";
                while (!out.empty() && out.back() == ' ') out.pop_back();
                out += '\n';
            }
        }
    }

    if (!r.fpca.empty()) {
        out += "\n== fpca ==\n";
        for (const auto& f : r.fpca) {
            out += f.metric + ": " + std::to_string(f.decomposition.num_components()) + " components, explained";
            for (double v : f.decomposition.explained_variance) out += ' ' + format_number(v);
            out += '\n';
            for (const auto& c : comparisons) {
                if (c.time_hours || c.metric.rfind("fpca:" + f.metric + ":", 0) != 0) continue;
                out += "  " + c.metric.substr(6 + f.metric.size()) + ' ' + c.group_a + " vs " + c.group_b + ": ";
                if (c.test)
                    out += "U " + format_number(c.test->u) + ", p " + format_number(c.test->p_value) + ' ' +
                           significance_marker(c.test->p_value);
                else
                    out += "NA (missing data)";
                while (!out.empty() && out.back() == ' ') out.pop_back();
                out += '\n';
            }
        }
    }

    if (!r.eval.empty()) {
        out += "\n== evaluation ==\n";
        std::map<int, std::vector<double>> dice;
        for (const auto& e : r.eval) dice[e.result.label].push_back(e.result.dice);
        for (const auto& [label, v] : dice) {
            const auto s = summarize(v);
            out += "class " + std::to_string(label) + ": images " + std::to_string(s.n) + ", mean dice " +
                   format_number(s.mean) + '\n';
        }
    }

    out += "\n== warnings ==\n";
    if (r.warnings.empty()) out += "none\n";
    for (const auto& w : r.warnings) out += "- " + w + '\n';
    return out;
}

std::string rsml_name(const RsmlDocument& doc, const std::string& plant, bool per_frame) {
    if (!per_frame) return "rsml/" + safe_name(plant) + ".rsml";
    char t[32];
    std::snprintf(t, sizeof t, "_t%08.2f", doc.metadata.time_hours);
    return "rsml/" + safe_name(plant) + t + ".rsml";
}

}  // namespace

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw ValidationError("unterminated quoted CSV field");
    out.push_back(std::move(cur));
    return out;
}

std::optional<double> value_at(const MetricSeries& series, double t) {
    std::optional<double> v;
    for (const auto& s : series.samples) {
        if (s.time_hours > t + 1e-9) break;
        v = s.value;
    }
    return v;
}

std::vector<GroupComparison> compare_groups(const ExperimentResult& r) {
    std::vector<GroupComparison> out;
    const auto groups_set = group_names(r);
    const std::vector<std::string> groups(groups_set.begin(), groups_set.end());
    if (groups.size() < 2) return out;
    auto add = [&](const std::string& metric, std::optional<double> t, const std::string& a, const std::string& b,
                   const std::vector<double>& va, const std::vector<double>& vb) {
        GroupComparison c{metric, t, a, b, static_cast<int>(va.size()), static_cast<int>(vb.size()), std::nullopt};
        if (!va.empty() && !vb.empty()) c.test = mann_whitney(va, vb);
        out.push_back(std::move(c));
    };
    for (const auto& metric : metric_names(r))
        for (double t : r.report_hours)
            for (std::size_t i = 0; i < groups.size(); ++i)
                for (std::size_t j = i + 1; j < groups.size(); ++j)
                    add(metric, t, groups[i], groups[j], group_values(r, groups[i], metric, t),
                        group_values(r, groups[j], metric, t));
    for (const auto& f : r.fpca) {
        const auto& d = f.decomposition;
        for (int k = 0; k < d.num_components(); ++k)
            for (std::size_t i = 0; i < groups.size(); ++i)
                for (std::size_t j = i + 1; j < groups.size(); ++j) {
                    std::vector<double> va, vb;
                    for (std::size_t p = 0; p < f.plant_ids.size(); ++p) {
                        const double s = d.scores(static_cast<Eigen::Index>(p), k);
                        if (f.groups[p] == groups[i]) va.push_back(s);
                        if (f.groups[p] == groups[j]) vb.push_back(s);
                    }
                    add("fpca:" + f.metric + ":pc" + std::to_string(k + 1), std::nullopt, groups[i], groups[j], va, vb);
                }
    }
    return out;
}

std::vector<std::string> write_report(const ExperimentResult& r, const std::filesystem::path& dir) {
    Bundle b(dir);
    const auto comparisons = compare_groups(r);
    const auto groups = group_names(r);

    if (r.mode != RunMode::eval) {
        for (const auto& metric : metric_names(r)) b.write("metrics/" + safe_name(metric) + ".csv", metric_table(r, metric, groups));
        b.write("series.csv", series_table(r.plants));
    }
    for (const auto& p : r.plants) {
        if (p.failed || r.mode == RunMode::fpca) continue;
        const std::string base = "plants/" + safe_name(p.plant_id);
        b.write(base + ".csv", plant_table(p));
        if (r.mode == RunMode::standard) b.write(base + "_angles.csv", angle_table(p));
        if (p.spectrum) b.write(base + "_spectrum.csv", spectrum_table(*p.spectrum));
        for (const auto& doc : p.rsml) b.write(rsml_name(doc, p.plant_id, p.rsml.size() > 1), write_rsml(doc));
    }
    for (const auto& f : r.fpca) {
        b.write("fpca/" + safe_name(f.metric) + ".json", fpca_json(f));
        b.write("fpca/" + safe_name(f.metric) + "_scores.csv", fpca_scores(f));
    }
    if (r.screening) {
        b.write("tracks/tracks.csv", tracks_table(r.screening->tracks));
        for (const auto& g : r.screening->groups)
            b.write("germination/" + safe_name(g.group_id) + ".csv", germination_table(g.fit));
        b.write("germination/summary.json", germination_summary(*r.screening));
        b.write("germination/seeds.csv", seeds_table(*r.screening));
    }
    if (r.mode == RunMode::eval) b.write("eval/eval.csv", eval_table(r.eval));
    b.write("stats/comparisons.csv", comparisons_table(comparisons));
    b.write("stats/summary.txt", summary_text(r, comparisons));
    return b.written();
}

}  // namespace rootpipe

#include "rootpipe/mask_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

namespace rootpipe {

namespace fs = std::filesystem;
using nlohmann::json;

LabelMask::LabelMask(int width, int height, std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
    if (width <= 0 || height <= 0)
        throw ValidationError("mask dimensions must be positive");
    if (labels_.size() != static_cast<std::size_t>(width) * height)
        throw ValidationError("label grid length does not match width x height");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] >= kNumClasses)
            throw ValidationError("label value " + std::to_string(labels_[i]) + " at pixel (" +
                                  std::to_string(i % width) + ", " + std::to_string(i / width) +
                                  ") is outside 0-6");
    }
}

LabelMask::LabelMask(int width, int height)
    : LabelMask(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                                         std::max(height, 0))) {}

void LabelMask::set(int x, int y, std::uint8_t label) {
    if (label >= kNumClasses) throw ValidationError("label value outside 0-6");
    labels_[static_cast<std::size_t>(y) * width_ + x] = label;
}

void validate_roi(const RoiSpec& roi, int width, int height) {
    if (roi.w <= 0 || roi.h <= 0)
        throw ValidationError("roi '" + roi.plant_id + "' must have positive size");
    if (roi.x < 0 || roi.y < 0 || roi.x + roi.w > width || roi.y + roi.h > height)
        throw ValidationError("roi '" + roi.plant_id + "' lies outside the " + std::to_string(width) +
                              "x" + std::to_string(height) + " frame");
}

namespace {

// Reads one whitespace/comment-delimited PGM header token.
std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

int pgm_int(std::istream& in, const fs::path& path, const char* what) {
    const std::string tok = pgm_token(in);
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(path.string() + ": bad PGM " + what + " '" + tok + "'");
    }
}

}  // namespace

LabelMask read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing mask file: " + path.string());
    if (pgm_token(in) != "P5") throw ValidationError(path.string() + ": not a binary PGM (P5)");
    const int width = pgm_int(in, path, "width");
    const int height = pgm_int(in, path, "height");
    const int maxval = pgm_int(in, path, "maxval");
    if (width <= 0 || height <= 0) throw ValidationError(path.string() + ": non-positive dimensions");
    if (maxval <= 0 || maxval > 255)
        throw ValidationError(path.string() + ": only 8-bit PGM is supported");
    // pgm_token consumed exactly one whitespace byte after maxval.
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
    if (in.gcount() != static_cast<std::streamsize>(labels.size()))
        throw ValidationError(path.string() + ": truncated pixel data");
    try {
        return LabelMask(width, height, std::move(labels));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_pgm(const fs::path& path, const LabelMask& mask) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(mask.labels().data()),
              static_cast<std::streamsize>(mask.labels().size()));
}

FrameSequence make_sequence(std::vector<Frame> frames, double mm_per_pixel, double fallback_interval) {
    if (frames.empty()) throw ValidationError("no frames");
    if (!(mm_per_pixel > 0.0)) throw ValidationError("mm_per_pixel must be positive");
    const int w = frames.front().mask.width();
    const int h = frames.front().mask.height();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].mask.width() != w || frames[i].mask.height() != h)
            throw ValidationError("frame " + std::to_string(i) + ": dimensions " +
                                  std::to_string(frames[i].mask.width()) + "x" +
                                  std::to_string(frames[i].mask.height()) + " differ from " +
                                  std::to_string(w) + "x" + std::to_string(h));
        if (i > 0 && !(frames[i].time_hours > frames[i - 1].time_hours))
            throw ValidationError("frame " + std::to_string(i) +
                                  ": timestamps must be strictly increasing");
    }
    FrameSequence seq;
    seq.mm_per_pixel = mm_per_pixel;
    if (frames.size() == 1) {
        if (!(fallback_interval > 0.0)) throw ValidationError("interval_hours must be positive");
        seq.interval_hours = fallback_interval;
    } else {
        std::vector<double> gaps;
        for (std::size_t i = 1; i < frames.size(); ++i)
            gaps.push_back(frames[i].time_hours - frames[i - 1].time_hours);
        std::sort(gaps.begin(), gaps.end());
        const std::size_t m = gaps.size() / 2;
        seq.interval_hours = gaps.size() % 2 ? gaps[m] : 0.5 * (gaps[m - 1] + gaps[m]);
    }
    seq.frames = std::move(frames);
    return seq;
}

FrameSequence load_sequence(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ValidationError("missing manifest: " + manifest_path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(manifest_path.string() + ": " + e.what());
    }
    if (!doc.contains("mm_per_pixel") || !doc["mm_per_pixel"].is_number())
        throw ValidationError(manifest_path.string() + ": missing numeric mm_per_pixel");
    if (!doc.contains("frames") || !doc["frames"].is_array())
        throw ValidationError(manifest_path.string() + ": missing frames array");
    const auto& entries = doc["frames"];
    if (entries.empty()) throw ValidationError("no frames");

    const fs::path base = manifest_path.parent_path();
    std::vector<Frame> frames;
    frames.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (!e.contains("file") || !e.contains("time_hours") || !e["time_hours"].is_number())
            throw ValidationError("frame " + std::to_string(i) + ": needs file and time_hours");
        try {
            frames.push_back({read_pgm(base / e["file"].get<std::string>()),
                              e["time_hours"].get<double>()});
        } catch (const ValidationError& err) {
            throw ValidationError("frame " + std::to_string(i) + ": " + err.what());
        }
    }
    return make_sequence(std::move(frames), doc["mm_per_pixel"].get<double>(),
                         doc.value("interval_hours", 0.25));
}

void save_sequence(const fs::path& manifest_path, const FrameSequence& seq) {
    const fs::path dir = manifest_path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    json doc;
    doc["mm_per_pixel"] = seq.mm_per_pixel;
    doc["interval_hours"] = seq.interval_hours;
    doc["frames"] = json::array();
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        std::ostringstream name;
        name << "frame_";
        name.width(5);
        name.fill('0');
        name << i << ".pgm";
        write_pgm(dir / name.str(), seq.frames[i].mask);
        doc["frames"].push_back({{"file", name.str()}, {"time_hours", seq.frames[i].time_hours}});
    }
    std::ofstream out(manifest_path);
    out << doc.dump(1) << '\n';
}

LabelMask crop(const LabelMask& mask, const RoiSpec& roi) {
    validate_roi(roi, mask.width(), mask.height());
    std::vector<std::uint8_t> labels;
    labels.reserve(static_cast<std::size_t>(roi.w) * roi.h);
    const auto& src = mask.labels();
    for (int y = roi.y; y < roi.y + roi.h; ++y) {
        const auto row = src.begin() + static_cast<std::ptrdiff_t>(y) * mask.width();
        labels.insert(labels.end(), row + roi.x, row + roi.x + roi.w);
    }
    return LabelMask(roi.w, roi.h, std::move(labels));
}

BinaryGrid class_mask(const LabelMask& mask, std::span<const int> classes) {
    bool wanted[kNumClasses] = {};
    for (int c : classes) {
        if (c < 0 || c >= kNumClasses) throw ValidationError("class code outside 0-6");
        wanted[c] = true;
    }
    BinaryGrid out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (wanted[mask.at(x, y)]) out.set(x, y);
    return out;
}

BinaryGrid class_mask(const LabelMask& mask, std::initializer_list<int> classes) {
    return class_mask(mask, std::span<const int>(classes.begin(), classes.size()));
}

}  // namespace rootpipe

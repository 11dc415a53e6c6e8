#include "rootpipe/rsml.hpp"

#include <cmath>
#include <cstdio>
#include <cctype>
#include <cstdlib>

namespace rootpipe {

XmlParseError::XmlParseError(const std::string& what, std::size_t offset)
    : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}

const std::string* XmlElement::attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

const XmlElement* XmlElement::child(std::string_view child_name) const {
    for (const auto& c : children)
        if (c.name == child_name) return &c;
    return nullptr;
}

namespace {

class XmlReader {
public:
    explicit XmlReader(std::string_view s) : s_(s) {}

    XmlElement document() {
        skip_misc();
        if (at_end() || peek() != '<') fail("expected root element");
        XmlElement root = element();
        skip_misc();
        if (!at_end()) fail("content after the root element");
        return root;
    }

private:
    std::string_view s_;
    std::size_t i_ = 0;

    [[noreturn]] void fail(const std::string& what) const { throw XmlParseError(what, i_); }
    [[nodiscard]] bool at_end() const { return i_ >= s_.size(); }
    [[nodiscard]] char peek() const { return s_[i_]; }
    [[nodiscard]] bool starts(std::string_view t) const { return s_.substr(i_, t.size()) == t; }

    void expect(std::string_view t) {
        if (!starts(t)) fail("expected '" + std::string(t) + "'");
        i_ += t.size();
    }

    void skip_space() {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) ++i_;
    }

    void skip_until(std::string_view end, const char* what) {
        const auto pos = s_.find(end, i_);
        if (pos == std::string_view::npos) {
            i_ = s_.size();
            fail(std::string("unterminated ") + what);
        }
        i_ = pos + end.size();
    }

    // Whitespace, comments, processing instructions and DOCTYPE.
    void skip_misc() {
        for (;;) {
            skip_space();
            if (starts("<?")) skip_until("?>", "processing instruction");
            else if (starts("<!--")) skip_until("-->", "comment");
            else if (starts("<!DOCTYPE")) skip_until(">", "DOCTYPE");
            else return;
        }
    }

    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':' ||
               static_cast<unsigned char>(c) >= 0x80;
    }

    std::string name() {
        const std::size_t start = i_;
        while (!at_end() && name_char(peek())) ++i_;
        if (i_ == start) fail("expected a name");
        return std::string(s_.substr(start, i_ - start));
    }

    static void append_utf8(std::string& out, unsigned long cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    void entity(std::string& out) {
        const std::size_t start = i_;
        const auto semi = s_.find(';', i_);
        if (semi == std::string_view::npos || semi - i_ > 12) fail("bad entity reference");
        const std::string_view ref = s_.substr(i_ + 1, semi - i_ - 1);
        if (ref == "amp") out += '&';
        else if (ref == "lt") out += '<';
        else if (ref == "gt") out += '>';
        else if (ref == "quot") out += '"';
        else if (ref == "apos") out += '\'';
        else if (ref.size() > 1 && ref[0] == '#') {
            const bool hex = ref[1] == 'x';
            const std::string digits(ref.substr(hex ? 2 : 1));
            char* end = nullptr;
            const unsigned long cp = std::strtoul(digits.c_str(), &end, hex ? 16 : 10);
            if (digits.empty() || *end != '\0' || cp == 0 || cp > 0x10FFFF) {
                i_ = start;
                fail("bad character reference");
            }
            append_utf8(out, cp);
        } else {
            fail("unknown entity '" + std::string(ref) + "'");
        }
        i_ = semi + 1;
    }

    std::string attribute_value() {
        if (at_end() || (peek() != '"' && peek() != '\'')) fail("expected a quoted attribute value");
        const char quote = peek();
        ++i_;
        std::string v;
        for (;;) {
            if (at_end()) fail("unterminated attribute value");
            const char c = peek();
            if (c == quote) break;
            if (c == '<') fail("'<' inside an attribute value");
            if (c == '&') entity(v);
            else {
                v += c;
                ++i_;
            }
        }
        ++i_;
        return v;
    }

    XmlElement element() {
        XmlElement e;
        e.offset = i_;
        expect("<");
        e.name = name();
        for (;;) {
            const std::size_t before = i_;
            skip_space();
            if (at_end()) fail("unterminated start tag");
            if (starts("/>")) {
                i_ += 2;
                return e;
            }
            if (peek() == '>') {
                ++i_;
                break;
            }
            if (i_ == before) fail("expected whitespace before an attribute");
            std::string key = name();
            skip_space();
            expect("=");
            skip_space();
            if (e.attribute(key)) fail("duplicate attribute '" + key + "'");
            e.attributes.emplace_back(std::move(key), attribute_value());
        }
        // Content.
        for (;;) {
            if (at_end()) fail("missing end tag for <" + e.name + ">");
            if (starts("</")) {
                i_ += 2;
                const std::string closing = name();
                if (closing != e.name) fail("end tag </" + closing + "> does not match <" + e.name + ">");
                skip_space();
                expect(">");
                return e;
            }
            if (starts("<!--")) {
                skip_until("-->", "comment");
            } else if (starts("<![CDATA[")) {
                i_ += 9;
                const auto end = s_.find("]]>", i_);
                if (end == std::string_view::npos) {
                    i_ = s_.size();
                    fail("unterminated CDATA section");
                }
                e.text.append(s_.substr(i_, end - i_));
                i_ = end + 3;
            } else if (starts("<?")) {
                skip_until("?>", "processing instruction");
            } else if (peek() == '<') {
                e.children.push_back(element());
            } else if (peek() == '&') {
                entity(e.text);
            } else {
                e.text += peek();
                ++i_;
            }
        }
    }
};

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string coord(double v) {
    if (v == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double to_number(const std::string& text, const XmlElement& where, const char* what) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0' || !std::isfinite(v))
        throw XmlParseError(std::string("invalid number for ") + what + " '" + t + "'", where.offset);
    return v;
}

std::vector<RsmlPoint> to_mm(const std::vector<Point>& px, double mm) {
    std::vector<RsmlPoint> out;
    out.reserve(px.size());
    for (const auto& p : px) out.push_back({p.x * mm, p.y * mm});
    return out;
}

void write_root(std::string& out, const RsmlRoot& r, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    out += pad + "<root id=\"" + escape(r.id) + "\" label=\"" + escape(r.label) + "\">\n";
    out += pad + "  <geometry>\n" + pad + "    <polyline>\n";
    for (const auto& p : r.polyline) out += pad + "      <point x=\"" + coord(p.x) + "\" y=\"" + coord(p.y) + "\"/>\n";
    out += pad + "    </polyline>\n" + pad + "  </geometry>\n";
    if (!r.annotations.empty()) {
        out += pad + "  <annotations>\n";
        for (const auto& [k, v] : r.annotations)
            out += pad + "    <annotation name=\"" + escape(k) + "\"><value>" + escape(v) + "</value></annotation>\n";
        out += pad + "  </annotations>\n";
    }
    for (const auto& c : r.children) write_root(out, c, indent + 2);
    out += pad + "</root>\n";
}

RsmlRoot read_root(const XmlElement& e, double scale) {
    RsmlRoot r;
    if (const auto* id = e.attribute("id")) r.id = *id;
    if (const auto* label = e.attribute("label")) r.label = *label;
    const XmlElement* geometry = e.child("geometry");
    const XmlElement* polyline = geometry ? geometry->child("polyline") : nullptr;
    if (!polyline) throw ValidationError("root '" + r.id + "' has no geometry (byte " + std::to_string(e.offset) + ")");
    for (const auto& p : polyline->children) {
        if (p.name != "point") continue;
        const std::string* ax = p.attribute("x");
        const std::string* ay = p.attribute("y");
        const XmlElement* ex = p.child("x");
        const XmlElement* ey = p.child("y");
        if (!(ax || ex) || !(ay || ey)) throw XmlParseError("point without x and y", p.offset);
        const double x = to_number(ax ? *ax : ex->text, p, "x");
        const double y = to_number(ay ? *ay : ey->text, p, "y");
        r.polyline.push_back({x * scale, y * scale});
    }
    if (r.polyline.size() < 2)
        throw ValidationError("root '" + r.id + "' polyline has fewer than 2 points (byte " + std::to_string(e.offset) + ")");
    if (const auto* ann = e.child("annotations")) {
        for (const auto& a : ann->children) {
            if (a.name != "annotation") continue;
            const auto* key = a.attribute("name");
            if (!key) continue;
            const auto* value = a.child("value");
            r.annotations[*key] = trim(value ? value->text : a.text);
        }
    }
    for (const auto& c : e.children)
        if (c.name == "root") r.children.push_back(read_root(c, scale));
    return r;
}

}  // namespace

XmlElement parse_xml(std::string_view text) { return XmlReader(text).document(); }

double RsmlRoot::length_mm() const {
    double s = 0.0;
    for (std::size_t i = 1; i < polyline.size(); ++i)
        s += std::hypot(polyline[i].x - polyline[i - 1].x, polyline[i].y - polyline[i - 1].y);
    return s;
}

RsmlPlant rsml_plant_from_graph(const RootGraph& graph, const std::string& plant_id, std::span<const int> lateral_ids) {
    if (!graph.classified) throw ValidationError("graph of plant '" + plant_id + "' is not classified");
    if (graph.edges.empty()) throw ValidationError("graph of plant '" + plant_id + "' is empty");
    const double mm = graph.mm_per_pixel;

    RsmlPlant plant;
    plant.id = plant_id;
    plant.label = plant_id;
    RsmlRoot main;
    main.id = plant_id + "-main";
    main.label = "main root";
    main.polyline = to_mm(graph.main_polyline(), mm);
    if (main.polyline.size() < 2) throw ValidationError("main root of plant '" + plant_id + "' is a single point");
    main.annotations["length_mm"] = coord(main.length_mm());

    const auto laterals = lateral_roots(graph);
    for (std::size_t k = 0; k < laterals.size(); ++k) {
        const auto& lr = laterals[k];
        if (lr.polyline.size() < 2) continue;
        const int id = k < lateral_ids.size() ? lateral_ids[k] : static_cast<int>(k) + 1;
        RsmlRoot child;
        child.id = plant_id + "-lr" + std::to_string(id);
        child.label = "lateral root";
        child.polyline = to_mm(lr.polyline, mm);
        child.annotations["length_mm"] = coord(lr.length_mm);
        main.children.push_back(std::move(child));
    }
    plant.roots.push_back(std::move(main));
    return plant;
}

RsmlDocument rsml_from_graph(const RootGraph& graph, const std::string& plant_id, double time_hours) {
    RsmlDocument doc;
    doc.metadata.resolution_mm_per_px = graph.mm_per_pixel;
    doc.metadata.time_hours = time_hours;
    doc.plants.push_back(rsml_plant_from_graph(graph, plant_id));
    return doc;
}

std::string write_rsml(const RsmlDocument& doc) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<rsml>\n  <metadata>\n";
    const auto& m = doc.metadata;
    out += "    <version>" + escape(m.version) + "</version>\n";
    out += "    <unit>" + escape(m.unit) + "</unit>\n";
    out += "    <resolution>" + coord(m.resolution_mm_per_px) + "</resolution>\n";
    out += "    <software>" + escape(m.software) + "</software>\n";
    out += "    <time-hours>" + coord(m.time_hours) + "</time-hours>\n";
    out += "  </metadata>\n  <scene>\n";
    for (const auto& p : doc.plants) {
        out += "    <plant id=\"" + escape(p.id) + "\" label=\"" + escape(p.label) + "\">\n";
        for (const auto& r : p.roots) write_root(out, r, 6);
        out += "    </plant>\n";
    }
    out += "  </scene>\n</rsml>\n";
    return out;
}

RsmlDocument parse_rsml(std::string_view text) {
    const XmlElement root = parse_xml(text);
    if (root.name != "rsml") throw XmlParseError("root element is <" + root.name + ">, not <rsml>", root.offset);

    RsmlDocument doc;
    double scale = 1.0;
    bool have_resolution = false;
    if (const auto* meta = root.child("metadata")) {
        if (const auto* v = meta->child("version")) doc.metadata.version = trim(v->text);
        if (const auto* v = meta->child("unit")) doc.metadata.unit = trim(v->text);
        if (const auto* v = meta->child("resolution")) {
            doc.metadata.resolution_mm_per_px = to_number(v->text, *v, "resolution");
            have_resolution = true;
        }
        if (const auto* v = meta->child("software")) doc.metadata.software = trim(v->text);
        if (const auto* v = meta->child("time-hours")) doc.metadata.time_hours = to_number(v->text, *v, "time-hours");
    }
    const std::string unit = doc.metadata.unit;
    if (unit == "mm" || unit == "millimeter" || unit == "millimetre") {
        scale = 1.0;
    } else if (unit == "cm") {
        scale = 10.0;
    } else if (unit == "um" || unit == "micrometer" || unit == "micron") {
        scale = 1e-3;
    } else if (unit == "m") {
        scale = 1e3;
    } else if (unit == "px" || unit == "pixel" || unit == "pixels") {
        if (!have_resolution || !(doc.metadata.resolution_mm_per_px > 0.0))
            throw ValidationError("pixel coordinates need a positive resolution");
        scale = doc.metadata.resolution_mm_per_px;
    } else {
        throw ValidationError("unsupported unit '" + unit + "'");
    }
    doc.metadata.unit = "mm";

    const XmlElement* scene = root.child("scene");
    if (!scene) throw ValidationError("document has no scene");
    for (const auto& p : scene->children) {
        if (p.name != "plant") continue;
        RsmlPlant plant;
        if (const auto* id = p.attribute("id")) plant.id = *id;
        if (const auto* label = p.attribute("label")) plant.label = *label;
        for (const auto& r : p.children)
            if (r.name == "root") plant.roots.push_back(read_root(r, scale));
        doc.plants.push_back(std::move(plant));
    }
    return doc;
}

}  // namespace rootpipe

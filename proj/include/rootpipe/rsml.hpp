#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rootpipe/common.hpp"
#include "rootpipe/root_graph.hpp"

namespace rootpipe {

/// Malformed input; `offset` is the byte position where parsing stopped.
class XmlParseError : public Error {
public:
    XmlParseError(const std::string& what, std::size_t offset);
    [[nodiscard]] std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

struct XmlElement {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<XmlElement> children;
    std::string text;  // concatenated character data, entities decoded
    std::size_t offset = 0;

    [[nodiscard]] const std::string* attribute(std::string_view key) const;
    [[nodiscard]] const XmlElement* child(std::string_view child_name) const;
};

/// Minimal XML 1.0 reader: elements, attributes, character data, the five
/// predefined entities, numeric character references, comments, CDATA,
/// processing instructions and a DOCTYPE without an internal subset.
XmlElement parse_xml(std::string_view text);

struct RsmlPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const RsmlPoint&, const RsmlPoint&) = default;
};

struct RsmlRoot {
    std::string id;
    std::string label;
    std::vector<RsmlPoint> polyline;  // mm
    std::map<std::string, std::string> annotations;
    std::vector<RsmlRoot> children;

    [[nodiscard]] double length_mm() const;
};

struct RsmlPlant {
    std::string id;
    std::string label;
    std::vector<RsmlRoot> roots;
};

struct RsmlMetadata {
    std::string version = "1.0";
    std::string unit = "mm";
    double resolution_mm_per_px = 0.0;
    double time_hours = 0.0;
    std::string software = "rootpipe";
};

struct RsmlDocument {
    RsmlMetadata metadata;
    std::vector<RsmlPlant> plants;
};

/// Main root of a classified graph with its laterals nested one level below.
/// Coordinates are converted to mm with the origin at the graph's top-left.
/// `lateral_ids` (optional) names laterals in lateral_roots() order.
/// Throws ValidationError for unclassified or empty graphs.
RsmlPlant rsml_plant_from_graph(const RootGraph& graph, const std::string& plant_id,
                                std::span<const int> lateral_ids = {});

RsmlDocument rsml_from_graph(const RootGraph& graph, const std::string& plant_id, double time_hours);

std::string write_rsml(const RsmlDocument& doc);

/// Reads the subset written by write_rsml. Unknown elements are skipped.
/// Pixel or other length units are converted to mm. Throws XmlParseError on
/// malformed XML and ValidationError on missing geometry or an unusable unit.
RsmlDocument parse_rsml(std::string_view text);

}  // namespace rootpipe

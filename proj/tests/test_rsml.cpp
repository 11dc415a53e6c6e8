#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "rootpipe/rsml.hpp"
#include "rootpipe/skeleton.hpp"

using namespace rootpipe;
using namespace rootpipe::test;

namespace {

RootGraph classified(const BinaryGrid& g, double mm = 0.04) {
    return classify_main(build_graph(thin(g), std::nullopt, mm), std::nullopt);
}

void check_same(const RsmlRoot& a, const RsmlRoot& b) {
    CHECK(a.id == b.id);
    CHECK(a.label == b.label);
    CHECK(a.annotations == b.annotations);
    REQUIRE(a.polyline.size() == b.polyline.size());
    for (std::size_t i = 0; i < a.polyline.size(); ++i) {
        CHECK(std::abs(a.polyline[i].x - b.polyline[i].x) <= 1e-6);
        CHECK(std::abs(a.polyline[i].y - b.polyline[i].y) <= 1e-6);
    }
    REQUIRE(a.children.size() == b.children.size());
    for (std::size_t i = 0; i < a.children.size(); ++i) check_same(a.children[i], b.children[i]);
}

}  // namespace

TEST_CASE("xml reader basics") {
    const auto e = parse_xml(
        "<?xml version=\"1.0\"?>\n<!-- c --><a x='1' y=\"&lt;2&gt;\"><b/>t&amp;u<![CDATA[<raw>]]>&#65;&#x42;</a>");
    CHECK(e.name == "a");
    CHECK(*e.attribute("y") == "<2>");
    CHECK(e.children.size() == 1);
    CHECK(e.text == "t&u<raw>AB");
    CHECK_THROWS_AS(parse_xml("<a><b></a>"), XmlParseError);
    CHECK_THROWS_AS(parse_xml("<a x=1/>"), XmlParseError);
    CHECK_THROWS_AS(parse_xml("<a/><b/>"), XmlParseError);
    CHECK_THROWS_AS(parse_xml("<a>&bogus;</a>"), XmlParseError);
}

TEST_CASE("truncated input reports a byte offset") {
    const std::string text = "<rsml><scene><plant id=\"p\"><root";
    try {
        parse_rsml(text);
        FAIL("expected a parse error");
    } catch (const XmlParseError& e) {
        CHECK(e.offset() == text.size());
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}

TEST_CASE("straight main root has no children") {
    BinaryGrid g(20, 60);
    draw_line(g, {10, 0}, {10, 50});
    const auto doc = rsml_from_graph(classified(g), "p1", 12.0);
    REQUIRE(doc.plants.size() == 1);
    REQUIRE(doc.plants[0].roots.size() == 1);
    CHECK(doc.plants[0].roots[0].children.empty());
    CHECK(doc.plants[0].roots[0].length_mm() == doctest::Approx(2.0));
}

TEST_CASE("main root with two laterals nests them") {
    BinaryGrid g(100, 110);
    draw_line(g, {50, 0}, {50, 100});
    draw_line(g, {51, 30}, {80, 30});
    draw_line(g, {49, 60}, {20, 60});
    const auto doc = rsml_from_graph(classified(g), "p1", 0.0);
    const auto& main = doc.plants[0].roots[0];
    CHECK(main.children.size() == 2);
    for (const auto& c : main.children) CHECK(c.children.empty());
    CHECK(main.polyline.front() == RsmlPoint{50 * 0.04, 0.0});
}

TEST_CASE("empty or unclassified graphs are rejected") {
    BinaryGrid g(20, 20);
    draw_line(g, {5, 0}, {5, 10});
    const auto raw = build_graph(thin(g), std::nullopt, 0.04);
    CHECK_THROWS_AS(rsml_from_graph(raw, "p", 0.0), ValidationError);
    RootGraph empty;
    empty.classified = true;
    CHECK_THROWS_AS(rsml_from_graph(empty, "p", 0.0), ValidationError);
}

TEST_CASE("hand-written minimal document") {
    const char* text = R"(<rsml><metadata><unit>mm</unit></metadata><scene><plant id="a">
        <root id="r"><geometry><polyline><point x="0" y="0"/><point x="3" y="4"/></polyline></geometry>
        <functions><function name="diameter"/></functions></root></plant></scene></rsml>)";
    const auto doc = parse_rsml(text);
    CHECK(doc.plants[0].roots[0].length_mm() == doctest::Approx(5.0));

    const char* pixels = R"(<rsml><metadata><unit>pixel</unit><resolution>0.5</resolution></metadata>
        <scene><plant><root><geometry><polyline><point><x>2</x><y>0</y></point><point x="2" y="8"/></polyline>
        </geometry></root></plant></scene></rsml>)";
    CHECK(parse_rsml(pixels).plants[0].roots[0].length_mm() == doctest::Approx(4.0));

    const char* no_res = R"(<rsml><metadata><unit>pixel</unit></metadata><scene/></rsml>)";
    CHECK_THROWS_AS(parse_rsml(no_res), ValidationError);
    const char* no_geom = R"(<rsml><scene><plant><root id="x"/></plant></scene></rsml>)";
    CHECK_THROWS_AS(parse_rsml(no_geom), ValidationError);
}

TEST_CASE("round trip on random plants") {
    std::mt19937 rng(123);
    std::size_t laterals = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto graph = classified(random_root_grid(rng), 0.0375);
        auto doc = rsml_from_graph(graph, "plant_" + std::to_string(trial), trial * 0.25);
        const auto text = write_rsml(doc);
        const auto back = parse_rsml(text);
        CHECK(back.metadata.unit == "mm");
        CHECK(back.metadata.version == doc.metadata.version);
        CHECK(back.metadata.software == doc.metadata.software);
        CHECK(back.metadata.resolution_mm_per_px == doctest::Approx(0.0375));
        CHECK(back.metadata.time_hours == doctest::Approx(trial * 0.25));
        REQUIRE(back.plants.size() == 1);
        CHECK(back.plants[0].id == doc.plants[0].id);
        REQUIRE(back.plants[0].roots.size() == 1);
        check_same(back.plants[0].roots[0], doc.plants[0].roots[0]);
        CHECK(write_rsml(back) == text);
        laterals += doc.plants[0].roots[0].children.size();
    }
    CHECK(laterals >= 30);
}

#include <doctest.h>

#include <regex>

#include "navkit/generators.hpp"
#include "navkit/viz.hpp"

using namespace navkit;

namespace {

/// Tag stack check: every opened element closes in order, one root.
bool well_formed(const std::string& svg) {
    std::vector<std::string> stack;
    int roots = 0;
    std::size_t k = 0;
    while ((k = svg.find('<', k)) != std::string::npos) {
        const std::size_t end = svg.find('>', k);
        if (end == std::string::npos) return false;
        const std::string tag = svg.substr(k + 1, end - k - 1);
        k = end + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;
        if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
        if (tag[0] == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        const std::string name = tag.substr(0, tag.find_first_of(" \n/"));
        if (stack.empty()) ++roots;
        if (tag.back() != '/') stack.push_back(name);
    }
    return stack.empty() && roots == 1;
}

bool has_group(const std::string& svg, const std::string& id) { return svg.find("<g id=\"" + id + "\"") != std::string::npos; }

}  // namespace

TEST_CASE("scene renders as well-formed svg") {
    for (const Scene& s : {gen_urban_block(1), gen_apartment(1)}) {
        const std::string svg = viz_svg(s);
        CHECK(well_formed(svg));
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(has_group(svg, "cells"));
        CHECK(has_group(svg, "graph"));
        CHECK_FALSE(has_group(svg, "traces"));
        CHECK_FALSE(has_group(svg, "plans"));
        CHECK_FALSE(has_group(svg, "gt_paths"));
        CHECK(svg.find("nan") == std::string::npos);
    }
}

TEST_CASE("overlay groups appear only when supplied") {
    const Scene s = gen_apartment(2);
    const Polyline2 line = {s.graph.nodes[0].position, s.graph.nodes[1].position, s.graph.nodes[2].position};
    VizLayers traces;
    traces.traces = {line};
    const std::string a = viz_svg(s, traces);
    CHECK(well_formed(a));
    CHECK(has_group(a, "traces"));
    CHECK_FALSE(has_group(a, "plans"));

    VizLayers all;
    all.gt_paths = {line};
    all.traces = {line, line};
    all.plans = {line};
    const std::string b = viz_svg(s, all);
    CHECK(well_formed(b));
    CHECK(has_group(b, "gt_paths"));
    CHECK(has_group(b, "plans"));
    CHECK(b.find("<g id=\"gt_paths\"") < b.find("<g id=\"traces\""));
    CHECK(b.find("<g id=\"traces\"") < b.find("<g id=\"plans\""));
}

TEST_CASE("rendering is byte-identical for identical inputs") {
    const Scene s = gen_urban_block(4);
    VizLayers l;
    l.plans = {{{1.0, 2.0}, {3.5, 4.25}}};
    CHECK(viz_svg(s, l) == viz_svg(gen_urban_block(4), l));
    CHECK(viz_svg(s) != viz_svg(gen_urban_block(5)));
}

TEST_CASE("every semantic class has a colour") {
    const std::regex hex("#[0-9a-fA-F]{6}");
    for (int k = 0; k < kSemanticClassCount; ++k) {
        CHECK(std::regex_match(std::string(class_color(static_cast<SemanticClass>(k))), hex));
    }
}

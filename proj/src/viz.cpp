#include "navkit/viz.hpp"

#include <cstdio>
#include <sstream>

namespace navkit {

const char* class_color(SemanticClass c) {
    switch (c) {
        case SemanticClass::Sidewalk: return "#c8c8c8";
        case SemanticClass::Crosswalk: return "#f2f2f2";
        case SemanticClass::VehicleRoad: return "#505050";
        case SemanticClass::Lawn: return "#7fbf5f";
        case SemanticClass::Obstacle: return "#2b2b2b";
        case SemanticClass::IndoorFloor: return "#e8dcc4";
        case SemanticClass::Door: return "#b07a3c";
        case SemanticClass::Furniture: return "#6b4a2b";
        case SemanticClass::Unknown: return "#000000";
    }
    return "#ff00ff";
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    return s;
}

class Canvas {
public:
    explicit Canvas(const OccupancyGrid& g) : g_(g) {}

    double px(double x) const { return (x - g_.origin().x) * kVizScale; }
    double py(double y) const { return (g_.origin().y + g_.height() * g_.resolution() - y) * kVizScale; }
    double width() const { return g_.width() * g_.resolution() * kVizScale; }
    double height() const { return g_.height() * g_.resolution() * kVizScale; }

    std::string points(const Polyline2& pts) const {
        std::string out;
        for (const auto& p : pts) out += (out.empty() ? "" : " ") + num(px(p.x)) + "," + num(py(p.y));
        return out;
    }

private:
    const OccupancyGrid& g_;
};

void polyline_group(std::ostringstream& out, const Canvas& cv, const char* id, const std::vector<Polyline2>& lines,
                    const char* color, double width) {
    if (lines.empty()) return;
    out << "<g id=\"" << id << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width) << "\">\n";
    for (const auto& l : lines) {
        if (l.empty()) continue;
        out << "<polyline points=\"" << cv.points(l) << "\"/>\n";
    }
    out << "</g>\n";
}

}  // namespace

std::string viz_svg(const Scene& scene, const VizLayers& layers) {
    const auto& g = scene.grid;
    const Canvas cv(g);
    const double cell = g.resolution() * kVizScale;
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(cv.width()) << "\" height=\"" << num(cv.height())
        << "\" viewBox=\"0 0 " << num(cv.width()) << " " << num(cv.height()) << "\">\n";
    out << "<title>" << scene.id << "</title>\n";

    out << "<g id=\"cells\" shape-rendering=\"crispEdges\">\n";
    for (int j = 0; j < g.height(); ++j) {
        int i = 0;
        while (i < g.width()) {
            const SemanticClass c = g.at({i, j});
            int run = 1;
            while (i + run < g.width() && g.at({i + run, j}) == c) ++run;
            const double x0 = g.origin().x + i * g.resolution();
            const double y1 = g.origin().y + (j + 1) * g.resolution();
            out << "<rect x=\"" << num(cv.px(x0)) << "\" y=\"" << num(cv.py(y1)) << "\" width=\"" << num(run * cell)
                << "\" height=\"" << num(cell) << "\" fill=\"" << class_color(c) << "\"/>\n";
            i += run;
        }
    }
    out << "</g>\n";

    out << "<g id=\"graph\" stroke=\"#3060c0\" stroke-width=\"1.5\" fill=\"#3060c0\">\n";
    for (const auto& e : scene.graph.edges) {
        const GraphNode* a = scene.graph.find(e.u);
        const GraphNode* b = scene.graph.find(e.v);
        if (!a || !b) continue;
        out << "<line x1=\"" << num(cv.px(a->position.x)) << "\" y1=\"" << num(cv.py(a->position.y)) << "\" x2=\""
            << num(cv.px(b->position.x)) << "\" y2=\"" << num(cv.py(b->position.y)) << "\""
            << (e.traversable ? "" : " stroke-dasharray=\"4 3\"") << "/>\n";
    }
    for (const auto& n : scene.graph.nodes) {
        out << "<circle cx=\"" << num(cv.px(n.position.x)) << "\" cy=\"" << num(cv.py(n.position.y)) << "\" r=\"3.000\"/>\n";
    }
    out << "</g>\n";

    polyline_group(out, cv, "gt_paths", layers.gt_paths, "#20a020", 2.0);
    polyline_group(out, cv, "traces", layers.traces, "#d02020", 2.0);
    polyline_group(out, cv, "plans", layers.plans, "#9040c0", 1.0);
    out << "</svg>\n";
    return out.str();
}

}  // namespace navkit

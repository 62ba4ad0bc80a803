#pragma once

// Minimal SVG dump of a run: true objects, walls, the driven trajectory,
// and the final map estimate.  Good enough to eyeball a run in a browser.

#include <fstream>
#include <string>
#include <vector>

#include "lgx/geometry.hpp"
#include "lgx/semantic_graph.hpp"
#include "lgx/simworld.hpp"

namespace lgx {

inline void write_svg(const std::string& path, const Scenario& scenario,
                      const std::vector<Pose2>& trajectory, const SemanticGraph& map,
                      double scale = 40.0) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write svg: " + path);
    double w = scenario.width * scale, h = scenario.height * scale;
    auto X = [&](double x) { return x * scale; };
    auto Y = [&](double y) { return h - y * scale; };  // y up

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "' viewBox='0 0 " << w << " " << h << "'>\n";
    out << "<rect width='" << w << "' height='" << h
        << "' fill='#fafaf5' stroke='#444'/>\n";

    for (const auto& wall : scenario.walls)
        out << "<rect x='" << X(wall.x0) << "' y='" << Y(wall.y1) << "' width='"
            << (wall.x1 - wall.x0) * scale << "' height='" << (wall.y1 - wall.y0) * scale
            << "' fill='#999'/>\n";

    for (const auto& o : scenario.objects) {
        std::string fill = o.color.empty() ? std::string("#bbb") : o.color;
        out << "<circle cx='" << X(o.position.x) << "' cy='" << Y(o.position.y) << "' r='"
            << 0.12 * scale << "' fill='" << fill << "' stroke='#333'/>\n";
        out << "<text x='" << X(o.position.x) + 4 << "' y='" << Y(o.position.y) - 4
            << "' font-size='10' fill='#333'>" << o.name << "</text>\n";
    }

    if (!trajectory.empty()) {
        out << "<polyline fill='none' stroke='#1864ab' stroke-width='1.5' points='";
        for (const auto& p : trajectory) out << X(p.x) << "," << Y(p.y) << " ";
        out << "'/>\n";
        const Pose2& last = trajectory.back();
        out << "<circle cx='" << X(last.x) << "' cy='" << Y(last.y) << "' r='"
            << 0.15 * scale << "' fill='#1864ab'/>\n";
    }

    for (const auto& n : map.nodes) {
        if (n.kind != NodeKind::Object || n.state == NodeState::Removed) continue;
        const char* stroke = n.state == NodeState::Confirmed ? "#2b8a3e" : "#e8590c";
        double r = 0.1 * scale;
        out << "<g stroke='" << stroke << "' stroke-width='2'>";
        out << "<line x1='" << X(n.position.x) - r << "' y1='" << Y(n.position.y) - r
            << "' x2='" << X(n.position.x) + r << "' y2='" << Y(n.position.y) + r << "'/>";
        out << "<line x1='" << X(n.position.x) - r << "' y1='" << Y(n.position.y) + r
            << "' x2='" << X(n.position.x) + r << "' y2='" << Y(n.position.y) - r << "'/>";
        out << "</g>\n";
    }

    out << "</svg>\n";
}

}  // namespace lgx

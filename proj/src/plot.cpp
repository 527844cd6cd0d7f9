#include "dsmt/plot.hpp"

#include "dsmt/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <vector>

namespace dsmt {

namespace {

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string track_color(int track_id) {
    double hue = std::fmod(static_cast<double>(track_id) * 137.50776405, 360.0);
    if (hue < 0.0) hue += 360.0;
    char buf[48];
    std::snprintf(buf, sizeof buf, "hsl(%.1f,70%%,45%%)", hue);
    return buf;
}

} // namespace

std::string render_tracks_svg(std::span<const TrackedBox> boxes, const PlotExtent& e) {
    if (!(e.x_max > e.x_min && e.y_max > e.y_min && e.pixels_per_meter > 0.0)) {
        throw StructuralError("plot extent must be nonempty");
    }
    const double width = (e.y_max - e.y_min) * e.pixels_per_meter;
    const double height = (e.x_max - e.x_min) * e.pixels_per_meter;
    auto px = [&](const Box3D& b) { return (e.y_max - b.center_y) * e.pixels_per_meter; };
    auto py = [&](const Box3D& b) { return (e.x_max - b.center_x) * e.pixels_per_meter; };

    std::map<int, std::vector<const TrackedBox*>> tracks;
    for (const auto& b : boxes) {
        if (!b.dont_care) tracks[b.track_id].push_back(&b);
    }

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) +
           "\" viewBox=\"0 0 " + fixed(width) + " " + fixed(height) + "\">\n";
    out += "  <rect x=\"0\" y=\"0\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) +
           "\" fill=\"white\" stroke=\"black\"/>\n";
    const Box3D ego{};
    out += "  <circle cx=\"" + fixed(px(ego)) + "\" cy=\"" + fixed(py(ego)) + "\" r=\"4\" fill=\"black\"/>\n";
    for (auto& [id, list] : tracks) {
        std::stable_sort(list.begin(), list.end(),
                         [](const TrackedBox* a, const TrackedBox* b) { return a->frame_idx < b->frame_idx; });
        const std::string color = track_color(id);
        out += "  <g id=\"track-" + std::to_string(id) + "\" stroke=\"" + color + "\" fill=\"" + color + "\">\n";
        out += "    <polyline fill=\"none\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < list.size(); ++i) {
            out += (i ? " " : "") + fixed(px(list[i]->box3d)) + "," + fixed(py(list[i]->box3d));
        }
        out += "\"/>\n";
        for (const auto* b : list) {
            out += "    <circle cx=\"" + fixed(px(b->box3d)) + "\" cy=\"" + fixed(py(b->box3d)) + "\" r=\"1.5\"/>\n";
        }
        out += "  </g>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace dsmt

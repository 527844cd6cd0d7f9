#pragma once

#include "dsmt/core.hpp"

#include <span>
#include <string>

namespace dsmt {

struct PlotExtent {
    double x_min = 0.0, x_max = 40.0;   // forward, drawn bottom to top
    double y_min = -18.0, y_max = 18.0; // lateral, left drawn on the left
    double pixels_per_meter = 10.0;
};

// Bird's-eye SVG with one polyline (plus a dot per box) per track, colored
// by a fixed function of the track id. Byte-identical for identical input.
std::string render_tracks_svg(std::span<const TrackedBox> boxes, const PlotExtent& extent = {});

} // namespace dsmt

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

namespace hoidet {

/// Axis-aligned box in pixel coordinates, origin at top-left.
/// Coordinates are real-valued; area uses the half-open convention
/// area = (x2-x1)*(y2-y1).
struct BBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }

    bool valid() const { return x1 <= x2 && y1 <= y2; }

    bool operator==(const BBox&) const = default;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Integer cell coordinates on the output grid.
struct GridCell {
    int x = 0;
    int y = 0;

    bool operator==(const GridCell&) const = default;
};

/// Inclusive integer cell range on the output grid.
struct GridBox {
    int x1 = 0;
    int y1 = 0;
    int x2 = 0;
    int y2 = 0;

    int width() const { return x2 - x1 + 1; }
    int height() const { return y2 - y1 + 1; }
    bool contains(int x, int y) const { return x >= x1 && x <= x2 && y >= y1 && y <= y2; }

    bool operator==(const GridBox&) const = default;
};

/// Output-grid geometry for an input image downsampled by `stride`.
/// width = ceil(image_width / stride), likewise for height.
struct GridShape {
    int width = 0;
    int height = 0;
    int stride = 1;

    static GridShape from_image(int image_width, int image_height, int stride) {
        return {(image_width + stride - 1) / stride, (image_height + stride - 1) / stride, stride};
    }
};

/// Intersection over union. Returns 0 when the union area is 0.
inline double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    const double inter = std::max(0.0, iw) * std::max(0.0, ih);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

/// Box with the same center, width and height scaled by `ratio`.
inline BBox center_area(const BBox& box, double ratio) {
    const double cx = (box.x1 + box.x2) / 2.0;
    const double cy = (box.y1 + box.y2) / 2.0;
    const double hw = box.width() * ratio / 2.0;
    const double hh = box.height() * ratio / 2.0;
    return {cx - hw, cy - hh, cx + hw, cy + hh};
}

inline Point center_point(const BBox& box) {
    return {(box.x1 + box.x2) / 2.0, (box.y1 + box.y2) / 2.0};
}

/// Maps a pixel-space point to its output-grid cell: floor(coord / stride),
/// clamped into the grid.
inline GridCell to_grid(const Point& p, const GridShape& shape) {
    int gx = static_cast<int>(std::floor(p.x / shape.stride));
    int gy = static_cast<int>(std::floor(p.y / shape.stride));
    gx = std::clamp(gx, 0, shape.width - 1);
    gy = std::clamp(gy, 0, shape.height - 1);
    return {gx, gy};
}

/// Rasterizes a pixel-space box onto the output grid. The result always
/// covers at least one cell, so degenerate boxes still receive supervision.
inline GridBox box_to_grid(const BBox& box, const GridShape& shape) {
    const double d = shape.stride;
    int gx1 = static_cast<int>(std::floor(box.x1 / d));
    int gy1 = static_cast<int>(std::floor(box.y1 / d));
    int gx2 = std::max(gx1, static_cast<int>(std::ceil(box.x2 / d)) - 1);
    int gy2 = std::max(gy1, static_cast<int>(std::ceil(box.y2 / d)) - 1);
    gx1 = std::clamp(gx1, 0, shape.width - 1);
    gy1 = std::clamp(gy1, 0, shape.height - 1);
    gx2 = std::clamp(gx2, 0, shape.width - 1);
    gy2 = std::clamp(gy2, 0, shape.height - 1);
    return {gx1, gy1, gx2, gy2};
}

}  // namespace hoidet

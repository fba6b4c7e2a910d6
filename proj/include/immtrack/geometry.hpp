#pragma once

#include <Eigen/Dense>

namespace immtrack {

using Vec4 = Eigen::Vector4d;

/// Axis-aligned box, top-left corner + extent, in pixels.
struct BoundingBox {
    double x = 0.0;  // left edge
    double y = 0.0;  // top edge
    double w = 0.0;
    double h = 0.0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double area() const { return w * h; }
    bool valid() const { return w > 0.0 && h > 0.0; }

    bool operator==(const BoundingBox&) const = default;
};

/// One detector output row.
struct Detection {
    int frame = 0;  // 1-based
    BoundingBox box;
    double confidence = 0.0;
};

/// Intersection over union. Both boxes must have positive extent.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Box -> measurement vector [cx, cy, w, h].
Vec4 box_to_measurement(const BoundingBox& b);

/// Inverse of box_to_measurement.
BoundingBox measurement_to_box(const Vec4& z);

/// Filter predictions can overshoot into non-positive extents; association
/// geometry requires at least this many pixels.
inline constexpr double kMinBoxExtent = 1.0;

/// Returns b with w and h floored at kMinBoxExtent.
BoundingBox clamp_extent(const BoundingBox& b);

}  // namespace immtrack

#include "immtrack/geometry.hpp"

#include <algorithm>

namespace immtrack {

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

Vec4 box_to_measurement(const BoundingBox& b) {
    return Vec4(b.cx(), b.cy(), b.w, b.h);
}

BoundingBox measurement_to_box(const Vec4& z) {
    return BoundingBox{z(0) - z(2) / 2.0, z(1) - z(3) / 2.0, z(2), z(3)};
}

BoundingBox clamp_extent(const BoundingBox& b) {
    BoundingBox out = b;
    if (out.w < kMinBoxExtent) {
        out.x = b.cx() - kMinBoxExtent / 2.0;
        out.w = kMinBoxExtent;
    }
    if (out.h < kMinBoxExtent) {
        out.y = b.cy() - kMinBoxExtent / 2.0;
        out.h = kMinBoxExtent;
    }
    return out;
}

}  // namespace immtrack

#pragma once

#include <cstddef>
#include <vector>

namespace convtrack {

// Row-major single-channel image, values nominally in [0, 1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h) : width(w), height(h), data(std::size_t(w) * std::size_t(h), 0.0) {}

    double& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    double at(int x, int y) const { return data[std::size_t(y) * width + x]; }
};

struct RgbImage {
    GrayImage r, g, b;

    int width() const { return r.width; }
    int height() const { return r.height; }
};

// Axis-aligned box: top-left corner plus size, continuous coordinates.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
};

// Square patch of side `side`, row-major.
struct Patch {
    int side = 0;
    std::vector<double> values;

    Patch() = default;
    explicit Patch(int s) : side(s), values(std::size_t(s) * std::size_t(s), 0.0) {}

    double& at(int x, int y) { return values[std::size_t(y) * side + x]; }
    double at(int x, int y) const { return values[std::size_t(y) * side + x]; }
};

// ITU-R BT.601 luma. Arranged so equal channels pass through exactly:
// gray = b + 0.299*(r-b) + 0.587*(g-b).
GrayImage to_gray(const RgbImage& img);

// Resample the (possibly fractional, possibly out-of-frame) box to a fixed
// n x n grid with bilinear interpolation; source reads are edge-clamped.
GrayImage warp_region(const GrayImage& img, const BoundingBox& box, int n);

// Same, into a caller-owned buffer (resized as needed); lets the particle
// scoring loop run without allocations.
void warp_region_into(const GrayImage& img, const BoundingBox& box, int n, GrayImage& out);

// All overlapping w x w windows of `img` in raster order (left-to-right, then
// top-to-bottom, by top-left corner). Values are raw; normalization is a
// separate explicit step because feature maps correlate raw windows while the
// filter dictionary is built from normalized ones.
std::vector<Patch> extract_patches(const GrayImage& img, int w);

// Subtract the mean, then scale to unit L2 norm. A patch whose centered norm
// falls below 1e-12 (numerically constant) becomes all zeros.
void normalize_patch(Patch& p);

} // namespace convtrack

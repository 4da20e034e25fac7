#include "convtrack/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace convtrack {

GrayImage to_gray(const RgbImage& img) {
    if (img.g.width != img.r.width || img.g.height != img.r.height ||
        img.b.width != img.r.width || img.b.height != img.r.height) {
        throw std::invalid_argument("to_gray: channel dimensions differ");
    }
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double r = img.r.data[i];
        const double g = img.g.data[i];
        const double b = img.b.data[i];
        // equivalent to 0.299r + 0.587g + 0.114b but exact when r == g == b
        out.data[i] = b + 0.299 * (r - b) + 0.587 * (g - b);
    }
    return out;
}

namespace {

inline double sample_clamped(const GrayImage& img, int x, int y) {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    return img.at(x, y);
}

// bilinear read at continuous coords; (0,0) is the center of pixel (0,0)
inline double bilinear(const GrayImage& img, double gx, double gy) {
    const double fx = std::floor(gx);
    const double fy = std::floor(gy);
    const int x0 = int(fx);
    const int y0 = int(fy);
    const double ax = gx - fx;
    const double ay = gy - fy;
    const double v00 = sample_clamped(img, x0, y0);
    const double v10 = sample_clamped(img, x0 + 1, y0);
    const double v01 = sample_clamped(img, x0, y0 + 1);
    const double v11 = sample_clamped(img, x0 + 1, y0 + 1);
    const double top = v00 + ax * (v10 - v00);
    const double bot = v01 + ax * (v11 - v01);
    return top + ay * (bot - top);
}

} // namespace

void warp_region_into(const GrayImage& img, const BoundingBox& box, int n, GrayImage& out) {
    if (n < 2) {
        throw std::invalid_argument("warp_region: output side must be at least 2");
    }
    if (!(box.w > 0.0) || !(box.h > 0.0)) {
        throw std::invalid_argument("warp_region: box must have positive size");
    }
    out.width = n;
    out.height = n;
    out.data.resize(std::size_t(n) * n);
    // Cell c of the output samples the source at the center of the c-th of n
    // equal slices of the box. Integer-sized native crops hit pixel centers
    // exactly, so a same-size warp is a bit-exact copy.
    for (int row = 0; row < n; ++row) {
        const double gy = box.y + (row + 0.5) * box.h / n - 0.5;
        for (int col = 0; col < n; ++col) {
            const double gx = box.x + (col + 0.5) * box.w / n - 0.5;
            out.at(col, row) = bilinear(img, gx, gy);
        }
    }
}

GrayImage warp_region(const GrayImage& img, const BoundingBox& box, int n) {
    GrayImage out;
    warp_region_into(img, box, n, out);
    return out;
}

void normalize_patch(Patch& p) {
    double mean = 0.0;
    for (double v : p.values) {
        mean += v;
    }
    mean /= double(p.values.size());
    double norm2 = 0.0;
    for (double& v : p.values) {
        v -= mean;
        norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    if (norm < 1e-12) {
        std::fill(p.values.begin(), p.values.end(), 0.0);
        return;
    }
    for (double& v : p.values) {
        v /= norm;
    }
}

std::vector<Patch> extract_patches(const GrayImage& img, int w) {
    if (w < 1) {
        throw std::invalid_argument("extract_patches: window must be positive");
    }
    const int nx = img.width - w + 1;
    const int ny = img.height - w + 1;
    if (nx <= 0 || ny <= 0) {
        throw std::invalid_argument("extract_patches: window larger than the image");
    }
    std::vector<Patch> out;
    out.reserve(std::size_t(nx) * std::size_t(ny));
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            Patch p(w);
            for (int py = 0; py < w; ++py) {
                for (int px = 0; px < w; ++px) {
                    p.at(px, py) = img.at(x + px, y + py);
                }
            }
            out.push_back(std::move(p));
        }
    }
    return out;
}

} // namespace convtrack

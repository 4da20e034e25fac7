#include "convtrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <tuple>

#include "convtrack/dataio.hpp"

namespace convtrack {

namespace {

void check_box(const BoundingBox& b, const char* who) {
    if (!(b.w > 0.0) || !(b.h > 0.0)) {
        throw std::invalid_argument(std::string(who) + ": degenerate box");
    }
}

} // namespace

double overlap_ratio(const BoundingBox& bt, const BoundingBox& bg) {
    check_box(bt, "overlap_ratio");
    check_box(bg, "overlap_ratio");
    // evaluate in a canonical argument order: FMA contraction rounds the two
    // box areas differently, so without this f(a,b) could differ from f(b,a)
    // in the last bit
    const bool swap_args = std::tie(bg.x, bg.y, bg.w, bg.h) < std::tie(bt.x, bt.y, bt.w, bt.h);
    const BoundingBox& a = swap_args ? bg : bt;
    const BoundingBox& b = swap_args ? bt : bg;
    const double ix = std::max(a.x, b.x);
    const double iy = std::max(a.y, b.y);
    const double ix2 = std::min(a.x + a.w, b.x + b.w);
    const double iy2 = std::min(a.y + a.h, b.y + b.h);
    const double iw = std::max(0.0, ix2 - ix);
    const double ih = std::max(0.0, iy2 - iy);
    const double inter = iw * ih;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return inter / uni;
}

double center_error(const BoundingBox& bt, const BoundingBox& bg) {
    check_box(bt, "center_error");
    check_box(bg, "center_error");
    const double dx = bt.cx() - bg.cx();
    const double dy = bt.cy() - bg.cy();
    return std::sqrt(dx * dx + dy * dy);
}

EvalCurve success_curve(const std::vector<double>& overlaps, int samples) {
    if (overlaps.empty()) throw std::invalid_argument("success_curve: no overlaps");
    if (samples < 2) throw std::invalid_argument("success_curve: need at least 2 samples");
    EvalCurve curve;
    curve.thresholds.resize(samples);
    curve.values.resize(samples);
    double mean = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = double(i) / double(samples - 1);
        int passing = 0;
        for (double s : overlaps) {
            if (s > t) ++passing; // strictly above: a perfect run still scores 0 at t=1
        }
        curve.thresholds[i] = t;
        curve.values[i] = double(passing) / double(overlaps.size());
        mean += curve.values[i];
    }
    curve.summary = mean / double(samples);
    return curve;
}

EvalCurve precision_curve(const std::vector<double>& errors, int max_threshold) {
    if (errors.empty()) throw std::invalid_argument("precision_curve: no errors");
    if (max_threshold < 0) throw std::invalid_argument("precision_curve: negative threshold");
    EvalCurve curve;
    curve.thresholds.resize(max_threshold + 1);
    curve.values.resize(max_threshold + 1);
    for (int t = 0; t <= max_threshold; ++t) {
        int passing = 0;
        for (double e : errors) {
            if (e <= double(t)) ++passing;
        }
        curve.thresholds[t] = double(t);
        curve.values[t] = double(passing) / double(errors.size());
    }
    curve.summary = curve.values[std::min(20, max_threshold)];
    return curve;
}

void write_curve_csv(const EvalCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "threshold,value\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        out << format_double(curve.thresholds[i]) << ',' << format_double(curve.values[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace convtrack

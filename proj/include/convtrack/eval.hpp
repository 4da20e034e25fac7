#pragma once

#include <string>
#include <vector>

#include "convtrack/image.hpp"

namespace convtrack {

// Sampled metric curve plus its scalar summary (mean value for the success
// curve, value at the 20 px threshold for the precision curve).
struct EvalCurve {
    std::vector<double> thresholds;
    std::vector<double> values; // fraction of frames passing, in [0,1]
    double summary = 0.0;
};

// Intersection-over-union of two axis-aligned boxes.
double overlap_ratio(const BoundingBox& bt, const BoundingBox& bg);

// Euclidean distance between box centers, in pixels.
double center_error(const BoundingBox& bt, const BoundingBox& bg);

// thresholds = `samples` uniform points on [0,1]; value at t = fraction of
// overlaps STRICTLY above t (so even a perfect run scores 0 at t = 1);
// summary = mean of the sampled values.
EvalCurve success_curve(const std::vector<double>& overlaps, int samples = 101);

// thresholds = 0..max_threshold in 1 px steps; value at t = fraction of
// center errors <= t; summary = value at 20 px (or at max_threshold if that
// is smaller).
EvalCurve precision_curve(const std::vector<double>& errors, int max_threshold = 50);

// CSV with a "threshold,value" header row.
void write_curve_csv(const EvalCurve& curve, const std::string& path);

} // namespace convtrack

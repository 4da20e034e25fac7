#pragma once

#include <cstddef>
#include <vector>

#include "convtrack/image.hpp"

namespace convtrack {

struct FilterBank;

// Valid-mode response map of one w x w filter slid over an n x n image;
// side = n - w + 1.
struct SimpleCellMap {
    int side = 0;
    std::vector<double> values; // row-major

    SimpleCellMap() = default;
    explicit SimpleCellMap(int s) : side(s), values(std::size_t(s) * std::size_t(s), 0.0) {}

    double& at(int x, int y) { return values[std::size_t(y) * side + x]; }
    double at(int x, int y) const { return values[std::size_t(y) * side + x]; }
};

// Flat stack of all response maps, map-major: map 0's raster scan first, then
// map 1's, and so on. dim() = map_side^2 * map_count.
struct ComplexCellRep {
    int map_side = 0;
    int map_count = 0;
    bool sparse = false; // set once a shrinkage/masking pass has run
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

// out(x,y) = sum_{u,v} filt(u,v) * img(x+u, y+v)  (sliding inner product,
// i.e. cross-correlation; the filter is not flipped).
SimpleCellMap convolve_valid(const GrayImage& img, const Patch& filt);

// Same contract as convolve_valid, computed in the frequency domain.
// Agreement with the direct path is within 1e-6 absolute.
SimpleCellMap convolve_valid_fast(const GrayImage& img, const Patch& filt);

// One map per filter pair, each the response of the difference filter
// (object_filter[i] - background_filter[i]); equivalent by linearity to the
// difference of the two separate response maps.
std::vector<SimpleCellMap> simple_maps(const GrayImage& img, const FilterBank& bank);

ComplexCellRep stack_complex(const std::vector<SimpleCellMap>& maps);

enum class MedianMode {
    absolute,     // lower median of |values| (default)
    signed_value, // lower median of raw values, clamped up to 0
};

// Adaptive shrinkage threshold; with MedianMode::absolute at least half of
// the entries fall at or below the returned value by construction.
double adaptive_lambda(const ComplexCellRep& rep, MedianMode mode = MedianMode::absolute);

// Element-wise sign(v) * max(0, |v| - lambda); the closed-form minimizer of
// lambda*|c|_1 + 1/2*|c - v|_2^2.
ComplexCellRep soft_shrink(const ComplexCellRep& rep, double lambda);

// Zero out every position where the template is zero; kept values are the raw
// candidate responses (masked, not shrunk).
ComplexCellRep candidate_rep(const ComplexCellRep& raw, const ComplexCellRep& templ);

// --- flat fast-path building blocks (tracker hot loop) -------------------
//
// These produce the same numbers as extract_patches / simple_maps /
// stack_complex but write into caller-owned flat buffers so the per-particle
// scoring loop does no allocation.

// All (n-w+1)^2 raw sliding windows as rows of an l x w^2 row-major matrix,
// raster order; row dot filter == convolve_valid at the same site.
void patch_rows(const GrayImage& img, int w, std::vector<double>& rows);

// Column j = object_filter[j] - background_filter[j], flattened in patch
// raster order; w^2 x d column-major (filter j contiguous at offset j*w^2).
std::vector<double> difference_filter_matrix(const FilterBank& bank);

// Full unshrunk representation of one image: patch_rows * difference filters,
// laid out in the stack_complex order.
ComplexCellRep complex_rep(const GrayImage& img, const FilterBank& bank);

} // namespace convtrack

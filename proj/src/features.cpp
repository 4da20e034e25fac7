#include "convtrack/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <fftw3.h>

#include "convtrack/filterbank.hpp"

namespace convtrack {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_conv_args(const GrayImage& img, const Patch& filt) {
    if (img.width != img.height || img.width < 1) {
        throw std::invalid_argument("convolve: image must be square and non-empty");
    }
    if (filt.side < 1 || filt.side > img.width) {
        throw std::invalid_argument("convolve: filter side must be in [1, image side]");
    }
}

void check_bank(const GrayImage& img, const FilterBank& bank) {
    if (bank.filter_count < 1 ||
        int(bank.object_filters.size()) != bank.filter_count ||
        int(bank.background_filters.size()) != bank.filter_count) {
        throw std::invalid_argument("filter bank is inconsistent");
    }
    for (const Patch& p : bank.object_filters) {
        if (p.side != bank.field_size) throw std::invalid_argument("object filter size mismatch");
    }
    for (const Patch& p : bank.background_filters) {
        if (p.side != bank.field_size) throw std::invalid_argument("background filter size mismatch");
    }
    if (bank.field_size > img.width || img.width != img.height) {
        throw std::invalid_argument("image too small for the filter bank");
    }
}

} // namespace

SimpleCellMap convolve_valid(const GrayImage& img, const Patch& filt) {
    check_conv_args(img, filt);
    const int w = filt.side;
    const int side = img.width - w + 1;
    SimpleCellMap out(side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            double sum = 0.0;
            for (int v = 0; v < w; ++v) {
                const double* irow = &img.data[std::size_t(y + v) * img.width + x];
                const double* frow = &filt.values[std::size_t(v) * w];
                for (int u = 0; u < w; ++u) {
                    sum += frow[u] * irow[u];
                }
            }
            out.at(x, y) = sum;
        }
    }
    return out;
}

namespace {

// One cached transform set per image side. Guarded by fft_mutex: FFTW
// planning is not thread-safe, and sharing the scratch buffers keeps the
// cache tiny.
struct FftSet {
    double* real = nullptr;       // n x n
    fftw_complex* spec = nullptr; // n x (n/2+1), forward output
    fftw_complex* prod = nullptr; // inverse input
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

std::mutex fft_mutex;

FftSet& fft_set_for(int n) {
    static std::map<int, FftSet>* cache = new std::map<int, FftSet>();
    auto it = cache->find(n);
    if (it != cache->end()) {
        return it->second;
    }
    FftSet s;
    const std::size_t reals = std::size_t(n) * n;
    const std::size_t bins = std::size_t(n) * (n / 2 + 1);
    s.real = fftw_alloc_real(reals);
    s.spec = fftw_alloc_complex(bins);
    s.prod = fftw_alloc_complex(bins);
    s.fwd = fftw_plan_dft_r2c_2d(n, n, s.real, s.spec, FFTW_ESTIMATE);
    s.inv = fftw_plan_dft_c2r_2d(n, n, s.prod, s.real, FFTW_ESTIMATE);
    if (!s.fwd || !s.inv) {
        throw std::runtime_error("FFT planning failed");
    }
    return cache->emplace(n, s).first->second;
}

} // namespace

SimpleCellMap convolve_valid_fast(const GrayImage& img, const Patch& filt) {
    check_conv_args(img, filt);
    const int n = img.width;
    const int w = filt.side;
    const int side = n - w + 1;
    const std::size_t bins = std::size_t(n) * (n / 2 + 1);

    std::lock_guard<std::mutex> lock(fft_mutex);
    FftSet& s = fft_set_for(n);

    // image spectrum
    std::memcpy(s.real, img.data.data(), sizeof(double) * n * n);
    fftw_execute(s.fwd);
    std::vector<double> img_spec(bins * 2);
    std::memcpy(img_spec.data(), s.spec, sizeof(fftw_complex) * bins);

    // filter spectrum (filter embedded top-left in an n x n zero field)
    std::memset(s.real, 0, sizeof(double) * n * n);
    for (int v = 0; v < w; ++v) {
        std::memcpy(s.real + std::size_t(v) * n, &filt.values[std::size_t(v) * w], sizeof(double) * w);
    }
    fftw_execute(s.fwd);

    // correlation: image spectrum times conjugate filter spectrum
    for (std::size_t k = 0; k < bins; ++k) {
        const double xr = img_spec[2 * k];
        const double xi = img_spec[2 * k + 1];
        const double fr = s.spec[k][0];
        const double fi = s.spec[k][1];
        s.prod[k][0] = xr * fr + xi * fi;
        s.prod[k][1] = xi * fr - xr * fi;
    }
    fftw_execute(s.inv);

    // circular correlation has no wraparound on the first (n-w+1) rows/cols
    const double scale = 1.0 / (double(n) * double(n));
    SimpleCellMap out(side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            out.at(x, y) = s.real[std::size_t(y) * n + x] * scale;
        }
    }
    return out;
}

std::vector<SimpleCellMap> simple_maps(const GrayImage& img, const FilterBank& bank) {
    check_bank(img, bank);
    const int w = bank.field_size;
    std::vector<SimpleCellMap> maps;
    maps.reserve(bank.filter_count);
    Patch diff(w);
    for (int i = 0; i < bank.filter_count; ++i) {
        const Patch& fo = bank.object_filters[i];
        const Patch& fb = bank.background_filters[i];
        for (std::size_t k = 0; k < diff.values.size(); ++k) {
            diff.values[k] = fo.values[k] - fb.values[k];
        }
        maps.push_back(convolve_valid(img, diff));
    }
    return maps;
}

ComplexCellRep stack_complex(const std::vector<SimpleCellMap>& maps) {
    if (maps.empty()) {
        throw std::invalid_argument("stack_complex: no maps");
    }
    const int side = maps.front().side;
    for (const SimpleCellMap& m : maps) {
        if (m.side != side) throw std::invalid_argument("stack_complex: inconsistent map sides");
    }
    ComplexCellRep rep;
    rep.map_side = side;
    rep.map_count = int(maps.size());
    rep.sparse = false;
    rep.values.reserve(std::size_t(side) * side * maps.size());
    for (const SimpleCellMap& m : maps) {
        rep.values.insert(rep.values.end(), m.values.begin(), m.values.end());
    }
    return rep;
}

double adaptive_lambda(const ComplexCellRep& rep, MedianMode mode) {
    if (rep.values.empty()) {
        throw std::invalid_argument("adaptive_lambda: empty representation");
    }
    std::vector<double> tmp(rep.values);
    if (mode == MedianMode::absolute) {
        for (double& v : tmp) v = std::fabs(v);
    }
    // lower median: element (L-1)/2 of the sorted order
    const std::size_t mid = (tmp.size() - 1) / 2;
    std::nth_element(tmp.begin(), tmp.begin() + mid, tmp.end());
    const double med = tmp[mid];
    return mode == MedianMode::absolute ? med : std::max(0.0, med);
}

ComplexCellRep soft_shrink(const ComplexCellRep& rep, double lambda) {
    if (lambda < 0.0) {
        throw std::invalid_argument("soft_shrink: negative threshold");
    }
    ComplexCellRep out = rep;
    out.sparse = true;
    for (double& v : out.values) {
        if (v > lambda) {
            v -= lambda;
        } else if (v < -lambda) {
            v += lambda;
        } else {
            v = 0.0;
        }
    }
    return out;
}

ComplexCellRep candidate_rep(const ComplexCellRep& raw, const ComplexCellRep& templ) {
    if (raw.values.size() != templ.values.size()) {
        throw std::invalid_argument("candidate_rep: dimension mismatch");
    }
    ComplexCellRep out = raw;
    out.sparse = true;
    for (std::size_t j = 0; j < out.values.size(); ++j) {
        if (templ.values[j] == 0.0) {
            out.values[j] = 0.0;
        }
    }
    return out;
}

void patch_rows(const GrayImage& img, int w, std::vector<double>& rows) {
    if (img.width != img.height || w < 1 || w > img.width) {
        throw std::invalid_argument("patch_rows: bad dimensions");
    }
    const int side = img.width - w + 1;
    const std::size_t w2 = std::size_t(w) * w;
    rows.resize(std::size_t(side) * side * w2);
    double* dst = rows.data();
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            for (int v = 0; v < w; ++v) {
                std::memcpy(dst, &img.data[std::size_t(y + v) * img.width + x], sizeof(double) * w);
                dst += w;
            }
        }
    }
}

std::vector<double> difference_filter_matrix(const FilterBank& bank) {
    const std::size_t w2 = std::size_t(bank.field_size) * bank.field_size;
    std::vector<double> fd(w2 * bank.filter_count);
    for (int j = 0; j < bank.filter_count; ++j) {
        const Patch& fo = bank.object_filters[j];
        const Patch& fb = bank.background_filters[j];
        double* col = fd.data() + w2 * j;
        for (std::size_t k = 0; k < w2; ++k) {
            col[k] = fo.values[k] - fb.values[k];
        }
    }
    return fd;
}

ComplexCellRep complex_rep(const GrayImage& img, const FilterBank& bank) {
    check_bank(img, bank);
    const int w = bank.field_size;
    const int side = img.width - w + 1;
    const std::size_t l = std::size_t(side) * side;
    const std::size_t w2 = std::size_t(w) * w;

    std::vector<double> rows;
    patch_rows(img, w, rows);
    const std::vector<double> fd = difference_filter_matrix(bank);

    ComplexCellRep rep;
    rep.map_side = side;
    rep.map_count = bank.filter_count;
    rep.sparse = false;
    rep.values.resize(l * bank.filter_count);

    // column j of the product is exactly map j's raster scan, so the
    // column-major product buffer IS the stacked representation
    Eigen::Map<const RowMat> P(rows.data(), l, w2);
    Eigen::Map<const Eigen::MatrixXd> F(fd.data(), w2, bank.filter_count);
    Eigen::Map<Eigen::MatrixXd> M(rep.values.data(), l, bank.filter_count);
    M.noalias() = P * F;
    return rep;
}

} // namespace convtrack

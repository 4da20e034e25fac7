#include "convtrack/image_io.hpp"

#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

#include <jpeglib.h>
#include <png.h>

namespace convtrack {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::runtime_error(path + ": " + why);
}

std::vector<unsigned char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.empty()) fail(path, "empty file");
    return bytes;
}

// ---- PNM (P2/P3 ascii, P5/P6 binary) -------------------------------------

struct PnmCursor {
    const unsigned char* p;
    const unsigned char* end;
    const std::string& path;
};

void skip_space_and_comments(PnmCursor& c) {
    while (c.p < c.end) {
        if (*c.p == '#') {
            while (c.p < c.end && *c.p != '\n') ++c.p;
        } else if (std::isspace(*c.p)) {
            ++c.p;
        } else {
            break;
        }
    }
}

long pnm_int(PnmCursor& c) {
    skip_space_and_comments(c);
    if (c.p >= c.end || !std::isdigit(*c.p)) fail(c.path, "malformed PNM header");
    long v = 0;
    while (c.p < c.end && std::isdigit(*c.p)) {
        v = v * 10 + (*c.p - '0');
        if (v > 1 << 30) fail(c.path, "PNM value out of range");
        ++c.p;
    }
    return v;
}

GrayImage decode_pnm(const std::vector<unsigned char>& bytes, const std::string& path) {
    PnmCursor c{bytes.data(), bytes.data() + bytes.size(), path};
    if (c.end - c.p < 2 || c.p[0] != 'P') fail(path, "not a PNM file");
    const char kind = char(c.p[1]);
    c.p += 2;
    const bool color = (kind == '3' || kind == '6');
    const bool binary = (kind == '5' || kind == '6');
    if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
        fail(path, "unsupported PNM variant");
    }
    const long w = pnm_int(c);
    const long h = pnm_int(c);
    const long maxval = pnm_int(c);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) fail(path, "bad PNM dimensions");
    const long channels = color ? 3 : 1;
    const long count = w * h * channels;
    std::vector<double> raw(count);
    if (binary) {
        if (c.p >= c.end || !std::isspace(*c.p)) fail(path, "missing PNM data separator");
        ++c.p; // exactly one whitespace byte before the raster
        const int bytes_per = maxval > 255 ? 2 : 1;
        if (c.end - c.p < count * bytes_per) fail(path, "truncated PNM data");
        for (long i = 0; i < count; ++i) {
            long v = *c.p++;
            if (bytes_per == 2) v = (v << 8) | *c.p++; // big-endian
            raw[i] = double(v);
        }
    } else {
        for (long i = 0; i < count; ++i) {
            raw[i] = double(pnm_int(c));
        }
    }
    const double scale = 1.0 / double(maxval);
    if (!color) {
        GrayImage img{int(w), int(h)};
        for (long i = 0; i < count; ++i) img.data[i] = raw[i] * scale;
        return img;
    }
    RgbImage img;
    img.r = GrayImage(int(w), int(h));
    img.g = GrayImage(int(w), int(h));
    img.b = GrayImage(int(w), int(h));
    for (long i = 0; i < w * h; ++i) {
        img.r.data[i] = raw[3 * i] * scale;
        img.g.data[i] = raw[3 * i + 1] * scale;
        img.b.data[i] = raw[3 * i + 2] * scale;
    }
    return to_gray(img);
}

// ---- PNG -------------------------------------------------------------------

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};

GrayImage decode_png(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail(path, "cannot open");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "png init failed");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<unsigned char> pixels;
    png_uint_32 w = 0, h = 0;
    int channels = 0;
    // libpng reports errors through longjmp; translate into an exception
    // only after its structures are destroyed
    bool failed = false;
    if (setjmp(png_jmpbuf(png))) {
        failed = true;
    } else {
        png_init_io(png, fp.get());
        png_read_info(png, info);
        w = png_get_image_width(png, info);
        h = png_get_image_height(png, info);
        const png_byte color_type = png_get_color_type(png, info);
        const png_byte bit_depth = png_get_bit_depth(png, info);
        if (bit_depth == 16) png_set_strip_16(png);
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        png_read_update_info(png, info);
        channels = png_get_channels(png, info);
        const std::size_t stride = png_get_rowbytes(png, info);
        pixels.resize(stride * h);
        row_ptrs.resize(h);
        for (png_uint_32 y = 0; y < h; ++y) {
            row_ptrs[y] = pixels.data() + y * stride;
        }
        png_read_image(png, row_ptrs.data());
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (failed) fail(path, "png decode error");
    if (channels != 1 && channels != 3) fail(path, "unsupported png layout");

    constexpr double scale = 1.0 / 255.0;
    if (channels == 1) {
        GrayImage img{int(w), int(h)};
        for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = pixels[i] * scale;
        return img;
    }
    RgbImage img;
    img.r = GrayImage(int(w), int(h));
    img.g = GrayImage(int(w), int(h));
    img.b = GrayImage(int(w), int(h));
    for (std::size_t i = 0; i < img.r.data.size(); ++i) {
        img.r.data[i] = pixels[3 * i] * scale;
        img.g.data[i] = pixels[3 * i + 1] * scale;
        img.b.data[i] = pixels[3 * i + 2] * scale;
    }
    return to_gray(img);
}

// ---- JPEG ------------------------------------------------------------------

struct JpegErr {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
};

void jpeg_error_trampoline(j_common_ptr cinfo) {
    std::longjmp(reinterpret_cast<JpegErr*>(cinfo->err)->jump, 1);
}

GrayImage decode_jpeg(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail(path, "cannot open");
    jpeg_decompress_struct cinfo;
    JpegErr err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_trampoline;
    std::vector<unsigned char> pixels;
    int w = 0, h = 0, channels = 0;
    bool failed = false;
    if (setjmp(err.jump)) {
        failed = true;
    } else {
        jpeg_create_decompress(&cinfo);
        jpeg_stdio_src(&cinfo, fp.get());
        jpeg_read_header(&cinfo, TRUE);
        cinfo.out_color_space = cinfo.jpeg_color_space == JCS_GRAYSCALE ? JCS_GRAYSCALE : JCS_RGB;
        jpeg_start_decompress(&cinfo);
        w = int(cinfo.output_width);
        h = int(cinfo.output_height);
        channels = cinfo.output_components;
        pixels.resize(std::size_t(w) * h * channels);
        while (cinfo.output_scanline < cinfo.output_height) {
            unsigned char* row = pixels.data() + std::size_t(cinfo.output_scanline) * w * channels;
            jpeg_read_scanlines(&cinfo, &row, 1);
        }
        jpeg_finish_decompress(&cinfo);
    }
    jpeg_destroy_decompress(&cinfo);
    if (failed) fail(path, "jpeg decode error");
    if (channels != 1 && channels != 3) fail(path, "unsupported jpeg layout");

    constexpr double scale = 1.0 / 255.0;
    if (channels == 1) {
        GrayImage img(w, h);
        for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = pixels[i] * scale;
        return img;
    }
    RgbImage img;
    img.r = GrayImage(w, h);
    img.g = GrayImage(w, h);
    img.b = GrayImage(w, h);
    for (std::size_t i = 0; i < img.r.data.size(); ++i) {
        img.r.data[i] = pixels[3 * i] * scale;
        img.g.data[i] = pixels[3 * i + 1] * scale;
        img.b.data[i] = pixels[3 * i + 2] * scale;
    }
    return to_gray(img);
}

} // namespace

GrayImage load_frame(const std::string& path) {
    const std::vector<unsigned char> head = [&] {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(path, "cannot open");
        std::vector<unsigned char> h(8, 0);
        in.read(reinterpret_cast<char*>(h.data()), 8);
        if (in.gcount() < 2) fail(path, "file too short");
        return h;
    }();
    if (head[0] == 'P' && head[1] >= '2' && head[1] <= '6') {
        return decode_pnm(slurp(path), path);
    }
    if (head[0] == 0x89 && head[1] == 'P' && head[2] == 'N' && head[3] == 'G') {
        return decode_png(path);
    }
    if (head[0] == 0xFF && head[1] == 0xD8) {
        return decode_jpeg(path);
    }
    fail(path, "unrecognized image format");
}

void write_pgm(const GrayImage& img, const std::string& path) {
    if (img.width < 1 || img.height < 1) {
        throw std::invalid_argument("write_pgm: empty image");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot write");
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    std::vector<unsigned char> row(img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double v = std::min(1.0, std::max(0.0, img.at(x, y)));
            row[x] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
    if (!out) fail(path, "write failed");
}

} // namespace convtrack

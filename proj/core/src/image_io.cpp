#include "c4/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include <png.h>

#include "c4/errors.hpp"

namespace c4 {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

// Decodes any PNG into 16-bit RGB rows.
void decode_png(const std::string& path, int& width, int& height, int& bit_depth,
                std::vector<std::vector<png_byte>>& rows, int& channels) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open PNG file: " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
        throw FormatError("not a PNG file: " + path);

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw IoError("png_create_read_struct failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw IoError("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(r.png)))
        throw FormatError("PNG decode error: " + path);

    png_init_io(r.png, fp.get());
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    width = static_cast<int>(png_get_image_width(r.png, r.info));
    height = static_cast<int>(png_get_image_height(r.png, r.info));
    bit_depth = png_get_bit_depth(r.png, r.info);
    int color_type = png_get_color_type(r.png, r.info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    png_set_strip_alpha(r.png);
    png_read_update_info(r.png, r.info);

    bit_depth = png_get_bit_depth(r.png, r.info);
    channels = png_get_channels(r.png, r.info);

    size_t rowbytes = png_get_rowbytes(r.png, r.info);
    rows.assign(height, std::vector<png_byte>(rowbytes));
    std::vector<png_bytep> row_ptrs(height);
    for (int y = 0; y < height; ++y) row_ptrs[y] = rows[y].data();
    png_read_image(r.png, row_ptrs.data());
    png_read_end(r.png, nullptr);
}

} // namespace

LinearImage read_png(const std::string& path) {
    int width = 0, height = 0, bit_depth = 0, channels = 0;
    std::vector<std::vector<png_byte>> rows;
    decode_png(path, width, height, bit_depth, rows, channels);

    LinearImage img(height, width);
    const double scale = bit_depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
    for (int y = 0; y < height; ++y) {
        const png_byte* row = rows[y].data();
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < 3; ++c) {
                int src_c = channels >= 3 ? c : 0;
                double v;
                if (bit_depth == 16) {
                    size_t i = (static_cast<size_t>(x) * channels + src_c) * 2;
                    v = ((row[i] << 8) | row[i + 1]) * scale;
                } else {
                    v = row[static_cast<size_t>(x) * channels + src_c] * scale;
                }
                img.at(y, x, c) = v;
            }
        }
    }
    return img;
}

void write_png16(const LinearImage& image, const std::string& path) {
    image.validate();
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open PNG file for writing: " + path);

    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw IoError("png_create_write_struct failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw IoError("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(w.png)))
        throw IoError("PNG encode error: " + path);

    png_init_io(w.png, fp.get());
    png_set_IHDR(w.png, w.info, image.width, image.height, 16, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);

    std::vector<png_byte> row(static_cast<size_t>(image.width) * 6);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double v = std::clamp(image.at(y, x, c), 0.0, 1.0);
                auto q = static_cast<uint16_t>(std::lround(v * 65535.0));
                row[(static_cast<size_t>(x) * 3 + c) * 2] = static_cast<png_byte>(q >> 8);
                row[(static_cast<size_t>(x) * 3 + c) * 2 + 1] = static_cast<png_byte>(q & 0xff);
            }
        }
        png_write_row(w.png, row.data());
    }
    png_write_end(w.png, nullptr);
}

void read_mask_png(LinearImage& image, const std::string& path) {
    int width = 0, height = 0, bit_depth = 0, channels = 0;
    std::vector<std::vector<png_byte>> rows;
    decode_png(path, width, height, bit_depth, rows, channels);
    if (width != image.width || height != image.height)
        throw FormatError("mask dimensions do not match image: " + path);

    image.mask.assign(image.pixel_count(), 0);
    for (int y = 0; y < height; ++y) {
        const png_byte* row = rows[y].data();
        for (int x = 0; x < width; ++x) {
            unsigned v;
            if (bit_depth == 16)
                v = (row[static_cast<size_t>(x) * channels * 2] << 8) |
                    row[static_cast<size_t>(x) * channels * 2 + 1];
            else
                v = row[static_cast<size_t>(x) * channels];
            image.mask[static_cast<size_t>(y) * width + x] = v != 0 ? 1 : 0;
        }
    }
}

void write_mask_png(const LinearImage& image, const std::string& path) {
    if (!image.has_mask()) throw DomainError("write_mask_png: image has no mask");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open PNG file for writing: " + path);

    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw IoError("png_create_write_struct failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw IoError("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(w.png)))
        throw IoError("PNG encode error: " + path);

    png_init_io(w.png, fp.get());
    png_set_IHDR(w.png, w.info, image.width, image.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);

    std::vector<png_byte> row(image.width);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x)
            row[x] = image.mask[static_cast<size_t>(y) * image.width + x] ? 255 : 0;
        png_write_row(w.png, row.data());
    }
    png_write_end(w.png, nullptr);
}

LinearImage read_pfm_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open raster file: " + path);
    std::string magic;
    int width = 0, height = 0;
    in >> magic >> width >> height;
    if (magic != "C4PF" || width <= 0 || height <= 0 || !in)
        throw FormatError("bad text raster header: " + path);
    LinearImage img(height, width);
    for (double& v : img.data) {
        if (!(in >> v))
            throw FormatError("truncated text raster: " + path);
    }
    return img;
}

void write_pfm_text(const LinearImage& image, const std::string& path) {
    image.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot open raster file for writing: " + path);
    out << "C4PF " << image.width << ' ' << image.height << '\n';
    char buf[40];
    size_t i = 0;
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            for (int c = 0; c < 3; ++c, ++i) {
                std::snprintf(buf, sizeof(buf), "%.17g", image.data[i]);
                out << buf << (c == 2 ? "" : " ");
            }
            out << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace c4

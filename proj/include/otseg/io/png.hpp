#pragma once

// PNG decoding and encoding through libpng, entirely in memory. Samples are kept
// as stored (palette indices stay indices) so that scribble masks round-trip.

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/features/image.hpp"

namespace otseg {

struct PngRaster {
    std::size_t width = 0, height = 0;
    std::size_t channels = 0;  ///< 1 gray or index, 2 gray+alpha, 3 RGB, 4 RGBA
    int bit_depth = 8;         ///< as stored: 1, 2, 4, 8 or 16
    bool indexed = false;
    std::vector<std::array<std::uint8_t, 3>> palette;
    std::vector<std::uint16_t> samples;  ///< row-major, interleaved, unscaled
};

namespace detail {

struct PngReadCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
};

inline void png_read_mem(png_structp png, png_bytep out, png_size_t n) {
    auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + n > cur->bytes.size()) png_error(png, "truncated PNG data");
    std::memcpy(out, cur->bytes.data() + cur->pos, n);
    cur->pos += n;
}

inline void png_write_mem(png_structp png, png_bytep in, png_size_t n) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), in, in + n);
}

inline void png_flush_noop(png_structp) {}

inline void png_error_fn(png_structp png, png_const_charp msg) {
    auto* text = static_cast<std::string*>(png_get_error_ptr(png));
    if (text) *text = msg;
    png_longjmp(png, 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace detail

/// Decode PNG bytes. Throws UnsupportedFormat for anything that is not a valid PNG.
inline PngRaster decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw UnsupportedFormat("not a PNG file");
    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, detail::png_error_fn, detail::png_warning_fn);
    if (!png) throw Error("libpng: cannot allocate read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("libpng: cannot allocate info struct");
    }
    detail::PngReadCursor cursor{bytes, 0};
    PngRaster r;
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw UnsupportedFormat("corrupt PNG: " + err);
    }
    png_set_read_fn(png, &cursor, detail::png_read_mem);
    png_read_info(png, info);
    r.width = png_get_image_width(png, info);
    r.height = png_get_image_height(png, info);
    r.bit_depth = png_get_bit_depth(png, info);
    const int ct = png_get_color_type(png, info);
    r.indexed = ct == PNG_COLOR_TYPE_PALETTE;
    if (r.indexed) {
        png_colorp pal = nullptr;
        int n = 0;
        if (png_get_PLTE(png, info, &pal, &n))
            for (int k = 0; k < n; ++k) r.palette.push_back({pal[k].red, pal[k].green, pal[k].blue});
    }
    if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
    if (r.bit_depth < 8) png_set_packing(png);
    png_read_update_info(png, info);
    r.channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    buffer.resize(rowbytes * r.height);
    rows.resize(r.height);
    for (std::size_t i = 0; i < r.height; ++i) rows[i] = buffer.data() + i * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t n = r.width * r.height * r.channels;
    r.samples.resize(n);
    if (r.bit_depth == 16) {
        for (std::size_t i = 0; i < r.height; ++i)
            for (std::size_t k = 0; k < r.width * r.channels; ++k) {
                const png_byte* s = rows[i] + 2 * k;
                r.samples[i * r.width * r.channels + k] = std::uint16_t((s[0] << 8) | s[1]);
            }
    } else {
        for (std::size_t i = 0; i < r.height; ++i)
            for (std::size_t k = 0; k < r.width * r.channels; ++k) r.samples[i * r.width * r.channels + k] = rows[i][k];
    }
    return r;
}

/// Gray (1 channel) or RGB (3 channels) intensities in [0,255]; alpha is dropped.
inline Image to_image(const PngRaster& r) {
    if (r.indexed) {
        Image img(r.width, r.height, 3);
        for (std::size_t p = 0; p < r.width * r.height; ++p) {
            const auto idx = r.samples[p];
            if (idx >= r.palette.size()) throw UnsupportedFormat("palette index out of range");
            for (std::size_t c = 0; c < 3; ++c) img.data[p * 3 + c] = r.palette[idx][c];
        }
        return img;
    }
    const std::size_t colour = r.channels >= 3 ? 3 : 1;
    const double scale = 255.0 / double((1u << r.bit_depth) - 1u);
    Image img(r.width, r.height, colour);
    for (std::size_t p = 0; p < r.width * r.height; ++p)
        for (std::size_t c = 0; c < colour; ++c) img.data[p * colour + c] = r.samples[p * r.channels + c] * scale;
    return img;
}

/// Index map of a palette or 8-bit-or-less grayscale PNG (raw stored values).
inline std::vector<std::uint8_t> to_index_map(const PngRaster& r) {
    if (r.channels != 1 || r.bit_depth > 8) throw UnsupportedFormat("index maps must be palette or 8-bit grayscale PNGs");
    return {r.samples.begin(), r.samples.end()};
}

/// Encode samples; `palette` non-empty makes an indexed PNG (8-bit, channels must be 1).
inline std::vector<std::uint8_t> encode_png(std::size_t width, std::size_t height, std::size_t channels, int bit_depth,
                                            std::span<const std::uint16_t> samples,
                                            const std::vector<std::array<std::uint8_t, 3>>& palette = {}) {
    if (width == 0 || height == 0) throw InvalidArgument("encode_png: empty image");
    if (channels < 1 || channels > 4) throw InvalidArgument("encode_png: 1 to 4 channels");
    if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("encode_png: bit depth must be 8 or 16");
    if (samples.size() != width * height * channels) throw InvalidArgument("encode_png: sample count mismatch");
    if (!palette.empty() && (channels != 1 || bit_depth != 8 || palette.size() > 256))
        throw InvalidArgument("encode_png: palette needs one 8-bit channel and at most 256 entries");
    static constexpr int kTypes[] = {PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA, PNG_COLOR_TYPE_RGB,
                                     PNG_COLOR_TYPE_RGB_ALPHA};
    const int ct = palette.empty() ? kTypes[channels - 1] : PNG_COLOR_TYPE_PALETTE;

    const std::size_t rowbytes = width * channels * (bit_depth / 8);
    std::vector<png_byte> buffer(rowbytes * height);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (bit_depth == 16) {
            buffer[2 * k] = png_byte(samples[k] >> 8);
            buffer[2 * k + 1] = png_byte(samples[k] & 0xff);
        } else {
            if (samples[k] > 255) throw InvalidArgument("encode_png: 8-bit sample out of range");
            buffer[k] = png_byte(samples[k]);
        }
    }
    std::vector<png_bytep> rows(height);
    for (std::size_t i = 0; i < height; ++i) rows[i] = buffer.data() + i * rowbytes;

    std::vector<std::uint8_t> out;
    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, detail::png_error_fn, detail::png_warning_fn);
    if (!png) throw Error("libpng: cannot allocate write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("libpng: cannot allocate info struct");
    }
    std::vector<png_color> pal;
    for (const auto& c : palette) pal.push_back({c[0], c[1], c[2]});
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng: encoding failed: " + err);
    }
    png_set_write_fn(png, &out, detail::png_write_mem, detail::png_flush_noop);
    png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth, ct, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (!pal.empty()) png_set_PLTE(png, info, pal.data(), int(pal.size()));
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

inline std::vector<std::uint8_t> encode_gray8(std::size_t width, std::size_t height,
                                              std::span<const std::uint8_t> values) {
    std::vector<std::uint16_t> s(values.begin(), values.end());
    return encode_png(width, height, 1, 8, s);
}

inline std::vector<std::uint8_t> encode_gray16(std::size_t width, std::size_t height,
                                               std::span<const std::uint16_t> values) {
    return encode_png(width, height, 1, 16, values);
}

/// Gray or RGB image with intensities rounded and clamped to [0,255].
inline std::vector<std::uint8_t> encode_image(const Image& img) {
    if (img.channels != 1 && img.channels != 3) throw InvalidArgument("encode_image: gray or RGB only");
    std::vector<std::uint16_t> s(img.data.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::uint16_t(std::clamp(std::lround(img.data[k]), 0L, 255L));
    return encode_png(img.width, img.height, img.channels, 8, s);
}

/// round(u * 65535) per pixel, u clamped to [0,1].
inline std::vector<std::uint16_t> quantize_prob16(std::span<const double> u) {
    std::vector<std::uint16_t> q(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) q[k] = std::uint16_t(std::lround(std::clamp(u[k], 0.0, 1.0) * 65535.0));
    return q;
}

inline std::vector<double> dequantize_prob16(std::span<const std::uint16_t> q) {
    std::vector<double> u(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) u[k] = q[k] / 65535.0;
    return u;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw Error("write failed for '" + path + "'");
}

inline PngRaster read_png(const std::string& path) { return decode_png(read_file_bytes(path)); }

}  // namespace otseg

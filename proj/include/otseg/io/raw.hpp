#pragma once

// Raw probability dumps: "OTSGPROB", u32 width, u32 height (little endian), then
// width*height little-endian doubles in row-major order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "otseg/error.hpp"

namespace otseg {

inline constexpr char kRawProbMagic[8] = {'O', 'T', 'S', 'G', 'P', 'R', 'O', 'B'};

struct RawProb {
    std::size_t width = 0, height = 0;
    std::vector<double> values;
};

inline std::vector<std::uint8_t> encode_raw_prob(std::size_t width, std::size_t height, std::span<const double> u) {
    if (u.size() != width * height) throw InvalidArgument("raw dump: size mismatch");
    if (width > UINT32_MAX || height > UINT32_MAX) throw InvalidArgument("raw dump: image too large");
    std::vector<std::uint8_t> out(16 + 8 * u.size());
    std::memcpy(out.data(), kRawProbMagic, 8);
    auto put = [&](std::size_t at, std::uint64_t v, std::size_t bytes) {
        for (std::size_t k = 0; k < bytes; ++k) out[at + k] = std::uint8_t(v >> (8 * k));
    };
    put(8, width, 4);
    put(12, height, 4);
    for (std::size_t p = 0; p < u.size(); ++p) put(16 + 8 * p, std::bit_cast<std::uint64_t>(u[p]), 8);
    return out;
}

inline RawProb decode_raw_prob(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kRawProbMagic, 8) != 0)
        throw UnsupportedFormat("not an OTSGPROB dump");
    auto get = [&](std::size_t at, std::size_t n) {
        std::uint64_t v = 0;
        for (std::size_t k = 0; k < n; ++k) v |= std::uint64_t(bytes[at + k]) << (8 * k);
        return v;
    };
    RawProb r{get(8, 4), get(12, 4), {}};
    if (bytes.size() != 16 + 8 * r.width * r.height) throw UnsupportedFormat("OTSGPROB dump has the wrong length");
    r.values.resize(r.width * r.height);
    for (std::size_t p = 0; p < r.values.size(); ++p) r.values[p] = std::bit_cast<double>(get(16 + 8 * p, 8));
    return r;
}

}  // namespace otseg

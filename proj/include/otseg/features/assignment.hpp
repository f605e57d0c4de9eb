#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/features/image.hpp"
#include "otseg/features/kmeans.hpp"
#include "otseg/ot/types.hpp"

namespace otseg {

/// Hard nearest-centroid assignment of every pixel to one histogram bin.
struct AssignmentOperator {
    std::size_t bins = 0;
    std::vector<std::uint32_t> bin_of_pixel;

    std::size_t pixels() const noexcept { return bin_of_pixel.size(); }
};

inline AssignmentOperator build_assignment(const FeatureImage& f, const Codebook& cb) {
    if (cb.bins() == 0) throw InvalidArgument("build_assignment: empty codebook");
    if (cb.dim != f.dim) throw InvalidArgument("build_assignment: feature and codebook dimensions differ");
    std::vector<double> flat;
    flat.reserve(cb.bins() * cb.dim);
    for (const auto& c : cb.centroids) {
        if (c.size() != cb.dim) throw InvalidArgument("build_assignment: malformed centroid");
        flat.insert(flat.end(), c.begin(), c.end());
    }
    AssignmentOperator op{cb.bins(), std::vector<std::uint32_t>(f.pixels())};
    const auto n = static_cast<std::ptrdiff_t>(f.pixels());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < n; ++p)
        op.bin_of_pixel[p] = detail::nearest_centroid(f.at(std::size_t(p)), flat, cb.bins(), f.dim).first;
    return op;
}

/// out[i] = sum of u over pixels in bin i (no range checks on u).
inline void accumulate_histogram(const AssignmentOperator& op, std::span<const double> u, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t p = 0; p < op.bin_of_pixel.size(); ++p) out[op.bin_of_pixel[p]] += u[p];
}

inline Histogram histogram_of(const AssignmentOperator& op, std::span<const double> u) {
    if (u.size() != op.pixels()) throw InvalidArgument("histogram_of: weight map size mismatch");
    for (double v : u)
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("histogram_of: weights must lie in [0,1]");
    std::vector<double> h(op.bins);
    accumulate_histogram(op, u, h);
    return Histogram(std::move(h));
}

/// Adjoint: out[x] = p[bin_of_pixel[x]].
inline void apply_Ht(const AssignmentOperator& op, std::span<const double> p, std::span<double> out) {
    if (p.size() != op.bins || out.size() != op.pixels()) throw InvalidArgument("apply_Ht: size mismatch");
    for (std::size_t x = 0; x < op.bin_of_pixel.size(); ++x) out[x] = p[op.bin_of_pixel[x]];
}

inline std::vector<double> apply_Ht(const AssignmentOperator& op, std::span<const double> p) {
    std::vector<double> out(op.pixels());
    apply_Ht(op, p, out);
    return out;
}

// Binary layout: "OTSGASGN", u32 version, u32 bins, u64 pixels, then u32 indices (little endian).
inline constexpr char kAssignmentMagic[8] = {'O', 'T', 'S', 'G', 'A', 'S', 'G', 'N'};
inline constexpr std::uint32_t kAssignmentVersion = 1;

namespace detail {

template <class T>
void write_le(std::ostream& os, T v) {
    unsigned char b[sizeof(T)];
    for (std::size_t k = 0; k < sizeof(T); ++k) b[k] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * k)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw InvalidArgument("truncated binary stream");
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) v |= std::uint64_t(b[k]) << (8 * k);
    return static_cast<T>(v);
}

}  // namespace detail

inline void write_assignment(std::ostream& os, const AssignmentOperator& op) {
    os.write(kAssignmentMagic, 8);
    detail::write_le<std::uint32_t>(os, kAssignmentVersion);
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(op.bins));
    detail::write_le<std::uint64_t>(os, op.pixels());
    for (std::uint32_t b : op.bin_of_pixel) detail::write_le<std::uint32_t>(os, b);
}

inline AssignmentOperator read_assignment(std::istream& is) {
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kAssignmentMagic, 8) != 0)
        throw InvalidArgument("not an assignment file");
    if (detail::read_le<std::uint32_t>(is) != kAssignmentVersion) throw InvalidArgument("unsupported assignment version");
    AssignmentOperator op;
    op.bins = detail::read_le<std::uint32_t>(is);
    const auto n = detail::read_le<std::uint64_t>(is);
    op.bin_of_pixel.resize(n);
    for (auto& b : op.bin_of_pixel) {
        b = detail::read_le<std::uint32_t>(is);
        if (b >= op.bins) throw InvalidArgument("assignment index out of range");
    }
    return op;
}

}  // namespace otseg

#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "otseg/error.hpp"

namespace otseg {

/// Dense row-major matrix.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::span<T> flat() noexcept { return data_; }
    std::span<const T> flat() const noexcept { return data_; }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Nonnegative bin masses. The total is always recomputed from the entries.
class Histogram {
public:
    Histogram() = default;
    explicit Histogram(std::vector<double> mass) : mass_(std::move(mass)) {
        for (double m : mass_)
            if (!(m >= 0.0)) throw InvalidArgument("histogram entries must be nonnegative");
    }

    std::size_t bins() const noexcept { return mass_.size(); }
    std::span<const double> mass() const noexcept { return mass_; }
    double operator[](std::size_t i) const noexcept { return mass_[i]; }
    double total_mass() const noexcept { return std::accumulate(mass_.begin(), mass_.end(), 0.0); }

    /// Copy rescaled to the given total; an empty histogram stays zero.
    Histogram normalized(double total = 1.0) const {
        const double m = total_mass();
        std::vector<double> out(mass_);
        if (m > 0.0)
            for (double& v : out) v *= total / m;
        return Histogram(std::move(out));
    }

private:
    std::vector<double> mass_;
};

/// Ground costs between source bins (rows) and target bins (columns).
struct CostMatrix {
    Matrix<double> entries;

    std::size_t rows() const noexcept { return entries.rows(); }
    std::size_t cols() const noexcept { return entries.cols(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return entries(i, j); }
    CostMatrix transposed() const { return {entries.transposed()}; }
};

struct TransportPlan {
    Matrix<double> entries;
    Histogram source_marginal;
    Histogram target_marginal;
};

/// Dual prices attached to the source and target marginal constraints.
struct DualPotentials {
    std::vector<double> beta_src;
    std::vector<double> beta_dst;
};

}  // namespace otseg

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "otseg/error.hpp"
#include "otseg/ot/types.hpp"

namespace otseg {

// Matrix-free marginal operator. L maps a pair of potentials to the matrix
// (x_i + y_j); its adjoint maps a plan to (row sums; column sums).

inline void apply_L(std::span<const double> src, std::span<const double> dst, Matrix<double>& out) {
    if (out.rows() != src.size() || out.cols() != dst.size())
        throw InvalidArgument("apply_L: output shape does not match potentials");
    for (std::size_t i = 0; i < src.size(); ++i) {
        auto row = out.row(i);
        for (std::size_t j = 0; j < dst.size(); ++j) row[j] = src[i] + dst[j];
    }
}

inline Matrix<double> apply_L(const DualPotentials& beta) {
    Matrix<double> out(beta.beta_src.size(), beta.beta_dst.size());
    apply_L(beta.beta_src, beta.beta_dst, out);
    return out;
}

inline void apply_L_transpose(const Matrix<double>& plan, std::span<double> row_sums, std::span<double> col_sums) {
    if (row_sums.size() != plan.rows() || col_sums.size() != plan.cols())
        throw InvalidArgument("apply_L_transpose: size mismatch");
    std::fill(col_sums.begin(), col_sums.end(), 0.0);
    for (std::size_t i = 0; i < plan.rows(); ++i) {
        const auto row = plan.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < plan.cols(); ++j) {
            s += row[j];
            col_sums[j] += row[j];
        }
        row_sums[i] = s;
    }
}

inline DualPotentials apply_L_transpose(const Matrix<double>& plan) {
    DualPotentials out{std::vector<double>(plan.rows()), std::vector<double>(plan.cols())};
    apply_L_transpose(plan, out.beta_src, out.beta_dst);
    return out;
}

}  // namespace otseg

/*
* Copyright (C) 2026 sphcast contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef SPHCAST_TENSOR_HPP
#define SPHCAST_TENSOR_HPP

#include "sphcast/common.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace sphcast {

/// Dense row-major matrix of 64-bit reals. The only tensor rank the whole
/// toolkit needs; vectors are Tensor2 with one row.
class Tensor2 {
public:
    Tensor2() = default;
    Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void check_finite(const char* what) const {
        if (!all_finite()) throw RuntimeFailure(std::string("non-finite values in ") + what);
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// y += A(r,:)  accumulate-style helpers used by the recurrent kernels.
// All loops are plain and contiguous so -O3 vectorizes them.

/// C = A * B^T, where A is [m x k] and B is [n x k]; C is [m x n].
/// The transposed layout keeps both inner loops contiguous.
inline void matmul_bt(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    if (b.cols() != k) throw ValidationError("matmul_bt: inner dimension mismatch");
    if (c.rows() != m || c.cols() != n) c = Tensor2(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b.row_ptr(j);
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) s += ai[t] * bj[t];
            ci[j] = s;
        }
    }
}

/// C += A * B^T, same layout as matmul_bt.
inline void matmul_bt_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    if (b.cols() != k) throw ValidationError("matmul_bt_acc: inner dimension mismatch");
    if (c.rows() != m || c.cols() != n) throw ValidationError("matmul_bt_acc: output shape mismatch");
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b.row_ptr(j);
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) s += ai[t] * bj[t];
            ci[j] += s;
        }
    }
}

/// C += A^T * B, where A is [m x k] and B is [m x n]; C is [k x n].
inline void matmul_at_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != m) throw ValidationError("matmul_at_acc: row mismatch");
    if (c.rows() != k || c.cols() != n) throw ValidationError("matmul_at_acc: output shape mismatch");
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a.row_ptr(i);
        const double* bi = b.row_ptr(i);
        for (std::size_t t = 0; t < k; ++t) {
            double* ct = c.row_ptr(t);
            const double av = ai[t];
            for (std::size_t j = 0; j < n; ++j) ct[j] += av * bi[j];
        }
    }
}

/// C += A * B, where A is [m x k] and B is [k x n]; C is [m x n].
inline void matmul_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) throw ValidationError("matmul_acc: inner dimension mismatch");
    if (c.rows() != m || c.cols() != n) throw ValidationError("matmul_acc: output shape mismatch");
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c.row_ptr(i);
        const double* ai = a.row_ptr(i);
        for (std::size_t t = 0; t < k; ++t) {
            const double av = ai[t];
            const double* bt = b.row_ptr(t);
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bt[j];
        }
    }
}

} // namespace sphcast

#endif

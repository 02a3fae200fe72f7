#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace hoptk {

// Dense row-major matrix of doubles. The universal carrier for datasets,
// activations and weights.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rs) {
        Matrix m;
        m.rows = rs.size();
        m.cols = rs.size() ? rs.begin()->size() : 0;
        m.data.reserve(m.rows * m.cols);
        for (const auto& r : rs) {
            if (r.size() != m.cols)
                throw std::invalid_argument("Matrix::from_rows: ragged rows");
            m.data.insert(m.data.end(), r.begin(), r.end());
        }
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return rows * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const;
};

namespace kernels {

// Serial reference kernels. Kept alongside the parallel versions so tests
// and the benchmark can compare them directly.
Matrix matmul_serial(const Matrix& a, const Matrix& b);
Matrix matmul_at_b_serial(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_a_bt_serial(const Matrix& a, const Matrix& b);  // a * b^T

// OpenMP-parallel kernels (fall back to the same loops serially when
// OpenMP is unavailable or a single thread is configured).
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

}  // namespace kernels

// Elementwise helpers used across the toolkit.
Matrix sample_rows(const Matrix& m, const std::vector<std::size_t>& idx);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

}  // namespace hoptk

#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace lml {

// Dense row-major matrix of doubles. The universal numeric carrier of the
// toolkit: feature blocks, layer weights and activations all live here.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }
    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }

    std::vector<double> row(std::size_t r) const;
    std::vector<double> column(std::size_t c) const;

    Matrix transposed() const;
    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Standard product, a.cols must equal b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);

// a^T * b without materializing the transpose (for weight gradients).
Matrix matmul_transpose_a(const Matrix& a, const Matrix& b);

// a * b^T without materializing the transpose (for backpropagated deltas).
Matrix matmul_transpose_b(const Matrix& a, const Matrix& b);

}  // namespace lml

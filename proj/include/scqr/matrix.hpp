#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace scqr {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Samples are stored one per row
// throughout the library (a batch of N inputs of width M is N x M).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, Vector data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const Vector& values() const noexcept { return data_; }

    Matrix transposed() const;
    Vector column(std::size_t c) const;

    bool all_finite() const noexcept;
    std::string shape_string() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// a * b^T
Matrix matmul_bt(const Matrix& a, const Matrix& b);
// a^T * b
Matrix matmul_at(const Matrix& a, const Matrix& b);

// Adds `bias` to every row.
void add_row_vector(Matrix& m, std::span<const double> bias);
Vector column_sums(const Matrix& m);

// Throws std::domain_error naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

} // namespace scqr

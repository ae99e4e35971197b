#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace efmuon {

/// Raised when an iterative kernel fails to converge or diverges.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles with value semantics.
///
/// Column vectors are represented as n x 1 matrices. Zero-sized shapes are
/// allowed so that rank-0 factorizations can be expressed.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols) : rows_{rows}, cols_{cols}, data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_{rows}, cols_{cols}, data_{std::move(entries)} {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("Matrix: entry count " + std::to_string(data_.size()) +
                                        " does not match shape " + std::to_string(rows_) + "x" +
                                        std::to_string(cols_));
        for (double v : data_)
            if (!std::isfinite(v))
                throw std::invalid_argument("Matrix: non-finite entry");
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw std::invalid_argument("Matrix: ragged initializer");
            for (double v : r) {
                if (!std::isfinite(v))
                    throw std::invalid_argument("Matrix: non-finite entry");
                data_.push_back(v);
            }
        }
    }

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

    static Matrix identity(std::size_t n) {
        Matrix I(n, n);
        for (std::size_t i = 0; i < n; ++i)
            I(i, i) = 1.0;
        return I;
    }

    /// Rectangular diagonal matrix with the given leading diagonal entries.
    static Matrix diagonal(std::size_t rows, std::size_t cols, const std::vector<double>& diag) {
        if (diag.size() > std::min(rows, cols))
            throw std::invalid_argument("Matrix::diagonal: too many diagonal entries");
        Matrix D(rows, cols);
        for (std::size_t i = 0; i < diag.size(); ++i)
            D(i, i) = diag[i];
        return D;
    }

    static Matrix column(const std::vector<double>& v) { return Matrix(v.size(), 1, v); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    bool is_vector() const noexcept { return rows_ == 1 || cols_ == 1; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    double& operator[](std::size_t k) noexcept { return data_[k]; }
    double operator[](std::size_t k) const noexcept { return data_[k]; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    bool same_shape(const Matrix& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const noexcept {
        for (double v : data_)
            if (!std::isfinite(v))
                return false;
        return true;
    }

    Matrix transpose() const {
        Matrix T(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                T(j, i) = (*this)(i, j);
        return T;
    }

    std::vector<double> diag() const {
        std::vector<double> d(std::min(rows_, cols_));
        for (std::size_t i = 0; i < d.size(); ++i)
            d[i] = (*this)(i, i);
        return d;
    }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o, "+=");
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] += o.data_[k];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o, "-=");
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] -= o.data_[k];
        return *this;
    }

    Matrix& operator*=(double s) noexcept {
        for (double& v : data_)
            v *= s;
        return *this;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    void require_same_shape(const Matrix& o, const char* what) const {
        if (!same_shape(o))
            throw std::invalid_argument(std::string("Matrix ") + what + ": shape mismatch " +
                                        std::to_string(rows_) + "x" + std::to_string(cols_) + " vs " +
                                        std::to_string(o.rows_) + "x" + std::to_string(o.cols_));
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(double s, Matrix a) { return a *= s; }
inline Matrix operator*(Matrix a, double s) { return a *= s; }
inline Matrix operator-(Matrix a) { return a *= -1.0; }

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0)
                continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

/// Trace inner product <A, B> = sum_ij A_ij B_ij.
inline double inner(const Matrix& a, const Matrix& b) {
    a.require_same_shape(b, "inner");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += a[k] * b[k];
    return s;
}

inline double frobenius(const Matrix& a) { return std::sqrt(inner(a, a)); }

inline Matrix zeros_like(const Matrix& a) { return Matrix(a.rows(), a.cols()); }

/// Largest absolute entrywise difference.
inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    a.require_same_shape(b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace efmuon

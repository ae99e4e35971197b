#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "efmuon/matrix.hpp"

namespace efmuon {

/// Point of the product space (W^1, ..., W^L, theta): L weight matrices and one
/// vector of non-matrix parameters stored as a k x 1 matrix.
struct ParamPoint {
    std::vector<Matrix> matrices;
    Matrix theta;

    ParamPoint() = default;
    ParamPoint(std::vector<Matrix> mats, Matrix th) : matrices{std::move(mats)}, theta{std::move(th)} {
        if (theta.cols() > 1)
            throw std::invalid_argument("ParamPoint: theta must be a column vector");
    }

    std::size_t layers() const noexcept { return matrices.size(); }

    bool same_shape(const ParamPoint& o) const noexcept {
        if (matrices.size() != o.matrices.size() || !theta.same_shape(o.theta))
            return false;
        for (std::size_t l = 0; l < matrices.size(); ++l)
            if (!matrices[l].same_shape(o.matrices[l]))
                return false;
        return true;
    }

    void require_same_shape(const ParamPoint& o, const char* what) const {
        if (!same_shape(o))
            throw std::invalid_argument(std::string("ParamPoint ") + what + ": shape mismatch");
    }

    bool all_finite() const noexcept {
        for (const auto& m : matrices)
            if (!m.all_finite())
                return false;
        return theta.all_finite();
    }

    ParamPoint& operator+=(const ParamPoint& o) {
        require_same_shape(o, "+=");
        for (std::size_t l = 0; l < matrices.size(); ++l)
            matrices[l] += o.matrices[l];
        theta += o.theta;
        return *this;
    }

    ParamPoint& operator-=(const ParamPoint& o) {
        require_same_shape(o, "-=");
        for (std::size_t l = 0; l < matrices.size(); ++l)
            matrices[l] -= o.matrices[l];
        theta -= o.theta;
        return *this;
    }

    ParamPoint& operator*=(double s) noexcept {
        for (auto& m : matrices)
            m *= s;
        theta *= s;
        return *this;
    }

    friend bool operator==(const ParamPoint& a, const ParamPoint& b) {
        return a.matrices == b.matrices && a.theta == b.theta;
    }
};

inline ParamPoint operator+(ParamPoint a, const ParamPoint& b) { return a += b; }
inline ParamPoint operator-(ParamPoint a, const ParamPoint& b) { return a -= b; }
inline ParamPoint operator*(double s, ParamPoint a) { return a *= s; }
inline ParamPoint operator*(ParamPoint a, double s) { return a *= s; }

inline double inner(const ParamPoint& a, const ParamPoint& b) {
    a.require_same_shape(b, "inner");
    double s = inner(a.theta, b.theta);
    for (std::size_t l = 0; l < a.matrices.size(); ++l)
        s += inner(a.matrices[l], b.matrices[l]);
    return s;
}

/// Product-Frobenius norm: sqrt(sum_l |W^l|_F^2 + |theta|_2^2).
inline double frobenius(const ParamPoint& a) { return std::sqrt(inner(a, a)); }

inline ParamPoint zeros_like(const ParamPoint& a) {
    ParamPoint z;
    z.matrices.reserve(a.matrices.size());
    for (const auto& m : a.matrices)
        z.matrices.push_back(zeros_like(m));
    z.theta = zeros_like(a.theta);
    return z;
}

inline double max_abs_diff(const ParamPoint& a, const ParamPoint& b) {
    a.require_same_shape(b, "max_abs_diff");
    double m = max_abs_diff(a.theta, b.theta);
    for (std::size_t l = 0; l < a.matrices.size(); ++l)
        m = std::max(m, max_abs_diff(a.matrices[l], b.matrices[l]));
    return m;
}

}  // namespace efmuon

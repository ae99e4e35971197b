#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "efmuon/linalg.hpp"
#include "efmuon/matrix.hpp"
#include "efmuon/optim.hpp"
#include "efmuon/param_point.hpp"

namespace efmuon {

using Rng = std::mt19937_64;

inline Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    Matrix m(rows, cols);
    for (double& x : m.data())
        x = dist(rng);
    return m;
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// U diag(s) V^T with orthonormal factors taken from Gaussian draws and
/// singular values uniform in [smin, smax].
inline Matrix conditioned_matrix(Rng& rng, std::size_t rows, std::size_t cols, double smin, double smax) {
    const std::size_t r = std::min(rows, cols);
    const auto fu = reduced_svd(gaussian_matrix(rng, rows, r));
    const auto fv = reduced_svd(gaussian_matrix(rng, r, cols));
    Matrix out(rows, cols);
    std::vector<double> s(r);
    for (double& x : s)
        x = uniform(rng, smin, smax);
    // fu.U is rows x r, fv.Vt is r x cols when both draws have full rank
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < r; ++k)
                acc += fu.U(i, k) * s[k] * fv.Vt(k, j);
            out(i, j) = acc;
        }
    return out;
}

/// Adds i.i.d. N(0, stddev^2) noise to every subgradient entry. Copies of the
/// returned oracle share one stream seeded with `seed`.
template <class P>
Oracle<P> noisy_oracle(Oracle<P> base, double stddev, std::uint64_t seed) {
    if (!(stddev >= 0.0))
        throw std::invalid_argument("noisy_oracle: stddev must be nonnegative");
    auto rng = std::make_shared<Rng>(seed);
    auto add = [rng, stddev](Matrix& g) {
        std::normal_distribution<double> dist(0.0, stddev);
        for (double& x : g.data())
            x += dist(*rng);
    };
    auto sub = base.subgradient;
    return {std::move(base.value), [sub = std::move(sub), add](const P& w) {
                P g = sub(w);
                if constexpr (std::is_same_v<P, Matrix>) {
                    add(g);
                } else {
                    for (auto& m : g.matrices)
                        add(m);
                    add(g.theta);
                }
                return g;
            }};
}

}  // namespace efmuon

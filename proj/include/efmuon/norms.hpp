#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "efmuon/linalg.hpp"
#include "efmuon/matrix.hpp"
#include "efmuon/param_point.hpp"

namespace efmuon {

/// Layer shapes and scale of the MuonMax product norm
///   |W| = ( (max_l sqrt(d_l / s) |W^l|_op)^2 + k |theta|_inf^2 )^{1/2},
/// with d_l = min(m_l, n_l).
class ProductNormSpec {
public:
    struct Dims {
        std::size_t rows;
        std::size_t cols;
    };

    ProductNormSpec(std::vector<Dims> layer_dims, double s, std::size_t k)
        : dims_{std::move(layer_dims)}, s_{s}, k_{k} {
        if (dims_.empty())
            throw std::invalid_argument("ProductNormSpec: at least one layer required");
        for (const auto& d : dims_)
            if (d.rows == 0 || d.cols == 0)
                throw std::invalid_argument("ProductNormSpec: layer dimensions must be positive");
        if (!(s_ > 0.0) || !std::isfinite(s_))
            throw std::invalid_argument("ProductNormSpec: scale s must be positive");
        if (k_ == 0)
            throw std::invalid_argument("ProductNormSpec: theta length k must be positive");
    }

    std::size_t layers() const noexcept { return dims_.size(); }
    const std::vector<Dims>& dims() const noexcept { return dims_; }
    double s() const noexcept { return s_; }
    std::size_t k() const noexcept { return k_; }
    double d(std::size_t l) const noexcept { return static_cast<double>(std::min(dims_[l].rows, dims_[l].cols)); }

    bool matches(const ParamPoint& w) const noexcept {
        if (w.matrices.size() != dims_.size() || w.theta.rows() != k_ || w.theta.cols() != 1)
            return false;
        for (std::size_t l = 0; l < dims_.size(); ++l)
            if (w.matrices[l].rows() != dims_[l].rows || w.matrices[l].cols() != dims_[l].cols)
                return false;
        return true;
    }

    void require_match(const ParamPoint& w, const char* what) const {
        if (!matches(w))
            throw std::invalid_argument(std::string(what) + ": ParamPoint shape does not match product norm");
    }

    ParamPoint zeros() const {
        std::vector<Matrix> mats;
        mats.reserve(dims_.size());
        for (const auto& d : dims_)
            mats.emplace_back(d.rows, d.cols);
        return ParamPoint{std::move(mats), Matrix(k_, 1)};
    }

private:
    std::vector<Dims> dims_;
    double s_;
    std::size_t k_;
};

/// Norm choices with closed-form LMOs. Vector norms act on the flattened entries.
struct L1Norm {};
struct L2Norm {};
struct LinfNorm {};
struct LpNorm {
    double p;
};
struct OperatorNorm {};
struct NuclearNorm {};

class NormSpec {
public:
    using Variant = std::variant<L1Norm, L2Norm, LinfNorm, LpNorm, OperatorNorm, NuclearNorm, ProductNormSpec>;

    NormSpec(Variant v) : v_{std::move(v)} {  // NOLINT(google-explicit-constructor)
        if (const auto* lp = std::get_if<LpNorm>(&v_); lp && !(lp->p >= 1.0 && std::isfinite(lp->p)))
            throw std::invalid_argument("NormSpec: Lp requires p >= 1");
    }

    static NormSpec l1() { return NormSpec{Variant{L1Norm{}}}; }
    static NormSpec l2() { return NormSpec{Variant{L2Norm{}}}; }
    static NormSpec linf() { return NormSpec{Variant{LinfNorm{}}}; }
    static NormSpec lp(double p) { return NormSpec{Variant{LpNorm{p}}}; }
    static NormSpec op() { return NormSpec{Variant{OperatorNorm{}}}; }
    static NormSpec nuclear() { return NormSpec{Variant{NuclearNorm{}}}; }
    static NormSpec product(ProductNormSpec spec) { return NormSpec{Variant{spec}}; }

    const Variant& variant() const noexcept { return v_; }
    bool is_product() const noexcept { return std::holds_alternative<ProductNormSpec>(v_); }
    const ProductNormSpec& product_spec() const { return std::get<ProductNormSpec>(v_); }

    std::string name() const {
        struct Namer {
            std::string operator()(const L1Norm&) const { return "l1"; }
            std::string operator()(const L2Norm&) const { return "l2"; }
            std::string operator()(const LinfNorm&) const { return "linf"; }
            std::string operator()(const LpNorm& n) const { return "lp(" + std::to_string(n.p) + ")"; }
            std::string operator()(const OperatorNorm&) const { return "operator"; }
            std::string operator()(const NuclearNorm&) const { return "nuclear"; }
            std::string operator()(const ProductNormSpec&) const { return "product"; }
        };
        return std::visit(Namer{}, v_);
    }

private:
    Variant v_;
};

/// Constants of the LMO compressor C(W) = alpha^2 |W|_* LMO(W), which satisfies
/// |W - C(W)|_F^2 <= (1 - delta) |W|_F^2.
struct CompressorConstants {
    double alpha;
    double delta;
};

namespace detail {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

inline double conjugate_exponent(double p) { return p / (p - 1.0); }

struct DualAndLmo {
    double dual;
    Matrix lmo;
};

// Least-Euclidean LMO of the l1 ball: spread evenly over the tied maximal entries.
inline DualAndLmo l1_lmo(const Matrix& w) {
    const double mx = linf_entries(w.data());
    Matrix x = zeros_like(w);
    if (mx == 0.0)
        return {0.0, std::move(x)};
    std::size_t ties = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (std::abs(w[i]) == mx)
            ++ties;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (std::abs(w[i]) == mx)
            x[i] = sign(w[i]) / static_cast<double>(ties);
    return {mx, std::move(x)};
}

inline DualAndLmo l2_lmo(const Matrix& w) {
    const double nrm = frobenius(w);
    if (nrm == 0.0)
        return {0.0, zeros_like(w)};
    return {nrm, w * (1.0 / nrm)};
}

inline DualAndLmo linf_lmo(const Matrix& w) { return {lp_entries(w.data(), 1.0), sign_elementwise(w)}; }

inline DualAndLmo lp_lmo(const Matrix& w, double p) {
    if (p == 1.0)
        return l1_lmo(w);
    if (p == 2.0)
        return l2_lmo(w);
    const double q = conjugate_exponent(p);
    const double dual = lp_entries(w.data(), q);
    Matrix x = zeros_like(w);
    if (dual == 0.0)
        return {0.0, std::move(x)};
    for (std::size_t i = 0; i < w.size(); ++i)
        x[i] = sign(w[i]) * std::pow(std::abs(w[i]) / dual, q - 1.0);
    return {dual, std::move(x)};
}

inline DualAndLmo operator_lmo(const Matrix& w, const PolarOptions& opts) {
    auto pn = polar_with_nuclear(w, opts);
    return {pn.nuclear, std::move(pn.polar)};
}

// Least-Frobenius LMO of the nuclear ball: average of u_i v_i^T over the top
// singular subspace.
inline DualAndLmo nuclear_lmo(const Matrix& w) {
    const auto f = reduced_svd(w);
    Matrix x = zeros_like(w);
    if (f.rank() == 0)
        return {0.0, std::move(x)};
    const double top = f.sigma.front();
    std::size_t mult = 0;
    while (mult < f.rank() && f.sigma[mult] >= top * (1.0 - tol::sigma_tie_rel))
        ++mult;
    for (std::size_t k = 0; k < mult; ++k)
        for (std::size_t i = 0; i < w.rows(); ++i)
            for (std::size_t j = 0; j < w.cols(); ++j)
                x(i, j) += f.U(i, k) * f.Vt(k, j);
    x *= 1.0 / static_cast<double>(mult);
    return {top, std::move(x)};
}

inline DualAndLmo matrix_dual_and_lmo(const Matrix& w, const NormSpec& spec, const PolarOptions& opts) {
    return std::visit(overloaded{
                          [&](const L1Norm&) { return l1_lmo(w); },
                          [&](const L2Norm&) { return l2_lmo(w); },
                          [&](const LinfNorm&) { return linf_lmo(w); },
                          [&](const LpNorm& n) { return lp_lmo(w, n.p); },
                          [&](const OperatorNorm&) { return operator_lmo(w, opts); },
                          [&](const NuclearNorm&) { return nuclear_lmo(w); },
                          [&](const ProductNormSpec&) -> DualAndLmo {
                              throw std::invalid_argument("product norm requires a ParamPoint argument");
                          },
                      },
                      spec.variant());
}

struct ProductParts {
    std::vector<Matrix> polars;
    std::vector<double> nuclears;
    double y = 0.0;
    double theta_l1 = 0.0;
    double dual = 0.0;
};

inline ProductParts product_parts(const ParamPoint& w, const ProductNormSpec& spec, const PolarOptions& opts) {
    spec.require_match(w, "product norm");
    ProductParts parts;
    for (std::size_t l = 0; l < spec.layers(); ++l) {
        auto pn = polar_with_nuclear(w.matrices[l], opts);
        parts.y += pn.nuclear / std::sqrt(spec.d(l));
        parts.nuclears.push_back(pn.nuclear);
        parts.polars.push_back(std::move(pn.polar));
    }
    parts.theta_l1 = lp_entries(w.theta.data(), 1.0);
    const double k = static_cast<double>(spec.k());
    parts.dual = std::sqrt(spec.s() * parts.y * parts.y + parts.theta_l1 * parts.theta_l1 / k);
    return parts;
}

}  // namespace detail

/// Primal norm |W| of a matrix under a non-product spec.
inline double primal_norm(const Matrix& w, const NormSpec& spec) {
    using detail::overloaded;
    return std::visit(overloaded{
                          [&](const L1Norm&) { return detail::lp_entries(w.data(), 1.0); },
                          [&](const L2Norm&) { return frobenius(w); },
                          [&](const LinfNorm&) { return detail::linf_entries(w.data()); },
                          [&](const LpNorm& n) { return detail::lp_entries(w.data(), n.p); },
                          [&](const OperatorNorm&) { return norm(w, NormKind::op()); },
                          [&](const NuclearNorm&) { return norm(w, NormKind::nuclear()); },
                          [&](const ProductNormSpec&) -> double {
                              throw std::invalid_argument("product norm requires a ParamPoint argument");
                          },
                      },
                      spec.variant());
}

inline double primal_norm(const ParamPoint& w, const ProductNormSpec& spec) {
    spec.require_match(w, "primal_norm");
    double mx = 0.0;
    for (std::size_t l = 0; l < spec.layers(); ++l)
        mx = std::max(mx, std::sqrt(spec.d(l) / spec.s()) * norm(w.matrices[l], NormKind::op()));
    const double th = detail::linf_entries(w.theta.data());
    return std::sqrt(mx * mx + static_cast<double>(spec.k()) * th * th);
}

inline double primal_norm(const ParamPoint& w, const NormSpec& spec) { return primal_norm(w, spec.product_spec()); }

inline double dual_norm(const Matrix& w, const NormSpec& spec, const PolarOptions& opts = {}) {
    return detail::matrix_dual_and_lmo(w, spec, opts).dual;
}

inline double dual_norm(const ParamPoint& w, const ProductNormSpec& spec, const PolarOptions& opts = {}) {
    return detail::product_parts(w, spec, opts).dual;
}

inline double dual_norm(const ParamPoint& w, const NormSpec& spec, const PolarOptions& opts = {}) {
    return dual_norm(w, spec.product_spec(), opts);
}

/// Least-Frobenius element of argmax_{|X| <= 1} <X, W>; zero for W = 0.
inline Matrix lmo_min(const Matrix& w, const NormSpec& spec, const PolarOptions& opts = {}) {
    return detail::matrix_dual_and_lmo(w, spec, opts).lmo;
}

inline ParamPoint lmo_min(const ParamPoint& w, const ProductNormSpec& spec, const PolarOptions& opts = {}) {
    auto parts = detail::product_parts(w, spec, opts);
    ParamPoint x = spec.zeros();
    if (parts.dual == 0.0)
        return x;
    for (std::size_t l = 0; l < spec.layers(); ++l)
        x.matrices[l] = (spec.s() * parts.y / (std::sqrt(spec.d(l)) * parts.dual)) * std::move(parts.polars[l]);
    x.theta = (parts.theta_l1 / (static_cast<double>(spec.k()) * parts.dual)) * sign_elementwise(w.theta);
    return x;
}

inline ParamPoint lmo_min(const ParamPoint& w, const NormSpec& spec, const PolarOptions& opts = {}) {
    return lmo_min(w, spec.product_spec(), opts);
}

/// Product-norm constants. alpha = min{1, 1/sqrt(sL)}; the upper equivalence
/// constant is beta^2 = max(max_l d_l / s, k), attained by a rank-one block or
/// a single theta coordinate.
inline CompressorConstants compressor_constants(const ProductNormSpec& spec) {
    const double L = static_cast<double>(spec.layers());
    const double alpha = std::min(1.0, 1.0 / std::sqrt(spec.s() * L));
    double dmax = 0.0;
    for (std::size_t l = 0; l < spec.layers(); ++l)
        dmax = std::max(dmax, spec.d(l));
    const double beta_sq = std::max(dmax / spec.s(), static_cast<double>(spec.k()));
    return {alpha, alpha * alpha / beta_sq};
}

/// Constants for a rows x cols argument. Vector norms use d = rows * cols.
inline CompressorConstants compressor_constants(const NormSpec& spec, std::size_t rows, std::size_t cols) {
    using detail::overloaded;
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("compressor_constants: dimensions must be positive");
    const double d = static_cast<double>(rows * cols);
    const double r = static_cast<double>(std::min(rows, cols));
    return std::visit(overloaded{
                          [&](const L1Norm&) { return CompressorConstants{1.0, 1.0 / d}; },
                          [&](const L2Norm&) { return CompressorConstants{1.0, 1.0}; },
                          [&](const LinfNorm&) { return CompressorConstants{1.0 / std::sqrt(d), 1.0 / d}; },
                          [&](const LpNorm& n) {
                              const double e = 1.0 / n.p - 0.5;
                              return CompressorConstants{std::pow(d, std::min(0.0, e)), std::pow(d, -2.0 * std::abs(e))};
                          },
                          [&](const OperatorNorm&) { return CompressorConstants{1.0 / std::sqrt(r), 1.0 / r}; },
                          [&](const NuclearNorm&) { return CompressorConstants{1.0, 1.0 / r}; },
                          [&](const ProductNormSpec& p) { return compressor_constants(p); },
                      },
                      spec.variant());
}

/// LMO compressor C(W) = alpha^2 |W|_* LMO(W). The L2 case is the identity.
inline Matrix compress(const Matrix& w, const NormSpec& spec, const PolarOptions& opts = {}) {
    if (std::holds_alternative<L2Norm>(spec.variant()))
        return w;
    if (const auto* lp = std::get_if<LpNorm>(&spec.variant()); lp && lp->p == 2.0)
        return w;
    const auto c = compressor_constants(spec, w.rows(), w.cols());
    auto [dual, lmo] = detail::matrix_dual_and_lmo(w, spec, opts);
    return (c.alpha * c.alpha * dual) * std::move(lmo);
}

/// Product compressor min{s, 1/L} (y/sqrt(d_l) polar(W^l), ..., |theta|_1/(sk) sign(theta)).
inline ParamPoint compress(const ParamPoint& w, const ProductNormSpec& spec, const PolarOptions& opts = {}) {
    auto parts = detail::product_parts(w, spec, opts);
    const double scale = std::min(spec.s(), 1.0 / static_cast<double>(spec.layers()));
    ParamPoint out = spec.zeros();
    for (std::size_t l = 0; l < spec.layers(); ++l)
        out.matrices[l] = (scale * parts.y / std::sqrt(spec.d(l))) * std::move(parts.polars[l]);
    out.theta = (scale * parts.theta_l1 / (spec.s() * static_cast<double>(spec.k()))) * sign_elementwise(w.theta);
    return out;
}

inline ParamPoint compress(const ParamPoint& w, const NormSpec& spec, const PolarOptions& opts = {}) {
    return compress(w, spec.product_spec(), opts);
}

}  // namespace efmuon

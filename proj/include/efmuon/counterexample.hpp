#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "efmuon/linalg.hpp"
#include "efmuon/matrix.hpp"
#include "efmuon/optim.hpp"
#include "efmuon/param_point.hpp"
#include "efmuon/schedule.hpp"

namespace efmuon {

/// Which element of the subdifferential of |.| is returned at a kink.
struct SubgradientSelection {
    enum class Kind { FrameworkZero, FixedSign };
    Kind kind = Kind::FrameworkZero;
    double kink_sign = 1.0;  // used by FixedSign, +1 or -1

    static SubgradientSelection framework_zero() { return {}; }
    static SubgradientSelection fixed_sign(double s) {
        if (s != 1.0 && s != -1.0)
            throw std::invalid_argument("SubgradientSelection: kink sign must be +1 or -1");
        return {Kind::FixedSign, s};
    }

    double operator()(double x) const noexcept {
        if (x != 0.0)
            return x > 0.0 ? 1.0 : -1.0;
        return kind == Kind::FrameworkZero ? 0.0 : kink_sign;
    }
};

/// f(W) = c |W11 + W22| + |W11 - W22| on m x n matrices, m, n >= 2.
/// Convex, sqrt(2(1+c^2))-Lipschitz, inf f = 0, minimized iff W11 = W22 = 0.
class KinkyFunction {
public:
    explicit KinkyFunction(double c, std::size_t m = 2, std::size_t n = 2) : c_{c}, m_{m}, n_{n} {
        if (!(c > 0.0 && c < 1.0))
            throw std::invalid_argument("KinkyFunction: c must lie in (0, 1), got " + std::to_string(c));
        if (m < 2 || n < 2)
            throw std::invalid_argument("KinkyFunction: shape must be at least 2x2");
    }

    double c() const noexcept { return c_; }
    std::size_t rows() const noexcept { return m_; }
    std::size_t cols() const noexcept { return n_; }

    double diag_value(double w1, double w2) const noexcept { return c_ * std::abs(w1 + w2) + std::abs(w1 - w2); }

    double value(const Matrix& W) const {
        require_shape(W);
        return diag_value(W(0, 0), W(1, 1));
    }

    /// Diagonal part (c s1 + s2, c s1 - s2) of a subgradient with
    /// s1 in Sign(w1 + w2), s2 in Sign(w1 - w2).
    std::pair<double, double> diag_subgradient(double w1, double w2,
                                               SubgradientSelection sel = SubgradientSelection::framework_zero()) const {
        const double s1 = sel(w1 + w2);
        const double s2 = sel(w1 - w2);
        return {c_ * s1 + s2, c_ * s1 - s2};
    }

    Matrix subgradient(const Matrix& W, SubgradientSelection sel = SubgradientSelection::framework_zero()) const {
        require_shape(W);
        const auto [g1, g2] = diag_subgradient(W(0, 0), W(1, 1), sel);
        Matrix G(m_, n_);
        G(0, 0) = g1;
        G(1, 1) = g2;
        return G;
    }

    /// Distance from W to the nearest minimizer (zero out the two diagonal entries).
    double distance_to_minimizers(const Matrix& W) const {
        require_shape(W);
        return std::hypot(W(0, 0), W(1, 1));
    }

    Oracle<Matrix> oracle(SubgradientSelection sel = SubgradientSelection::framework_zero()) const {
        return {[f = *this](const Matrix& W) { return f.value(W); },
                [f = *this, sel](const Matrix& W) { return f.subgradient(W, sel); }};
    }

    /// Oracle on a product space that applies f to the first matrix block.
    Oracle<ParamPoint> product_oracle(SubgradientSelection sel = SubgradientSelection::framework_zero()) const {
        return {[f = *this](const ParamPoint& W) { return f.value(W.matrices.at(0)); },
                [f = *this, sel](const ParamPoint& W) {
                    ParamPoint G = zeros_like(W);
                    G.matrices.at(0) = f.subgradient(W.matrices.at(0), sel);
                    return G;
                }};
    }

private:
    void require_shape(const Matrix& W) const {
        if (W.rows() != m_ || W.cols() != n_)
            throw std::invalid_argument("KinkyFunction: expected a " + std::to_string(m_) + "x" + std::to_string(n_) +
                                        " argument");
    }

    double c_;
    std::size_t m_;
    std::size_t n_;
};

/// Lipschitz constant sqrt(2 (1 + c^2)) of the kinky function.
inline double lipschitz_bound(double c) {
    if (!(c >= 0.0 && c <= 1.0))
        throw std::invalid_argument("lipschitz_bound: c must lie in [0, 1]");
    return std::sqrt(2.0 * (1.0 + c * c));
}

namespace cex {
inline constexpr double default_tail_tol = 1e-12;
inline constexpr std::size_t default_horizon = 5000;
}  // namespace cex

namespace detail {

// Sum_{s>=0} (-1)^s a_s for a nonnegative nonincreasing sequence, by explicit
// partial sums followed by repeated averaging of consecutive partial sums
// (Euler transform of the tail).
template <class Term>
double alternating_sum(const Term& a, std::size_t head, std::size_t levels) {
    std::vector<double> partial(levels + 1);
    double s = 0.0;
    for (std::size_t i = 0; i < head; ++i)
        s += (i % 2 == 0 ? a(i) : -a(i));
    for (std::size_t j = 0; j <= levels; ++j) {
        partial[j] = s;
        const std::size_t i = head + j;
        s += (i % 2 == 0 ? a(i) : -a(i));
    }
    for (std::size_t lvl = levels; lvl > 0; --lvl)
        for (std::size_t j = 0; j < lvl; ++j)
            partial[j] = 0.5 * (partial[j] + partial[j + 1]);
    return partial[0];
}

}  // namespace detail

/// R_t = lambda/2 + sum_{s>=0} (-1)^s (lambda_{t+s} - lambda) for a nonincreasing
/// schedule with limit lambda. The alternating tail is summed exactly when the
/// schedule settles, and otherwise accelerated until two resolutions agree to
/// within tail_tol.
inline double compute_R(const StepSchedule& schedule, std::size_t t, double tail_tol = cex::default_tail_tol) {
    if (!schedule.nonincreasing())
        throw std::invalid_argument("compute_R: schedule must be offline and nonincreasing");
    if (!(tail_tol > 0.0))
        throw std::invalid_argument("compute_R: tail_tol must be positive");
    const double lim = schedule.limit();
    auto term = [&](std::size_t s) { return schedule.at(t + s) - lim; };

    if (const auto settle = schedule.settles_at()) {
        double sum = 0.0;
        for (std::size_t s = 0; t + s < *settle; ++s)
            sum += (s % 2 == 0 ? term(s) : -term(s));
        return lim / 2.0 + sum;
    }

    constexpr std::size_t levels = 24;
    constexpr std::size_t max_head = std::size_t{1} << 20;
    double prev = detail::alternating_sum(term, 16, levels);
    for (std::size_t head = 32; head <= max_head; head *= 2) {
        const double cur = detail::alternating_sum(term, head, levels);
        if (std::abs(cur - prev) <= tail_tol)
            return lim / 2.0 + cur;
        prev = cur;
    }
    throw NumericalError("compute_R: alternating tail did not reach tolerance " + std::to_string(tail_tol) +
                         " at t=" + std::to_string(t));
}

/// Parameters of a first-counterexample initialization
///   w_0 = r (1, 1) + (R_0 + delta) (1, -1).
struct Cex1Init {
    double beta = 0.0;
    StepSchedule schedule = StepSchedule::inv_t();
    double r = 1.0;
    double delta = 0.0;
    double lambda_inf = 0.0;
    double R0 = 0.0;
    double tail_tol = cex::default_tail_tol;
};

struct Cex1Setup {
    KinkyFunction f;
    Matrix W0;
    Cex1Init init;
};

/// Raised when |delta| < R_t fails; carries the first violating t, or
/// nullopt when the violation only happens in the limit.
class InfeasibleInit : public std::invalid_argument {
public:
    InfeasibleInit(const std::string& msg, std::optional<std::size_t> t) : std::invalid_argument(msg), t_{t} {}
    std::optional<std::size_t> violated_t() const noexcept { return t_; }

private:
    std::optional<std::size_t> t_;
};

/// Builds f with c = (1 - beta)/2 and W_0 whose diagonal part is
/// (r + R_0 + delta, r - R_0 - delta). Feasibility |delta| < R_t is checked for
/// t <= horizon; beyond it R_t >= lambda/2 covers the tail when lambda > 0, and
/// delta must vanish when lambda = 0.
inline Cex1Setup cex1_build(double beta, const StepSchedule& schedule, double r, double delta,
                            std::size_t horizon = cex::default_horizon, std::size_t m = 2, std::size_t n = 2,
                            double tail_tol = cex::default_tail_tol) {
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::invalid_argument("cex1_build: beta must lie in [0, 1)");
    if (!(r >= 1.0))
        throw std::invalid_argument("cex1_build: r must be >= 1");
    if (!schedule.nonincreasing())
        throw std::invalid_argument("cex1_build: schedule must be offline and nonincreasing");
    const double lim = schedule.limit();

    // R_t via the recursion R_{t+1} = lambda_t - R_t, re-anchored on the series
    // every 64 steps so rounding cannot accumulate.
    double R = compute_R(schedule, 0, tail_tol);
    const double R0 = R;
    for (std::size_t t = 0; t <= horizon; ++t) {
        if (t % 64 == 0)
            R = compute_R(schedule, t, tail_tol);
        if (!(std::abs(delta) < R))
            throw InfeasibleInit("cex1_build: |delta| = " + std::to_string(std::abs(delta)) + " >= R_" +
                                     std::to_string(t) + " = " + std::to_string(R),
                                 t);
        R = schedule.at(t) - R;
    }
    if (lim == 0.0 && delta != 0.0)
        throw InfeasibleInit("cex1_build: delta must be zero when the stepsizes vanish (R_t -> 0)", std::nullopt);

    KinkyFunction f((1.0 - beta) / 2.0, m, n);
    Matrix W0(m, n);
    W0(0, 0) = r + R0 + delta;
    W0(1, 1) = r - R0 - delta;
    return {f, W0, Cex1Init{beta, schedule, r, delta, lim, R0, tail_tol}};
}

/// Closed-form iterate w_t = r (1, 1) + (delta + (-1)^t R_t) (1, -1).
inline std::pair<double, double> cex1_predicted_iterate(const Cex1Init& init, std::size_t t) {
    const double Rt = compute_R(init.schedule, t, init.tail_tol);
    const double shift = init.delta + (t % 2 == 0 ? Rt : -Rt);
    return {init.r + shift, init.r - shift};
}

struct PQ {
    double p;
    double q;
};

/// p_t = W11 + W22 and q_t = W11 - W22 along a trace.
template <class P>
std::vector<PQ> cex2_track(const Trace<P>& trace) {
    std::vector<PQ> out;
    out.reserve(trace.rows.size());
    for (const auto& row : trace.rows)
        out.push_back({row.p(), row.q()});
    return out;
}

/// max_t |q_{t+1} - q_t + 2 lambda_t sign(q_t)| using the effective steps in the trace.
template <class P>
double cex2_recursion_residual(const Trace<P>& trace) {
    double worst = 0.0;
    for (std::size_t t = 0; t + 1 < trace.rows.size(); ++t) {
        const auto& a = trace.rows[t];
        const auto& b = trace.rows[t + 1];
        worst = std::max(worst, std::abs(b.q() - a.q() + 2.0 * a.lambda * sign(a.q())));
    }
    return worst;
}

enum class Cex2Method { Muon, RegMuon };

/// Finite-horizon version of W_0 avoiding the exceptional set: p_0 != 0 and
/// q_t != 0 for every t <= T along the actual run on f with c = 1/2 - beta.
inline bool cex2_guard_check(const Matrix& W0, const StepSchedule& schedule, std::size_t T, double beta,
                             Cex2Method method = Cex2Method::Muon) {
    if (!(beta >= 0.0 && beta < 0.5))
        throw std::invalid_argument("cex2_guard_check: beta must lie in [0, 1/2)");
    if (W0(0, 0) + W0(1, 1) == 0.0 || W0(0, 0) - W0(1, 1) == 0.0)
        return false;
    const KinkyFunction f(0.5 - beta, W0.rows(), W0.cols());
    RunConfig cfg;
    cfg.method = method == Cex2Method::Muon ? Method::Muon : Method::RegMuon;
    const auto trace = run(cfg, f.oracle(), make_state(W0, beta, schedule), T);
    for (const auto& row : trace.rows)
        if (row.q() == 0.0 || row.p() == 0.0)
            return false;
    return true;
}

}  // namespace efmuon

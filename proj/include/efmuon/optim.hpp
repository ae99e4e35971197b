#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "efmuon/linalg.hpp"
#include "efmuon/matrix.hpp"
#include "efmuon/norms.hpp"
#include "efmuon/param_point.hpp"
#include "efmuon/schedule.hpp"

namespace efmuon {

/// First-order oracle: objective value and a (possibly stochastic) subgradient.
template <class P>
struct Oracle {
    std::function<double(const P&)> value;
    std::function<P(const P&)> subgradient;
};

template <class P>
struct OptimizerState {
    P W;
    P M;  // momentum, M_{-1} = 0
    P E;  // error feedback memory, E_0 = 0
    std::size_t t = 0;
    double beta = 0.0;
    StepSchedule schedule = StepSchedule::constant(1.0);
    PolarOptions polar{};
    /// Optional per-step momentum override beta_t.
    std::function<double(std::size_t)> beta_at{};

    double beta_now() const { return beta_at ? beta_at(t) : beta; }
};

template <class P>
OptimizerState<P> make_state(P W0, double beta, StepSchedule schedule, PolarOptions polar = {}) {
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::invalid_argument("OptimizerState: beta must lie in [0, 1)");
    if (!W0.all_finite())
        throw std::invalid_argument("OptimizerState: non-finite initial point");
    OptimizerState<P> s{.W = W0, .M = zeros_like(W0), .E = zeros_like(W0), .t = 0, .beta = beta,
                        .schedule = std::move(schedule), .polar = polar};
    return s;
}

/// What happened during one step, evaluated at the pre-step iterate W_t.
struct StepInfo {
    double lambda = 0.0;  // schedule output lambda_t
    double step = 0.0;    // multiplier applied to the normalized direction
    double value = 0.0;   // f(W_t)
    double grad_fro = 0.0;
};

template <class P>
struct Stepped {
    OptimizerState<P> state;
    StepInfo info;
};

enum class Method { SpecGD, Muon, RegMuon, SignGD, SignMomentum, EFM, EFMuon, MuonMax, EFMuonMax };

inline const char* method_name(Method m) {
    switch (m) {
    case Method::SpecGD: return "specgd";
    case Method::Muon: return "muon";
    case Method::RegMuon: return "regmuon";
    case Method::SignGD: return "signgd";
    case Method::SignMomentum: return "signmomentum";
    case Method::EFM: return "efm";
    case Method::EFMuon: return "efmuon";
    case Method::MuonMax: return "muonmax";
    case Method::EFMuonMax: return "efmuonmax";
    }
    return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
    for (Method m : {Method::SpecGD, Method::Muon, Method::RegMuon, Method::SignGD, Method::SignMomentum, Method::EFM,
                     Method::EFMuon, Method::MuonMax, Method::EFMuonMax})
        if (s == method_name(m))
            return m;
    return std::nullopt;
}

/// How EF-Muon refreshes its error memory: E' = P - C(P), or the equivalent
/// E' = E + W' - (W - lambda M).
enum class EfErrorForm { Residual, IterateDifference };

template <class P>
using Compressor = std::function<P(const P&)>;

template <class P>
Compressor<P> identity_compressor() {
    return [](const P& x) { return x; };
}

inline Compressor<Matrix> lmo_compressor(NormSpec spec, PolarOptions opts = {}) {
    return [spec = std::move(spec), opts](const Matrix& x) { return compress(x, spec, opts); };
}

inline Compressor<ParamPoint> lmo_compressor(ProductNormSpec spec, PolarOptions opts = {}) {
    return [spec = std::move(spec), opts](const ParamPoint& x) { return compress(x, spec, opts); };
}

namespace detail {

template <class P>
struct Evaluated {
    P grad;
    StepInfo info;
};

template <class P>
Evaluated<P> evaluate(const OptimizerState<P>& s, const Oracle<P>& oracle) {
    Evaluated<P> e{oracle.subgradient(s.W), {}};
    s.W.require_same_shape(e.grad, "oracle subgradient");
    e.info.value = oracle.value(s.W);
    e.info.grad_fro = frobenius(e.grad);
    return e;
}

template <class P>
void update_momentum(OptimizerState<P>& s, const P& grad) {
    const double b = s.beta_now();
    if (!(b >= 0.0 && b < 1.0))
        throw std::invalid_argument("momentum: beta_t outside [0, 1)");
    s.M *= b;
    s.M += (1.0 - b) * grad;
}

inline double schedule_value(const OptimizerState<Matrix>& s, std::optional<double> nuclear = std::nullopt) {
    if (s.schedule.needs_nuclear() && !nuclear)
        nuclear = norm(s.M, NormKind::nuclear());
    return s.schedule.at(s.t, s.M, nuclear);
}

inline double schedule_value(const OptimizerState<ParamPoint>& s) {
    if (s.schedule.adaptive())
        throw std::invalid_argument("adaptive schedules are defined for single-matrix iterates only");
    return s.schedule.at(s.t);
}

// Shared body of Muon and regMuon: one polar evaluation of M_t per step.
inline Stepped<Matrix> spectral_momentum_step(OptimizerState<Matrix> s, const Oracle<Matrix>& oracle,
                                              bool nuclear_scaled) {
    auto [grad, info] = evaluate(s, oracle);
    update_momentum(s, grad);
    auto pn = polar_with_nuclear(s.M, s.polar);
    info.lambda = schedule_value(s, pn.nuclear);
    info.step = nuclear_scaled ? info.lambda * pn.nuclear : info.lambda;
    s.W -= info.step * pn.polar;
    ++s.t;
    return {std::move(s), info};
}

}  // namespace detail

/// Spectral subgradient descent: W' = W - lambda_t polar(G_t).
inline Stepped<Matrix> step_specgd(OptimizerState<Matrix> s, const Oracle<Matrix>& oracle) {
    auto [grad, info] = detail::evaluate(s, oracle);
    auto pn = polar_with_nuclear(grad, s.polar);
    s.M = grad;
    info.lambda = detail::schedule_value(s, pn.nuclear);
    info.step = info.lambda;
    s.W -= info.step * pn.polar;
    ++s.t;
    return {std::move(s), info};
}

/// Muon with Polyak momentum: M_t = beta M_{t-1} + (1-beta) G_t, W' = W - lambda_t polar(M_t).
inline Stepped<Matrix> step_muon(OptimizerState<Matrix> s, const Oracle<Matrix>& oracle) {
    return detail::spectral_momentum_step(std::move(s), oracle, false);
}

/// Regularized Muon: W' = W - lambda_t |M_t|_nuc polar(M_t).
inline Stepped<Matrix> step_regmuon(OptimizerState<Matrix> s, const Oracle<Matrix>& oracle) {
    return detail::spectral_momentum_step(std::move(s), oracle, true);
}

inline Stepped<Matrix> step_signgd(OptimizerState<Matrix> s, const Oracle<Matrix>& oracle) {
    auto [grad, info] = detail::evaluate(s, oracle);
    s.M = grad;
    info.lambda = detail::schedule_value(s);
    info.step = info.lambda;
    s.W -= info.step * sign_elementwise(grad);
    ++s.t;
    return {std::move(s), info};
}

inline Stepped<Matrix> step_signmomentum(OptimizerState<Matrix> s, const Oracle<Matrix>& oracle) {
    auto [grad, info] = detail::evaluate(s, oracle);
    detail::update_momentum(s, grad);
    info.lambda = detail::schedule_value(s);
    info.step = info.lambda;
    s.W -= info.step * sign_elementwise(s.M);
    ++s.t;
    return {std::move(s), info};
}

/// Error feedback with momentum:
///   P_t = E_t + lambda_t M_t,  W' = W - C(P_t),  E' = P_t - C(P_t).
template <class P>
Stepped<P> step_efm(OptimizerState<P> s, const Oracle<P>& oracle, const Compressor<P>& compressor) {
    auto [grad, info] = detail::evaluate(s, oracle);
    detail::update_momentum(s, grad);
    info.lambda = detail::schedule_value(s);
    info.step = info.lambda;
    P message = s.E + info.lambda * s.M;
    P compressed = compressor(message);
    s.W -= compressed;
    s.E = std::move(message) - compressed;
    ++s.t;
    return {std::move(s), info};
}

/// EF-Muon: EF-M with C(P) = (1/min(m,n)) |P|_nuc polar(P).
inline Stepped<Matrix> step_efmuon(OptimizerState<Matrix> s, const Oracle<Matrix>& oracle,
                                   EfErrorForm form = EfErrorForm::Residual) {
    if (form == EfErrorForm::Residual) {
        const auto comp = lmo_compressor(NormSpec::op(), s.polar);
        return step_efm(std::move(s), oracle, comp);
    }

    auto [grad, info] = detail::evaluate(s, oracle);
    detail::update_momentum(s, grad);
    info.lambda = detail::schedule_value(s);
    info.step = info.lambda;
    const Matrix message = s.E + info.lambda * s.M;
    const Matrix W_prev = s.W;
    s.W -= compress(message, NormSpec::op(), s.polar);
    s.E += s.W - (W_prev - info.lambda * s.M);
    ++s.t;
    return {std::move(s), info};
}

/// MuonMax: W' = W - lambda_t |M_t|_* LMO(M_t) under the product norm.
inline Stepped<ParamPoint> step_muonmax(OptimizerState<ParamPoint> s, const Oracle<ParamPoint>& oracle,
                                        const ProductNormSpec& spec) {
    spec.require_match(s.W, "step_muonmax");
    auto [grad, info] = detail::evaluate(s, oracle);
    detail::update_momentum(s, grad);
    info.lambda = detail::schedule_value(s);
    info.step = info.lambda;
    const double dual = dual_norm(s.M, spec, s.polar);
    s.W -= (info.lambda * dual) * lmo_min(s.M, spec, s.polar);
    ++s.t;
    return {std::move(s), info};
}

/// EF-MuonMax: EF-M with the product-norm compressor.
inline Stepped<ParamPoint> step_efmuonmax(OptimizerState<ParamPoint> s, const Oracle<ParamPoint>& oracle,
                                          const ProductNormSpec& spec) {
    spec.require_match(s.W, "step_efmuonmax");
    const auto comp = lmo_compressor(spec, s.polar);
    return step_efm(std::move(s), oracle, comp);
}

/// General-schedule bound on E f(avg W_T) - f* for EF-M with nonincreasing
/// stepsizes lambda_0..lambda_T.
inline double efm_bound_general(std::span<const double> lambdas, double delta, double beta, double sigma,
                                double dist0) {
    if (lambdas.empty())
        throw std::invalid_argument("efm_bound: empty stepsize sequence");
    if (!(delta > 0.0 && delta <= 1.0) || !(beta >= 0.0 && beta < 1.0) || !(sigma >= 0.0) || !(dist0 >= 0.0))
        throw std::invalid_argument("efm_bound: parameters outside their domain");
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0))
            throw std::invalid_argument("efm_bound: stepsizes must be positive");
        if (i > 0 && lambdas[i] > lambdas[i - 1])
            throw std::invalid_argument("efm_bound: stepsizes must be nonincreasing");
        sum_sq += lambdas[i] * lambdas[i];
    }
    const double denom = lambdas.back() * static_cast<double>(lambdas.size());
    const double coef = 2.0 * std::sqrt(1.0 - delta) / delta + beta / (1.0 - beta) + 0.5;
    return dist0 * dist0 / (2.0 * denom) + sigma * sigma * coef * sum_sq / denom;
}

/// Anytime bound for lambda_t = 1/sqrt(t+1):
///   dist0^2 / (2 sqrt(T+1)) + sigma^2 (2 sqrt(1-delta)/delta + beta/(1-beta) + 1/2) (1 + log(T+1)) / sqrt(T+1).
inline double efm_bound(std::size_t T, double delta, double beta, double sigma, double dist0) {
    if (!(delta > 0.0 && delta <= 1.0) || !(beta >= 0.0 && beta < 1.0) || !(sigma >= 0.0) || !(dist0 >= 0.0))
        throw std::invalid_argument("efm_bound: parameters outside their domain");
    const double n = static_cast<double>(T) + 1.0;
    const double coef = 2.0 * std::sqrt(1.0 - delta) / delta + beta / (1.0 - beta) + 0.5;
    return dist0 * dist0 / (2.0 * std::sqrt(n)) + sigma * sigma * coef * (1.0 + std::log(n)) / std::sqrt(n);
}

struct TraceRow {
    std::size_t t = 0;
    double lambda = 0.0;  // effective step multiplier (lambda_t |M_t|_nuc for regMuon)
    double f = 0.0;
    double w11 = 0.0;
    double w22 = 0.0;
    double grad_fro = 0.0;
    double favg = 0.0;  // f of the running-average iterate
    double bound = std::numeric_limits<double>::quiet_NaN();

    double p() const noexcept { return w11 + w22; }
    double q() const noexcept { return w11 - w22; }
};

template <class P>
struct Trace {
    std::vector<TraceRow> rows;
    P average;                         // running mean of W_0..W_T
    double grad_second_moment = 0.0;   // empirical mean of |G_t|_F^2
    double max_momentum_excess = 0.0;  // max_t (|M_t|_F - max_{i<=t} |G_i|_F), <= 0 up to rounding

    std::size_t size() const noexcept { return rows.size(); }
};

struct BoundParams {
    double delta;
    double sigma;
    double dist0;
};

struct RunConfig {
    Method method = Method::Muon;
    /// Compressor norm for EF-M on single matrices; identity when empty.
    std::optional<NormSpec> norm{};
    /// Required by MuonMax / EF-MuonMax.
    std::optional<ProductNormSpec> product{};
    EfErrorForm ef_form = EfErrorForm::Residual;
    /// When set, each row carries the EF-M bound for the prefix 0..t.
    std::optional<BoundParams> bound{};
};

namespace detail {

inline std::pair<double, double> readout(const Matrix& w) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {w.rows() > 0 && w.cols() > 0 ? w(0, 0) : nan, w.rows() > 1 && w.cols() > 1 ? w(1, 1) : nan};
}

inline std::pair<double, double> readout(const ParamPoint& w) {
    return w.matrices.empty() ? readout(Matrix{}) : readout(w.matrices.front());
}

inline Stepped<Matrix> dispatch(const RunConfig& cfg, OptimizerState<Matrix> s, const Oracle<Matrix>& oracle) {
    switch (cfg.method) {
    case Method::SpecGD: return step_specgd(std::move(s), oracle);
    case Method::Muon: return step_muon(std::move(s), oracle);
    case Method::RegMuon: return step_regmuon(std::move(s), oracle);
    case Method::SignGD: return step_signgd(std::move(s), oracle);
    case Method::SignMomentum: return step_signmomentum(std::move(s), oracle);
    case Method::EFM: {
        const auto comp = cfg.norm ? lmo_compressor(*cfg.norm, s.polar) : identity_compressor<Matrix>();
        return step_efm(std::move(s), oracle, comp);
    }
    case Method::EFMuon: return step_efmuon(std::move(s), oracle, cfg.ef_form);
    case Method::MuonMax:
    case Method::EFMuonMax:
        throw std::invalid_argument(std::string(method_name(cfg.method)) + " requires a product-space iterate");
    }
    throw std::invalid_argument("unknown method");
}

inline Stepped<ParamPoint> dispatch(const RunConfig& cfg, OptimizerState<ParamPoint> s,
                                    const Oracle<ParamPoint>& oracle) {
    switch (cfg.method) {
    case Method::MuonMax:
    case Method::EFMuonMax:
        if (!cfg.product)
            throw std::invalid_argument(std::string(method_name(cfg.method)) + " requires a product norm spec");
        return cfg.method == Method::MuonMax ? step_muonmax(std::move(s), oracle, *cfg.product)
                                             : step_efmuonmax(std::move(s), oracle, *cfg.product);
    case Method::EFM: {
        const auto comp = cfg.product ? lmo_compressor(*cfg.product, s.polar) : identity_compressor<ParamPoint>();
        return step_efm(std::move(s), oracle, comp);
    }
    default:
        throw std::invalid_argument(std::string(method_name(cfg.method)) + " requires a single-matrix iterate");
    }
}

}  // namespace detail

/// Runs T steps and records T + 1 rows, one per iterate W_0..W_T. The final
/// row is evaluated with the same step rule but the resulting state is dropped.
template <class P>
Trace<P> run(const RunConfig& cfg, const Oracle<P>& oracle, OptimizerState<P> state, std::size_t T,
             OptimizerState<P>* final_state = nullptr) {
    Trace<P> trace;
    trace.rows.reserve(T + 1);
    trace.average = state.W;
    std::vector<double> lambdas;
    lambdas.reserve(T + 1);
    bool lambdas_monotone = true;
    double max_grad = 0.0;
    double sum_grad_sq = 0.0;

    for (std::size_t t = 0; t <= T; ++t) {
        Stepped<P> next;
        try {
            next = detail::dispatch(cfg, state, oracle);
        } catch (const NumericalError& e) {
            throw NumericalError("step " + std::to_string(t) + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("step " + std::to_string(t) + ": " + e.what());
        }
        if (t > 0)
            trace.average += (1.0 / static_cast<double>(t + 1)) * (state.W - trace.average);

        TraceRow row;
        row.t = t;
        row.lambda = next.info.step;
        row.f = next.info.value;
        std::tie(row.w11, row.w22) = detail::readout(state.W);
        row.grad_fro = next.info.grad_fro;
        row.favg = oracle.value(trace.average);

        if (!lambdas.empty() && next.info.lambda > lambdas.back())
            lambdas_monotone = false;
        lambdas.push_back(next.info.lambda);
        if (cfg.bound && lambdas_monotone && next.info.lambda > 0.0) {
            const auto& b = *cfg.bound;
            row.bound = std::holds_alternative<InvSqrtTStep>(state.schedule.variant())
                            ? efm_bound(t, b.delta, state.beta, b.sigma, b.dist0)
                            : efm_bound_general(lambdas, b.delta, state.beta, b.sigma, b.dist0);
        }

        max_grad = std::max(max_grad, next.info.grad_fro);
        sum_grad_sq += next.info.grad_fro * next.info.grad_fro;
        trace.max_momentum_excess = std::max(trace.max_momentum_excess, frobenius(next.state.M) - max_grad);
        trace.rows.push_back(row);
        if (t < T)
            state = std::move(next.state);
    }
    trace.grad_second_moment = sum_grad_sq / static_cast<double>(T + 1);
    if (final_state)
        *final_state = std::move(state);
    return trace;
}

}  // namespace efmuon

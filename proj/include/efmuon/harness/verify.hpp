#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "efmuon/counterexample.hpp"
#include "efmuon/harness/experiment.hpp"
#include "efmuon/linalg.hpp"
#include "efmuon/norms.hpp"
#include "efmuon/optim.hpp"
#include "efmuon/random.hpp"
#include "efmuon/schedule.hpp"

namespace efmuon::harness {

/// One property check: `observed relation required` must hold.
struct Check {
    std::string name;
    double observed = 0.0;
    std::string relation;  // "<=", ">=", "<", "=="
    double required = 0.0;
    bool passed = false;
};

inline Check make_check(std::string name, double observed, const std::string& relation, double required) {
    bool ok = false;
    if (relation == "<=") ok = observed <= required;
    else if (relation == "<") ok = observed < required;
    else if (relation == ">=") ok = observed >= required;
    else if (relation == ">") ok = observed > required;
    else if (relation == "==") ok = observed == required;
    else throw std::invalid_argument("make_check: unknown relation " + relation);
    return {std::move(name), observed, relation, required, ok};
}

struct Report {
    std::string suite;
    std::vector<Check> checks;

    bool passed() const {
        return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }
    void add(Check c) { checks.push_back(std::move(c)); }
};

inline void print_report(std::ostream& os, const Report& r) {
    char buf[512];
    for (const auto& c : r.checks) {
        std::snprintf(buf, sizeof buf, "[%s] %-4s %-58s observed %.6g %s required %.6g\n", r.suite.c_str(),
                      c.passed ? "ok" : "FAIL", c.name.c_str(), c.observed, c.relation.c_str(), c.required);
        os << buf;
    }
    os << "[" << r.suite << "] " << (r.passed() ? "passed" : "FAILED") << " (" << r.checks.size() << " checks)\n";
}

inline std::vector<std::string> suite_names() {
    return {"reduction", "compressor", "lmo", "cex1", "cex2", "ef-bound", "polar"};
}

// ---------------------------------------------------------------- reduction

struct ReductionParams {
    std::size_t trials = 50;
    std::size_t steps = 100;
    double tol = 1e-12;
    std::uint64_t seed = 1;
};

/// Muon on diagonal oracles against signed momentum on the diagonal vector.
inline Report verify_reduction(const ReductionParams& p = {}) {
    Report rep{"reduction", {}};
    Rng rng(p.seed);
    double worst_diag = 0.0;
    double worst_off = 0.0;
    std::size_t runs = 0;
    for (std::size_t trial = 0; trial < p.trials; ++trial) {
        const std::size_t m = uniform_index(rng, 2, 6);
        const std::size_t n = uniform_index(rng, 2, 6);
        const std::size_t d = std::min(m, n);
        std::vector<double> a(d), b(d), e(d);
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = uniform(rng, 0.5, 2.0);
            b[i] = uniform(rng, -1.0, 1.0);
            e[i] = uniform(rng, -0.3, 0.3);
        }
        auto g = [a, b, e](std::size_t i, double w) { return a[i] * sign(w - b[i]) + e[i] * w; };
        auto val = [a, b, e](std::size_t i, double w) { return a[i] * std::abs(w - b[i]) + 0.5 * e[i] * w * w; };
        const Oracle<Matrix> mat_oracle{[=](const Matrix& W) {
                                            double s = 0.0;
                                            for (std::size_t i = 0; i < d; ++i)
                                                s += val(i, W(i, i));
                                            return s;
                                        },
                                        [=](const Matrix& W) {
                                            Matrix G(W.rows(), W.cols());
                                            for (std::size_t i = 0; i < d; ++i)
                                                G(i, i) = g(i, W(i, i));
                                            return G;
                                        }};
        const Oracle<Matrix> vec_oracle{[=](const Matrix& w) {
                                            double s = 0.0;
                                            for (std::size_t i = 0; i < d; ++i)
                                                s += val(i, w(i, 0));
                                            return s;
                                        },
                                        [=](const Matrix& w) {
                                            Matrix G(d, 1);
                                            for (std::size_t i = 0; i < d; ++i)
                                                G(i, 0) = g(i, w(i, 0));
                                            return G;
                                        }};

        std::vector<double> w0(d);
        for (double& x : w0)
            x = uniform(rng, -2.0, 2.0);
        const double beta = uniform(rng, 0.0, 0.95);
        StepSchedule sched = StepSchedule::inv_t();
        switch (trial % 4) {
        case 0: sched = StepSchedule::constant(uniform(rng, 0.01, 0.5)); break;
        case 1: sched = StepSchedule::inv_t(); break;
        case 2: sched = StepSchedule::inv_sqrt_t(); break;
        default: {
            std::vector<double> tb(p.steps);
            for (double& x : tb)
                x = uniform(rng, 0.001, 0.3);
            sched = StepSchedule::table(std::move(tb));
        }
        }

        auto sm = make_state(Matrix::diagonal(m, n, w0), beta, sched);
        auto sv = make_state(Matrix(d, 1, w0), beta, sched);
        for (std::size_t t = 0; t < p.steps; ++t) {
            sm = step_muon(std::move(sm), mat_oracle).state;
            sv = step_signmomentum(std::move(sv), vec_oracle).state;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j)
                        worst_diag = std::max(worst_diag, std::abs(sm.W(i, i) - sv.W(i, 0)));
                    else
                        worst_off = std::max(worst_off, std::abs(sm.W(i, j)));
                }
        }
        ++runs;
    }
    rep.add(make_check("trials completed", static_cast<double>(runs), ">=", static_cast<double>(p.trials)));
    rep.add(make_check("max |diag(W_muon) - w_signum|", worst_diag, "<=", p.tol));
    rep.add(make_check("max |offdiag(W_muon)|", worst_off, "==", 0.0));
    return rep;
}

// ---------------------------------------------------------------- compressor

struct CompressorParams {
    std::size_t trials = 1000;
    double slack = 1e-8;
    std::uint64_t seed = 2;
};

inline std::vector<NormSpec> lmo_norms() {
    return {NormSpec::l1(),      NormSpec::l2(),      NormSpec::linf(), NormSpec::lp(1.5),
            NormSpec::lp(3.0),   NormSpec::nuclear(), NormSpec::op()};
}

namespace detail {

// Mixture of dense Gaussian, low-rank, sign-pattern and sparse inputs.
inline Matrix test_input(Rng& rng, std::size_t m, std::size_t n, std::size_t trial) {
    const double scale = std::pow(10.0, uniform(rng, -1.0, 1.0));
    switch (trial % 4) {
    case 0: return gaussian_matrix(rng, m, n, scale);
    case 1: {
        const Matrix u = gaussian_matrix(rng, m, 1);
        const Matrix v = gaussian_matrix(rng, 1, n);
        return scale * matmul(u, v);
    }
    case 2: return scale * sign_elementwise(gaussian_matrix(rng, m, n));
    default: {
        Matrix w = gaussian_matrix(rng, m, n, scale);
        for (double& x : w.data())
            if (uniform(rng, 0.0, 1.0) < 0.5)
                x = 0.0;
        return w;
    }
    }
}

inline ProductNormSpec random_product_spec(Rng& rng) {
    const std::size_t L = uniform_index(rng, 1, 3);
    std::vector<ProductNormSpec::Dims> dims;
    for (std::size_t l = 0; l < L; ++l)
        dims.push_back({uniform_index(rng, 1, 5), uniform_index(rng, 1, 5)});
    const double s = std::pow(10.0, uniform(rng, -1.0, 1.0));
    return ProductNormSpec(std::move(dims), s, uniform_index(rng, 1, 5));
}

inline ParamPoint random_point(Rng& rng, const ProductNormSpec& spec, std::size_t trial) {
    ParamPoint w = spec.zeros();
    for (std::size_t l = 0; l < spec.layers(); ++l)
        w.matrices[l] = test_input(rng, spec.dims()[l].rows, spec.dims()[l].cols, trial + l);
    w.theta = test_input(rng, spec.k(), 1, trial);
    return w;
}

inline double sq(double x) { return x * x; }

}  // namespace detail

/// Contraction of the LMO compressors, plus the sharper inequality for the product norm.
inline Report verify_compressor(const CompressorParams& p = {}) {
    Report rep{"compressor", {}};
    Rng rng(p.seed);
    for (const auto& spec : lmo_norms()) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t trial = 0; trial < p.trials; ++trial) {
            const Matrix w = detail::test_input(rng, uniform_index(rng, 1, 6), uniform_index(rng, 1, 6), trial);
            const double delta = compressor_constants(spec, w.rows(), w.cols()).delta;
            const double lhs = detail::sq(frobenius(w - compress(w, spec)));
            worst = std::max(worst, lhs - (1.0 - delta) * detail::sq(frobenius(w)));
        }
        rep.add(make_check(spec.name() + ": max |W-C(W)|^2 - (1-delta)|W|^2", worst, "<=", p.slack));
    }
    double worst_sharp = -std::numeric_limits<double>::infinity();
    double worst_delta = -std::numeric_limits<double>::infinity();
    for (std::size_t trial = 0; trial < p.trials; ++trial) {
        const auto spec = detail::random_product_spec(rng);
        const ParamPoint w = detail::random_point(rng, spec, trial);
        const auto k = compressor_constants(spec);
        const double lhs = detail::sq(frobenius(w - compress(w, spec)));
        const double norm_sq = detail::sq(frobenius(w));
        worst_sharp = std::max(worst_sharp, lhs - (norm_sq - k.alpha * k.alpha * detail::sq(dual_norm(w, spec))));
        worst_delta = std::max(worst_delta, lhs - (1.0 - k.delta) * norm_sq);
    }
    rep.add(make_check("product: max |W-C|^2 - (|W|^2 - alpha^2 |W|_*^2)", worst_sharp, "<=", p.slack));
    rep.add(make_check("product: max |W-C|^2 - (1-delta)|W|^2", worst_delta, "<=", p.slack));
    return rep;
}

// ---------------------------------------------------------------- lmo

struct LmoParams {
    std::size_t trials = 1000;
    double pairing_tol = 1e-8;
    double primal_slack = 1e-10;
    std::uint64_t seed = 3;
};

struct LeastNormGridResult {
    std::size_t feasible_maximizers = 0;
    double min_gap = std::numeric_limits<double>::infinity();  // min ||X||_F - ||LMO||_F over grid maximizers
};

/// Grid search around X* = LMO_op(W) over perturbations eps * D, D in {-1,0,1}^9,
/// keeping the points that stay in the unit operator ball and still attain the
/// maximal pairing. The maximizer set is convex, so X* is the least-Frobenius
/// maximizer iff no such point is shorter.
inline LeastNormGridResult operator_least_norm_grid(const Matrix& W) {
    if (W.rows() != 3 || W.cols() != 3)
        throw std::invalid_argument("operator_least_norm_grid: expects 3x3");
    const Matrix X0 = lmo_min(W, NormSpec::op());
    const double dual = dual_norm(W, NormSpec::op());
    const double base = frobenius(X0);
    const double scale = std::max(1.0, frobenius(W));
    LeastNormGridResult out;
    std::vector<double> D(9);
    for (double eps : {0.05, 0.1, 0.25, 0.5}) {
        for (int code = 0; code < 19683; ++code) {
            int c = code;
            bool zero = true;
            for (int i = 0; i < 9; ++i) {
                D[i] = static_cast<double>(c % 3) - 1.0;
                zero = zero && D[i] == 0.0;
                c /= 3;
            }
            if (zero)
                continue;
            Matrix X = X0;
            for (int i = 0; i < 9; ++i)
                X.data()[i] += eps * D[i];
            if (inner(X, W) < dual - 1e-12 * scale)
                continue;
            if (norm(X, NormKind::op()) > 1.0 + 1e-12)
                continue;
            ++out.feasible_maximizers;
            out.min_gap = std::min(out.min_gap, frobenius(X) - base);
        }
    }
    return out;
}

inline std::vector<Matrix> rank_deficient_cases() {
    return {
        Matrix{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}},   Matrix{{3, 0, 0}, {0, 0, 0}, {0, 0, 0}},
        Matrix{{2, 0, 0}, {0, 1, 0}, {0, 0, 0}},   Matrix{{0, 0, 0}, {0, -2, 0}, {0, 0, 2}},
        Matrix{{0, 1.5, 0}, {0, 0, 0}, {0, 0, 0}}, Matrix{{1, 2, 0}, {2, 4, 0}, {0, 0, 0}},
        Matrix{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}},
    };
}

inline Report verify_lmo(const LmoParams& p = {}) {
    Report rep{"lmo", {}};
    Rng rng(p.seed);
    for (const auto& spec : lmo_norms()) {
        double worst_pair = 0.0;
        double worst_primal = 0.0;
        for (std::size_t trial = 0; trial < p.trials; ++trial) {
            const Matrix w = detail::test_input(rng, uniform_index(rng, 1, 6), uniform_index(rng, 1, 6), trial);
            const Matrix x = lmo_min(w, spec);
            worst_pair = std::max(worst_pair, std::abs(inner(x, w) - dual_norm(w, spec)));
            worst_primal = std::max(worst_primal, primal_norm(x, spec));
        }
        rep.add(make_check(spec.name() + ": max |<LMO(W),W> - |W|_*|", worst_pair, "<=", p.pairing_tol));
        rep.add(make_check(spec.name() + ": max |LMO(W)|", worst_primal, "<=", 1.0 + p.primal_slack));
    }
    {
        double worst_pair = 0.0;
        double worst_primal = 0.0;
        for (std::size_t trial = 0; trial < p.trials; ++trial) {
            const auto spec = detail::random_product_spec(rng);
            const ParamPoint w = detail::random_point(rng, spec, trial);
            const ParamPoint x = lmo_min(w, spec);
            worst_pair = std::max(worst_pair, std::abs(inner(x, w) - dual_norm(w, spec)));
            worst_primal = std::max(worst_primal, primal_norm(x, spec));
        }
        rep.add(make_check("product: max |<LMO(W),W> - |W|_*|", worst_pair, "<=", p.pairing_tol));
        rep.add(make_check("product: max |LMO(W)|", worst_primal, "<=", 1.0 + p.primal_slack));
    }
    std::size_t idx = 0;
    for (const auto& W : rank_deficient_cases()) {
        const auto g = operator_least_norm_grid(W);
        const std::string tag = "grid case " + std::to_string(idx++);
        rep.add(make_check(tag + ": min |X|_F - |LMO|_F over maximizers", g.min_gap, ">=", -1e-12));
    }
    return rep;
}

// ---------------------------------------------------------------- cex1

struct Cex1Params {
    std::size_t T = 5000;
    double tol = 1e-10;
    std::vector<double> betas{0.0, 0.5, 0.9};
    std::uint64_t seed = 4;
};

struct Cex1Case {
    std::string name;
    double beta;
    StepSchedule schedule;
    double r;
    double delta;
};

inline std::vector<Cex1Case> cex1_cases(const Cex1Params& p) {
    Rng rng(p.seed);
    std::vector<double> tb(60);
    for (double& x : tb)
        x = uniform(rng, 0.05, 0.5);
    std::sort(tb.begin(), tb.end(), std::greater<>());
    const auto table = StepSchedule::table(tb);
    std::vector<Cex1Case> out;
    for (double b : p.betas) {
        const std::string bs = "beta=" + std::to_string(b).substr(0, 3);
        out.push_back({bs + " constant(0.2)", b, StepSchedule::constant(0.2), 1.0, 0.0});
        out.push_back({bs + " constant(0.2) r=2 delta=0.05", b, StepSchedule::constant(0.2), 2.0, 0.05});
        out.push_back({bs + " inv_t", b, StepSchedule::inv_t(), 1.0, 0.0});
        out.push_back({bs + " table", b, table, 1.5, -0.25 * tb.back()});
    }
    return out;
}

/// Muon on the first counterexample: closed-form iterates, invariant sum, floor.
inline Report verify_cex1(const Cex1Params& p = {}) {
    Report rep{"cex1", {}};
    for (const auto& cs : cex1_cases(p)) {
        const auto setup = cex1_build(cs.beta, cs.schedule, cs.r, cs.delta, p.T);
        RunConfig rc;
        rc.method = Method::Muon;
        const auto tr = run(rc, setup.f.oracle(), make_state(setup.W0, cs.beta, cs.schedule), p.T);
        double pred = 0.0;
        double sum = 0.0;
        double floor_margin = std::numeric_limits<double>::infinity();
        for (const auto& row : tr.rows) {
            const auto [w1, w2] = cex1_predicted_iterate(setup.init, row.t);
            pred = std::max({pred, std::abs(row.w11 - w1), std::abs(row.w22 - w2)});
            sum = std::max(sum, std::abs(row.p() - 2.0 * cs.r));
            floor_margin = std::min(floor_margin, row.f - (1.0 - cs.beta) * cs.r);
        }
        rep.add(make_check(cs.name + ": max |w_t - predicted|", pred, "<=", p.tol));
        rep.add(make_check(cs.name + ": max |w11+w22 - 2r|", sum, "<=", p.tol));
        rep.add(make_check(cs.name + ": min f(W_t) - (1-beta) r", floor_margin, ">=", 0.0));
    }
    return rep;
}

// ---------------------------------------------------------------- cex2

struct Cex2Params {
    std::size_t trials = 100;
    std::size_t T = 2000;
    double p_tol = 1e-12;
    double residual_tol = 1e-12;
    std::vector<double> betas{0.0, 0.2, 0.4};
    double base_lambda = 0.05;
    std::uint64_t seed = 5;
};

struct Cex2Outcome {
    bool guard = false;
    double p_dev = 0.0;
    double residual = 0.0;
    double floor_margin = std::numeric_limits<double>::infinity();
};

inline Cex2Outcome cex2_run(const Matrix& W0, double beta, Method method, const StepSchedule& sched, std::size_t T) {
    const KinkyFunction f(0.5 - beta, W0.rows(), W0.cols());
    RunConfig rc;
    rc.method = method;
    const auto tr = run(rc, f.oracle(), make_state(W0, beta, sched), T);
    Cex2Outcome o;
    const double p0 = tr.rows.front().p();
    o.guard = p0 != 0.0;
    for (const auto& pq : cex2_track(tr)) {
        o.p_dev = std::max(o.p_dev, std::abs(pq.p - p0));
        o.guard = o.guard && pq.q != 0.0;
    }
    for (const auto& row : tr.rows)
        o.floor_margin = std::min(o.floor_margin, row.f - f.c() * std::abs(p0));
    o.residual = cex2_recursion_residual(tr);
    return o;
}

/// regMuon, Muon with the adaptive nuclear schedule and Muon with random
/// tables from Gaussian initializations.
inline Report verify_cex2(const Cex2Params& p = {}) {
    Report rep{"cex2", {}};
    Rng rng(p.seed);
    for (double beta : p.betas) {
        const std::string bs = "beta=" + std::to_string(beta).substr(0, 3);
        struct Variant {
            std::string name;
            Method method;
        };
        for (const auto& v : {Variant{"regmuon", Method::RegMuon}, Variant{"muon adaptive_nuclear", Method::Muon},
                              Variant{"muon table", Method::Muon}}) {
            std::size_t ok = 0;
            Cex2Outcome worst;
            for (std::size_t trial = 0; trial < p.trials; ++trial) {
                const Matrix W0 = gaussian_matrix(rng, 2, 2);
                StepSchedule sched = StepSchedule::constant(p.base_lambda);
                if (v.name == "muon adaptive_nuclear") {
                    sched = StepSchedule::adaptive_nuclear(p.base_lambda);
                } else if (v.name == "muon table") {
                    std::vector<double> tb(p.T + 1);
                    for (double& x : tb)
                        x = uniform(rng, 0.001, 0.1);
                    sched = StepSchedule::table(std::move(tb));
                }
                const auto o = cex2_run(W0, beta, v.method, sched, p.T);
                worst.p_dev = std::max(worst.p_dev, o.p_dev);
                worst.residual = std::max(worst.residual, o.residual);
                worst.floor_margin = std::min(worst.floor_margin, o.floor_margin);
                if (o.guard && o.p_dev <= p.p_tol && o.residual <= p.residual_tol && o.floor_margin >= 0.0)
                    ++ok;
            }
            const std::string tag = bs + " " + v.name;
            rep.add(make_check(tag + ": runs meeting every property", static_cast<double>(ok), ">=",
                               static_cast<double>(p.trials)));
            rep.add(make_check(tag + ": max |p_t - p_0|", worst.p_dev, "<=", p.p_tol));
            rep.add(make_check(tag + ": max q recursion residual", worst.residual, "<=", p.residual_tol));
            rep.add(make_check(tag + ": min f(W_t) - c|p_0|", worst.floor_margin, ">=", 0.0));
        }
    }
    return rep;
}

// ---------------------------------------------------------------- ef-bound

struct EfBoundParams {
    std::size_t T = 5000;
    std::vector<double> eps{0.1, 0.05};
};

/// EF-Muon with lambda_t = 1/sqrt(t+1) from the counterexample initializations.
inline Report verify_ef_bound(const EfBoundParams& p = {}) {
    Report rep{"ef-bound", {}};
    struct Case {
        std::string name;
        double beta;
        double c;
        EfErrorForm form;
        bool last_iterate;  // also require f(W_T) < smallest eps
    };
    const std::vector<Case> cases{
        {"damped beta=0.9", 0.9, (1.0 - 0.9) / (2.0 * 1.9), EfErrorForm::Residual, true},
        {"damped beta=0.9 iterate-difference", 0.9, (1.0 - 0.9) / (2.0 * 1.9), EfErrorForm::IterateDifference, true},
        {"cex1 beta=0.5", 0.5, 0.25, EfErrorForm::Residual, false},
        {"cex1 beta=0.0", 0.0, 0.5, EfErrorForm::Residual, false},
    };
    const Matrix W0 = cex1_build(0.0, StepSchedule::inv_t(), 1.0, 0.0, 1).W0;
    for (const auto& cs : cases) {
        const KinkyFunction f(cs.c);
        RunConfig rc;
        rc.method = Method::EFMuon;
        rc.ef_form = cs.form;
        rc.bound = BoundParams{0.5, lipschitz_bound(cs.c), f.distance_to_minimizers(W0)};
        const auto tr = run(rc, f.oracle(), make_state(W0, cs.beta, StepSchedule::inv_sqrt_t()), p.T);
        double excess = -std::numeric_limits<double>::infinity();
        for (const auto& row : tr.rows)
            excess = std::max(excess, row.favg - row.bound);
        rep.add(make_check(cs.name + ": max f(avg W_t) - bound_t", excess, "<=", 0.0));
        for (double e : p.eps) {
            std::size_t hit = tr.rows.size();
            for (const auto& row : tr.rows)
                if (row.f < e) {
                    hit = row.t;
                    break;
                }
            char buf[64];
            std::snprintf(buf, sizeof buf, ": first t with f < %g", e);
            rep.add(make_check(cs.name + buf, static_cast<double>(hit), "<=", static_cast<double>(p.T)));
        }
        if (cs.last_iterate)
            rep.add(make_check(cs.name + ": f(W_T)", tr.rows.back().f, "<", p.eps.back()));
    }
    return rep;
}

// ---------------------------------------------------------------- polar

struct PolarParams {
    std::size_t trials = 500;
    double ns_tol = 1e-4;
    double cond = 10.0;
    std::uint64_t seed = 7;
};

inline Report verify_polar(const PolarParams& p = {}) {
    Report rep{"polar", {}};
    Rng rng(p.seed);
    double diag_err = 0.0;
    for (std::size_t trial = 0; trial < p.trials; ++trial) {
        const std::size_t m = uniform_index(rng, 1, 7);
        const std::size_t n = uniform_index(rng, 1, 7);
        std::vector<double> d(std::min(m, n));
        for (double& x : d) {
            const double u = uniform(rng, 0.0, 1.0);
            x = u < 0.2 ? 0.0 : std::pow(10.0, uniform(rng, -6.0, 6.0)) * (u < 0.6 ? -1.0 : 1.0);
        }
        const Matrix D = Matrix::diagonal(m, n, d);
        diag_err = std::max(diag_err, max_abs_diff(polar_exact(D), sign_elementwise(D)));
    }
    rep.add(make_check("max |polar_exact(D) - sign(D)| on diagonals", diag_err, "==", 0.0));

    double ns_err = 0.0;
    for (std::size_t trial = 0; trial < p.trials; ++trial) {
        const Matrix A = conditioned_matrix(rng, uniform_index(rng, 2, 8), uniform_index(rng, 2, 8), 1.0, p.cond);
        ns_err = std::max(ns_err, max_abs_diff(polar_newton_schulz(A).value, polar_exact(A)));
    }
    rep.add(make_check("max |polar_ns(A) - polar_exact(A)|, cond <= " + std::to_string(static_cast<int>(p.cond)),
                       ns_err, "<=", p.ns_tol));
    return rep;
}

// ---------------------------------------------------------------- driver

/// Runs a suite by name; `trials` overrides the default trial count where the
/// suite is randomized.
inline Report run_suite(const std::string& name, std::optional<std::size_t> trials = std::nullopt) {
    if (name == "reduction") {
        ReductionParams p;
        if (trials) p.trials = *trials;
        return verify_reduction(p);
    }
    if (name == "compressor") {
        CompressorParams p;
        if (trials) p.trials = *trials;
        return verify_compressor(p);
    }
    if (name == "lmo") {
        LmoParams p;
        if (trials) p.trials = *trials;
        return verify_lmo(p);
    }
    if (name == "cex1") return verify_cex1();
    if (name == "cex2") {
        Cex2Params p;
        if (trials) p.trials = *trials;
        return verify_cex2(p);
    }
    if (name == "ef-bound") return verify_ef_bound();
    if (name == "polar") {
        PolarParams p;
        if (trials) p.trials = *trials;
        return verify_polar(p);
    }
    throw std::invalid_argument("unknown suite '" + name + "'");
}

/// Every suite on its own worker; reports come back in suite order.
inline std::vector<Report> run_all_suites(std::optional<std::size_t> trials = std::nullopt) {
    std::vector<std::future<Report>> jobs;
    for (const auto& name : suite_names())
        jobs.push_back(std::async(std::launch::async, [name, trials] { return run_suite(name, trials); }));
    std::vector<Report> out;
    for (auto& j : jobs)
        out.push_back(j.get());
    return out;
}

}  // namespace efmuon::harness

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "efmuon/counterexample.hpp"
#include "efmuon/optim.hpp"
#include "efmuon/random.hpp"

using namespace efmuon;

namespace {

Oracle<Matrix> constant_oracle(Matrix G) {
    return {[](const Matrix&) { return 0.0; }, [G](const Matrix&) { return G; }};
}

// f(W) = <A, W> + sum |W_ij - B_ij|, with subgradient A + sign(W - B).
Oracle<Matrix> dense_oracle(Matrix A, Matrix B) {
    return {[A, B](const Matrix& W) {
                double s = inner(A, W);
                for (std::size_t i = 0; i < W.size(); ++i)
                    s += std::abs(W.data()[i] - B.data()[i]);
                return s;
            },
            [A, B](const Matrix& W) { return A + sign_elementwise(W - B); }};
}

Matrix diag2(double a, double b) { return Matrix{{a, 0}, {0, b}}; }

}  // namespace

TEST(Schedule, Values) {
    EXPECT_DOUBLE_EQ(StepSchedule::inv_t().at(3), 0.25);
    EXPECT_DOUBLE_EQ(StepSchedule::inv_sqrt_t().at(3), 0.5);
    const auto tb = StepSchedule::table({0.5, 0.3, 0.3});
    EXPECT_DOUBLE_EQ(tb.at(10), 0.3);
    EXPECT_EQ(tb.settles_at(), 1u);
    EXPECT_DOUBLE_EQ(tb.limit(), 0.3);
    EXPECT_TRUE(tb.nonincreasing());
    EXPECT_FALSE(StepSchedule::table({0.1, 0.2}).nonincreasing());
    EXPECT_THROW(StepSchedule::constant(0.0), std::invalid_argument);
    EXPECT_THROW(StepSchedule::table({}), std::invalid_argument);
    EXPECT_THROW(StepSchedule::table({0.1, -1.0}), std::invalid_argument);
    EXPECT_THROW(StepSchedule::adaptive_nuclear(0.1).at(0), std::logic_error);
    EXPECT_DOUBLE_EQ(StepSchedule::adaptive_nuclear(0.1).at(0, Matrix(1, 1), 7.0), 0.7);
}

TEST(SpecGD, ZeroGradientDoesNotMove) {
    const Matrix W{{1, 2}, {3, 4}};
    const auto r = step_specgd(make_state(W, 0.0, StepSchedule::constant(1.0)), constant_oracle(Matrix(2, 2)));
    EXPECT_EQ(r.state.W, W);
    EXPECT_EQ(r.state.t, 1u);
}

TEST(SpecGD, DiagonalGradientStep) {
    const auto r =
        step_specgd(make_state(Matrix(2, 2), 0.0, StepSchedule::constant(1.0)), constant_oracle(diag2(3, -4)));
    EXPECT_EQ(r.state.W, diag2(-1, 1));
}

TEST(SpecGD, KinkyHandExample) {
    const KinkyFunction f(0.5);
    const auto r = step_specgd(make_state(diag2(2, 1), 0.0, StepSchedule::constant(0.1)), f.oracle());
    EXPECT_LE(max_abs_diff(r.state.W, diag2(1.9, 1.1)), 1e-15);
}

TEST(Muon, BetaZeroIsSpecGDBitwise) {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix A = gaussian_matrix(rng, 3, 4), B = gaussian_matrix(rng, 3, 4);
        const auto oracle = dense_oracle(A, B);
        auto a = make_state(gaussian_matrix(rng, 3, 4), 0.0, StepSchedule::inv_sqrt_t());
        auto b = a;
        for (int t = 0; t < 30; ++t) {
            a = step_muon(std::move(a), oracle).state;
            b = step_specgd(std::move(b), oracle).state;
            ASSERT_EQ(a.W, b.W);
        }
    }
}

TEST(Muon, DampedFirstStep) {
    const double beta = 0.9;
    const KinkyFunction f((1 - beta) / (2 * (1 + beta)));
    const double l2 = std::log(2.0);
    const auto r = step_muon(make_state(diag2(1 + l2, 1 - l2), beta, StepSchedule::inv_t()), f.oracle());
    EXPECT_NEAR(r.state.W(0, 0), l2, 1e-15);
    EXPECT_NEAR(r.state.W(1, 1), 2 - l2, 1e-15);
    EXPECT_DOUBLE_EQ(r.info.lambda, 1.0);
}

TEST(Muon, DiagonalOracleMatchesSignMomentum) {
    Rng rng(32);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<double> b{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
        auto diag_sub = [b](std::size_t i, double w) { return sign(w - b[i]) + 0.25 * sign(w); };
        const Oracle<Matrix> mo{[](const Matrix&) { return 0.0; },
                                [=](const Matrix& W) {
                                    Matrix G(W.rows(), W.cols());
                                    for (std::size_t i = 0; i < 3; ++i)
                                        G(i, i) = diag_sub(i, W(i, i));
                                    return G;
                                }};
        const Oracle<Matrix> vo{[](const Matrix&) { return 0.0; },
                                [=](const Matrix& w) {
                                    Matrix G(3, 1);
                                    for (std::size_t i = 0; i < 3; ++i)
                                        G(i, 0) = diag_sub(i, w(i, 0));
                                    return G;
                                }};
        const std::vector<double> w0{uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2)};
        const double beta = uniform(rng, 0, 0.99);
        auto sm = make_state(Matrix::diagonal(3, 5, w0), beta, StepSchedule::inv_t());
        auto sv = make_state(Matrix(3, 1, w0), beta, StepSchedule::inv_t());
        for (int t = 0; t < 100; ++t) {
            sm = step_muon(std::move(sm), mo).state;
            sv = step_signmomentum(std::move(sv), vo).state;
            for (std::size_t i = 0; i < 3; ++i)
                ASSERT_EQ(sm.W(i, i), sv.W(i, 0));
        }
    }
}

TEST(RegMuon, UnitNuclearMomentumMatchesMuon) {
    const Matrix G{{0.25, 0}, {0, -0.75}};  // |G|_nuc = 1
    const auto a = step_regmuon(make_state(Matrix(2, 2), 0.0, StepSchedule::constant(0.3)), constant_oracle(G));
    const auto b = step_muon(make_state(Matrix(2, 2), 0.0, StepSchedule::constant(0.3)), constant_oracle(G));
    EXPECT_EQ(a.state.W, b.state.W);
}

TEST(RegMuon, NuclearScaledStep) {
    const auto r =
        step_regmuon(make_state(Matrix(2, 2), 0.0, StepSchedule::constant(0.1)), constant_oracle(diag2(3, -4)));
    EXPECT_LE(max_abs_diff(r.state.W, -0.7 * diag2(1, -1)), 1e-15);
    EXPECT_NEAR(r.info.step, 0.7, 1e-15);
}

TEST(RegMuon, EqualsMuonWithAdaptiveNuclearSchedule) {
    Rng rng(33);
    const auto oracle = dense_oracle(gaussian_matrix(rng, 3, 3), gaussian_matrix(rng, 3, 3));
    const Matrix W0 = gaussian_matrix(rng, 3, 3);
    RunConfig reg, mu;
    reg.method = Method::RegMuon;
    mu.method = Method::Muon;
    OptimizerState<Matrix> fa, fb;
    const auto ta = run(reg, oracle, make_state(W0, 0.4, StepSchedule::constant(0.02)), 50, &fa);
    const auto tb = run(mu, oracle, make_state(W0, 0.4, StepSchedule::adaptive_nuclear(0.02)), 50, &fb);
    EXPECT_EQ(fa.W, fb.W);
    for (std::size_t t = 0; t < ta.rows.size(); ++t)
        ASSERT_EQ(ta.rows[t].lambda, tb.rows[t].lambda);
}

TEST(SignGD, ZeroGradientAndHandExample) {
    const Matrix w = Matrix::column({2, 1});
    const auto r0 = step_signgd(make_state(w, 0.0, StepSchedule::constant(0.1)), constant_oracle(Matrix(2, 1)));
    EXPECT_EQ(r0.state.W, w);
    const KinkyFunction f(0.5);
    const Oracle<Matrix> fdiag{[f](const Matrix& v) { return f.diag_value(v(0, 0), v(1, 0)); },
                               [f](const Matrix& v) {
                                   const auto [a, b] = f.diag_subgradient(v(0, 0), v(1, 0));
                                   return Matrix::column({a, b});
                               }};
    const auto r = step_signgd(make_state(w, 0.0, StepSchedule::constant(0.1)), fdiag);
    EXPECT_LE(max_abs_diff(r.state.W, Matrix::column({1.9, 1.1})), 1e-15);
}

TEST(SignMomentum, BetaZeroIsSignGD) {
    Rng rng(34);
    const auto oracle = dense_oracle(gaussian_matrix(rng, 4, 1), gaussian_matrix(rng, 4, 1));
    auto a = make_state(gaussian_matrix(rng, 4, 1), 0.0, StepSchedule::inv_t());
    auto b = a;
    for (int t = 0; t < 50; ++t) {
        a = step_signmomentum(std::move(a), oracle).state;
        b = step_signgd(std::move(b), oracle).state;
        ASSERT_EQ(a.W, b.W);
    }
}

TEST(EFM, IdentityCompressorIsMomentumSGD) {
    Rng rng(35);
    const Matrix A = gaussian_matrix(rng, 2, 3), B = gaussian_matrix(rng, 2, 3);
    const auto oracle = dense_oracle(A, B);
    auto s = make_state(gaussian_matrix(rng, 2, 3), 0.5, StepSchedule::constant(0.1));
    for (int t = 0; t < 20; ++t) {
        const Matrix W = s.W;
        s = step_efm(std::move(s), oracle, identity_compressor<Matrix>()).state;
        EXPECT_EQ(s.E, Matrix(2, 3));
        EXPECT_LE(max_abs_diff(s.W, W - 0.1 * s.M), 1e-15);
    }
}

TEST(EFM, OperatorCompressorHandExample) {
    const Matrix W0{{1, 2}, {3, 4}};
    const auto r = step_efm(make_state(W0, 0.0, StepSchedule::constant(1.0)), constant_oracle(diag2(3, -4)),
                            lmo_compressor(NormSpec::op()));
    EXPECT_LE(max_abs_diff(r.state.W, W0 - diag2(3.5, -3.5)), 1e-15);
    EXPECT_LE(max_abs_diff(r.state.E, diag2(-0.5, -0.5)), 1e-15);
}

TEST(EFM, BookkeepingIdentity) {
    Rng rng(36);
    const auto oracle = dense_oracle(gaussian_matrix(rng, 3, 2), gaussian_matrix(rng, 3, 2));
    const auto comp = lmo_compressor(NormSpec::op());
    auto s = make_state(gaussian_matrix(rng, 3, 2), 0.8, StepSchedule::inv_sqrt_t());
    for (int t = 0; t < 100; ++t) {
        const Matrix E = s.E;
        const double lam = s.schedule.at(s.t);
        auto next = step_efm(s, oracle, comp).state;
        const Matrix P = E + lam * next.M;
        const double scale = std::max(1.0, frobenius(P));
        EXPECT_LE(max_abs_diff(next.E + comp(P), P), 4 * std::numeric_limits<double>::epsilon() * scale);
        s = std::move(next);
    }
}

TEST(EFMuon, MatchesEFMWithOperatorCompressorBitwise) {
    Rng rng(37);
    const auto oracle = dense_oracle(gaussian_matrix(rng, 2, 4), gaussian_matrix(rng, 2, 4));
    auto a = make_state(gaussian_matrix(rng, 2, 4), 0.9, StepSchedule::inv_sqrt_t());
    auto b = a;
    for (int t = 0; t < 50; ++t) {
        a = step_efmuon(std::move(a), oracle).state;
        b = step_efm(std::move(b), oracle, lmo_compressor(NormSpec::op())).state;
        ASSERT_EQ(a.W, b.W);
        ASSERT_EQ(a.E, b.E);
    }
}

TEST(EFMuon, IterateDifferenceFormAgrees) {
    Rng rng(38);
    for (int trial = 0; trial < 200; ++trial) {
        const auto oracle = dense_oracle(gaussian_matrix(rng, 3, 3), gaussian_matrix(rng, 3, 3));
        auto s = make_state(gaussian_matrix(rng, 3, 3), 0.7, StepSchedule::constant(0.3));
        s.M = gaussian_matrix(rng, 3, 3);
        s.E = gaussian_matrix(rng, 3, 3, 0.1);
        const auto a = step_efmuon(s, oracle, EfErrorForm::Residual).state;
        const auto b = step_efmuon(s, oracle, EfErrorForm::IterateDifference).state;
        ASSERT_EQ(a.W, b.W);
        EXPECT_LE(max_abs_diff(a.E, b.E), 1e-14);
    }
}

TEST(MuonMax, DiagonalBlockMovesAlongSign) {
    const ProductNormSpec spec({{2, 2}}, 1.0, 1);
    const KinkyFunction f(0.5);
    ParamPoint W0 = spec.zeros();
    W0.matrices[0] = diag2(2, 1);
    auto s = make_state(W0, 0.0, StepSchedule::constant(0.1));
    const auto r = step_muonmax(s, f.product_oracle(), spec);
    const Matrix dW = W0.matrices[0] - r.state.W.matrices[0];
    // G = diag(1.5, -0.5): direction is a positive multiple of diag(1, -1)
    EXPECT_GT(dW(0, 0), 0.0);
    EXPECT_NEAR(dW(0, 0), -dW(1, 1), 1e-15);
    EXPECT_EQ(dW(0, 1), 0.0);
    EXPECT_EQ(r.state.W.theta, Matrix(1, 1));
    // lambda |M|_* LMO(M): y = 2/sqrt(2), block = s y / sqrt(2) polar = 1 * diag(1,-1), scaled by 0.1
    EXPECT_NEAR(dW(0, 0), 0.1, 1e-15);
}

TEST(MuonMax, RejectsShapeMismatch) {
    const ProductNormSpec spec({{2, 2}}, 1.0, 1);
    const ProductNormSpec other({{3, 2}}, 1.0, 1);
    const KinkyFunction f(0.5);
    EXPECT_THROW(step_muonmax(make_state(other.zeros(), 0.0, StepSchedule::constant(0.1)), f.product_oracle(), spec),
                 std::invalid_argument);
}

TEST(EFMuonMax, BookkeepingIdentity) {
    const ProductNormSpec spec({{2, 2}, {3, 2}}, 0.5, 2);
    Rng rng(39);
    const KinkyFunction f(0.3);
    const auto comp = lmo_compressor(spec);
    ParamPoint W0 = spec.zeros();
    W0.matrices[0] = gaussian_matrix(rng, 2, 2);
    auto s = make_state(W0, 0.5, StepSchedule::inv_sqrt_t());
    for (int t = 0; t < 50; ++t) {
        const ParamPoint E = s.E;
        const double lam = s.schedule.at(s.t);
        auto next = step_efmuonmax(s, f.product_oracle(), spec).state;
        const ParamPoint P = E + lam * next.M;
        EXPECT_LE(max_abs_diff(next.E + comp(P), P), 1e-15 * std::max(1.0, frobenius(P)));
        s = std::move(next);
    }
}

TEST(Run, SingleStepAndLength) {
    const KinkyFunction f(0.3);
    RunConfig cfg;
    cfg.method = Method::Muon;
    const auto st = make_state(diag2(1.5, -0.2), 0.5, StepSchedule::constant(0.1));
    OptimizerState<Matrix> fin;
    const auto tr = run(cfg, f.oracle(), st, 1, &fin);
    ASSERT_EQ(tr.size(), 2u);
    const auto manual = step_muon(st, f.oracle());
    EXPECT_EQ(fin.W, manual.state.W);
    EXPECT_EQ(tr.rows[1].w11, manual.state.W(0, 0));
    EXPECT_EQ(run(cfg, f.oracle(), st, 0).size(), 1u);
}

TEST(Run, DampedMuonSumInvariantAndEFConvergence) {
    const double beta = 0.9, l2 = std::log(2.0);
    const KinkyFunction f((1 - beta) / (2 * (1 + beta)));
    RunConfig mu;
    mu.method = Method::Muon;
    const auto tr = run(mu, f.oracle(), make_state(diag2(1 + l2, 1 - l2), beta, StepSchedule::inv_t()), 5000);
    ASSERT_EQ(tr.size(), 5001u);
    for (const auto& r : tr.rows)
        ASSERT_NEAR(r.p(), 2.0, 1e-10);
    RunConfig ef;
    ef.method = Method::EFMuon;
    const auto te = run(ef, f.oracle(), make_state(diag2(1 + l2, 1 - l2), beta, StepSchedule::inv_sqrt_t()), 5000);
    EXPECT_LT(te.rows.back().f, 0.05);
    EXPECT_LE(te.max_momentum_excess, 1e-12);
}

TEST(Run, MomentumIsConvexCombination) {
    Rng rng(40);
    for (int trial = 0; trial < 10; ++trial) {
        const auto oracle = dense_oracle(gaussian_matrix(rng, 3, 3), gaussian_matrix(rng, 3, 3));
        RunConfig cfg;
        cfg.method = trial % 2 ? Method::Muon : Method::EFMuon;
        const auto tr = run(cfg, oracle, make_state(gaussian_matrix(rng, 3, 3), 0.9, StepSchedule::inv_t()), 200);
        EXPECT_LE(tr.max_momentum_excess, 1e-12);
    }
}

TEST(Run, ErrorsCarryStepIndex) {
    const Oracle<Matrix> bad{[](const Matrix&) { return 0.0; },
                             [](const Matrix& W) {
                                 if (W(0, 0) < 0.5)
                                     throw std::invalid_argument("oracle refused");
                                 return Matrix{{1, 0}, {0, 0}};
                             }};
    RunConfig cfg;
    cfg.method = Method::SpecGD;
    try {
        run(cfg, bad, make_state(diag2(0.85, 0), 0.0, StepSchedule::constant(0.1)), 10);
        FAIL() << "expected an exception";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("step 4"), std::string::npos) << e.what();
    }
}

TEST(Run, MethodShapeChecks) {
    const KinkyFunction f(0.3);
    RunConfig cfg;
    cfg.method = Method::MuonMax;
    EXPECT_THROW(run(cfg, f.oracle(), make_state(diag2(1, 0), 0.0, StepSchedule::constant(0.1)), 1),
                 std::invalid_argument);
    EXPECT_THROW(make_state(diag2(1, 0), 1.0, StepSchedule::constant(0.1)), std::invalid_argument);
}

TEST(Run, BetaOverride) {
    const Matrix G = diag2(1, -2);
    auto s = make_state(Matrix(2, 2), 0.0, StepSchedule::constant(0.1));
    s.beta_at = [](std::size_t t) { return t == 0 ? 0.0 : 0.5; };
    s = step_muon(std::move(s), constant_oracle(G)).state;
    s = step_muon(std::move(s), constant_oracle(2.0 * G)).state;
    EXPECT_LE(max_abs_diff(s.M, 1.5 * G), 1e-15);
}

TEST(Run, NoisyOracleIsSeededAndTracksSecondMoment) {
    const KinkyFunction f(0.5);
    RunConfig cfg;
    cfg.method = Method::EFMuon;
    const auto st = make_state(diag2(1, 0.5), 0.5, StepSchedule::inv_sqrt_t());
    const auto a = run(cfg, noisy_oracle(f.oracle(), 0.3, 9), st, 300);
    const auto b = run(cfg, noisy_oracle(f.oracle(), 0.3, 9), st, 300);
    EXPECT_EQ(a.rows.back().w11, b.rows.back().w11);
    const double L = lipschitz_bound(0.5);
    // E|G|^2 <= L^2 + 4 * 0.09 (noise on a 2x2 matrix)
    EXPECT_LE(a.grad_second_moment, L * L + 4 * 0.09 + 0.3);
    EXPECT_GT(a.grad_second_moment, 0.0);
}

TEST(EfmBound, Examples) {
    EXPECT_DOUBLE_EQ(efm_bound(0, 1.0, 0.0, 2.0, 1.0), 2.5);
    const std::size_t T = 99;
    const double n = 100.0;
    EXPECT_NEAR(efm_bound(T, 1.0, 0.0, 3.0, 2.0), 4.0 / (2 * 10.0) + 9.0 * 0.5 * (1 + std::log(n)) / 10.0, 1e-14);
    double prev = std::numeric_limits<double>::infinity();
    for (double d = 0.01; d <= 1.0; d += 0.01) {
        const double b = efm_bound(1000, d, 0.5, 1.0, 1.0);
        EXPECT_LE(b, prev);
        prev = b;
    }
}

TEST(EfmBound, GeneralForm) {
    std::vector<double> lam;
    for (std::size_t t = 0; t <= 500; ++t)
        lam.push_back(1.0 / std::sqrt(t + 1.0));
    EXPECT_LE(efm_bound_general(lam, 0.5, 0.9, 1.5, 2.0), efm_bound(500, 0.5, 0.9, 1.5, 2.0) + 1e-12);
    const std::vector<double> c(11, 0.2);
    const double coef = 2 * std::sqrt(0.5) / 0.5 + 0.5 / 0.5 + 0.5;
    EXPECT_NEAR(efm_bound_general(c, 0.5, 0.5, 1.0, 1.0), 1.0 / (2 * 0.2 * 11) + coef * 0.2, 1e-14);
    EXPECT_THROW(efm_bound_general(std::vector<double>{0.1, 0.2}, 1.0, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST(EfmBound, DomainChecks) {
    EXPECT_THROW(efm_bound(1, 0.0, 0.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(efm_bound(1, 1.5, 0.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(efm_bound(1, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(efm_bound(1, 1.0, 0.0, -1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(efm_bound(1, 1.0, 0.0, 1.0, -1.0), std::invalid_argument);
}

TEST(Method, NamesRoundTrip) {
    for (Method m : {Method::SpecGD, Method::Muon, Method::RegMuon, Method::SignGD, Method::SignMomentum, Method::EFM,
                     Method::EFMuon, Method::MuonMax, Method::EFMuonMax})
        EXPECT_EQ(parse_method(method_name(m)), m);
    EXPECT_FALSE(parse_method("adam"));
}

#include <gtest/gtest.h>

#include <cmath>

#include "htq/bounds.hpp"
#include "htq/density_model.hpp"
#include "htq/quadrature.hpp"
#include "htq/tail.hpp"

using namespace htq;

namespace {

DensityHistogram flat_hist(double span = 1.0, int bins = 32) {
    std::vector<double> edges(static_cast<size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) edges[static_cast<size_t>(i)] = span * (2.0 * i / bins - 1.0);
    std::vector<double> mass(static_cast<size_t>(bins), 1.0 / bins);
    return DensityHistogram(std::move(edges), std::move(mass), true);
}

}  // namespace

TEST(TruncationBias, WorkedExample) {
    // gamma=4, g_min=1, rho=1 (synthetic), alpha=1, d=N=1 -> 4/((2)(1)) = 2
    PowerLawTail t{4.0, 1.0, 1.0};  // rho=1 bypasses validate_tail on purpose
    EXPECT_DOUBLE_EQ(truncation_bias(t, 1.0, 1, 1), 2.0);
}

TEST(TruncationBias, MatchesQuadrature) {
    for (double gamma : {3.5, 4.0, 4.5, 5.0}) {
        PowerLawTail t{gamma, 0.5, 0.2};
        for (double alpha : {0.7, 1.3, 4.0}) {
            double closed = truncation_bias(t, alpha, 3, 2);
            double quad = (2.0 * 3.0 / 2.0) *
                          integrate_to_infinity(
                              [&](double g) { return (g - alpha) * (g - alpha) * powerlaw_pdf(g, t); },
                              alpha);
            EXPECT_NEAR(quad / closed, 1.0, 1e-6) << "gamma=" << gamma << " alpha=" << alpha;
        }
    }
}

TEST(TruncationBias, RejectsDivergentGamma) {
    PowerLawTail t{3.0, 1.0, 0.2};
    try {
        truncation_bias(t, 1.0, 1, 1);
        FAIL();
    } catch (const HtqError& e) {
        EXPECT_EQ(e.kind(), ErrKind::GammaOutOfRange);
    }
}

TEST(ErrorTq, UniformQuantVarianceSubstitution) {
    // Q_U = 1 when all density mass is inside [-1, 1]
    PowerLawTail t{4.0, 0.01, 0.1};
    ErrorBreakdown e = error_tq(SolverScheme::Uniform, t, 1.0, 7, 1, 1, flat_hist(1.0));
    EXPECT_NEAR(e.quant_variance, 1.0 / 49.0, 1e-12);
    EXPECT_DOUBLE_EQ(e.e_tq, e.quant_variance + e.trunc_bias);
    EXPECT_GE(e.trunc_bias, 0.0);
}

TEST(ErrorTq, VanishesAtLargeBudget) {
    PowerLawTail t{4.0, 0.01, 0.1};
    PowerLawModelDensity model(t);
    double prev = 1e300;
    for (int s : {7, 31, 127, 1023}) {
        SolverResult sol = solve_alpha(SolverScheme::Uniform, t, s, model);
        ErrorBreakdown e = error_tq(SolverScheme::Uniform, t, sol.alpha, s, 1, 1, model);
        EXPECT_LT(e.e_tq, prev);
        prev = e.e_tq;
    }
    EXPECT_LT(prev, 1e-6);
}

TEST(ErrorTq, BiscaledTwoTermForm) {
    PowerLawTail t{4.0, 0.1, 0.3};
    PowerLawModelDensity model(t);
    double alpha = 0.5, k = 0.4;
    ErrorBreakdown e = error_tq_biscaled(t, alpha, k, 4, 3, 2, 5, model);
    double beta = k * alpha;
    double p1 = 0.5 * model.mass_between(-beta, beta) / beta;
    double p2 = 0.5 * (model.mass_between(-alpha, alpha) - model.mass_between(-beta, beta)) /
                (alpha - beta);
    double expect = 2.0 * 2 * p1 * beta * beta * beta / (5 * 9.0) +
                    2.0 * 2 * p2 * std::pow(alpha - beta, 3.0) / (5 * 16.0);
    EXPECT_NEAR(e.quant_variance, expect, 1e-12);
}

TEST(ConvergenceBound, DsgdTermLimit) {
    ProblemSpec p;
    p.clients = 4;
    p.batch = 8;
    p.sigma2 = 2.0;
    p.eta = 0.5;
    p.f_gap = 3.0;
    p.rounds = 1'000'000'000;
    EXPECT_NEAR(e_dsgd_term(p), 2.0 / (4.0 * 8.0), 1e-7);
}

TEST(ConvergenceBound, RejectsBadEta) {
    ProblemSpec p;
    p.nu = 2.0;
    p.eta = 0.6;  // > 1/nu
    PowerLawTail t{4.0, 0.01, 0.1};
    PowerLawModelDensity model(t);
    try {
        convergence_bound(p, SolverScheme::Uniform, t, 7, model);
        FAIL();
    } catch (const HtqError& e) {
        EXPECT_EQ(e.kind(), ErrKind::InvalidEta);
    }
}

TEST(ConvergenceBound, QuantTermScalesExactlyWithFrozenQ) {
    // with Q held fixed the term is a pure power law in s
    PowerLawTail t{4.0, 0.01, 0.1};
    double t1 = bound_quant_term(t, 0.9, 7, 1, 1);
    double t2 = bound_quant_term(t, 0.9, 127, 1, 1);
    double slope = std::log(t2 / t1) / std::log(127.0 / 7.0);
    EXPECT_NEAR(slope, (6.0 - 2.0 * t.gamma) / (t.gamma - 1.0), 1e-12);
}

TEST(ConvergenceBound, VariantCoefficientGap) {
    ProblemSpec p;
    p.clients = 8;
    p.batch = 16;
    p.dim = 100;
    p.eta = 0.1;
    p.rounds = 1000;
    for (double gamma : {3.5, 4.0, 4.5, 5.0})
        for (double rho : {0.1, 0.3})
            for (int s : {7, 15}) {
                PowerLawTail tail{gamma, 0.01, rho};
                PowerLawModelDensity model(tail);
                ErrorBreakdown e = convergence_bound(p, SolverScheme::Uniform, tail, s, model);
                ASSERT_FALSE(std::isnan(e.total_bound_approx));
                double alpha_prime =
                    tail.g_min * std::pow(2.0 * rho * s * s / (gamma - 2.0), 1.0 / (gamma - 1.0));
                double qp = q_u(alpha_prime, model);
                EXPECT_LE(e.epsilon_gap, 2.0 * (1.0 - qp) + 1e-12)
                    << "gamma=" << gamma << " rho=" << rho << " s=" << s;
            }
}

TEST(ConvergenceBound, SchemeOrdering) {
    ProblemSpec p;
    p.clients = 8;
    p.batch = 16;
    p.dim = 1000;
    p.eta = 0.1;
    p.rounds = 1000;
    PowerLawTail tail{4.0, 0.01, 0.2};
    PowerLawModelDensity model(tail);
    ErrorBreakdown tq = convergence_bound(p, SolverScheme::Uniform, tail, 7, model);
    ErrorBreakdown tnq = convergence_bound(p, SolverScheme::NonUniform, tail, 7, model);
    ErrorBreakdown tbq = convergence_bound(p, SolverScheme::BiScaled, tail, 7, model);
    EXPECT_LE(tnq.total_bound, tq.total_bound * (1.0 + 1e-12));
    EXPECT_LE(tbq.total_bound, tq.total_bound * (1.0 + 1e-12));
    EXPECT_GT(tnq.total_bound, tnq.e_dsgd);
}

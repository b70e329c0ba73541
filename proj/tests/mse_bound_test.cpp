#include <gtest/gtest.h>

#include <cmath>

#include "htq/codebook.hpp"
#include "htq/mse_bound.hpp"
#include "htq/quantizer.hpp"
#include "htq/rng.hpp"

using namespace htq;

namespace {

DensityHistogram flat_hist(double alpha, int bins = 128) {
    std::vector<double> edges(static_cast<size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) edges[static_cast<size_t>(i)] = alpha * (2.0 * i / bins - 1.0);
    std::vector<double> mass(static_cast<size_t>(bins), 1.0 / bins);
    return DensityHistogram(std::move(edges), std::move(mass), true);
}

}  // namespace

TEST(MseBound, SingleIntervalUniform) {
    // s = 1: one interval of width 2*alpha holding all mass
    double alpha = 0.8;
    MseBound b = mse_bound(make_uniform_codebook(alpha, 1), flat_hist(alpha));
    EXPECT_NEAR(b.quarter, alpha * alpha, 1e-12);
    EXPECT_NEAR(b.sixth, 2.0 * alpha * alpha / 3.0, 1e-12);
}

TEST(MseBound, UniformSevenIntervals) {
    MseBound b = mse_bound(make_uniform_codebook(1.0, 7), flat_hist(1.0));
    double width = 2.0 / 7.0;
    EXPECT_NEAR(b.quarter, width * width / 4.0, 1e-12);
    EXPECT_NEAR(b.sixth, width * width / 6.0, 1e-12);
}

TEST(MseBound, SupportMismatchDetected) {
    // density wider than the codebook range
    try {
        mse_bound(make_uniform_codebook(0.5, 7), flat_hist(1.0));
        FAIL();
    } catch (const HtqError& e) {
        EXPECT_EQ(e.kind(), ErrKind::SupportMismatch);
    }
}

TEST(MseBound, MonteCarloRespectsBound) {
    auto hist = flat_hist(1.0);
    for (int s : {3, 15}) {
        Codebook cb = make_uniform_codebook(1.0, s);
        MseBound bound = mse_bound(cb, hist);
        Rng rng(21, "mse-mc", static_cast<uint64_t>(s));
        const int n = 200'000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            double x = hist.sample(rng);
            double err = cb.levels[stochastic_quantize_value(x, cb, rng)] - x;
            sum += err * err;
            sum_sq += err * err * err * err;
        }
        double emp = sum / n;
        double se = std::sqrt(std::max(0.0, sum_sq / n - emp * emp) / n);
        EXPECT_LE(emp, bound.quarter + 3.0 * se) << "s = " << s;
        // uniform density + uniform codebook: /6 estimate is exact
        EXPECT_NEAR(emp, bound.sixth, 5.0 * se);
    }
}

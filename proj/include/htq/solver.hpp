#pragma once

#include <cmath>
#include <limits>

#include "htq/qfun.hpp"
#include "htq/tail.hpp"

namespace htq {

enum class SolverScheme { Uniform, NonUniform, BiScaled };

struct SolverOptions {
    double rel_tol = 1e-6;
    int max_iters = 100;
    bool force_q_one = false;  // skip iteration, report the Q=1 closed form
    // BiScaled: 0 = refresh k* once per alpha update and iterate to
    // convergence; n > 0 = exactly n alternation steps.
    int alternations = 0;
};

struct SolverResult {
    double alpha = 0.0;
    int iterations = 0;
    bool converged = false;
    double q_value = 1.0;
    // BiScaled only:
    double k = std::numeric_limits<double>::quiet_NaN();
    int s_alpha = 0;
    int s_beta = 0;
};

namespace detail {

inline double alpha_update(const PowerLawTail& t, int s, double q) {
    return t.g_min *
           std::pow(2.0 * t.rho * s * s / ((t.gamma - 2.0) * q), 1.0 / (t.gamma - 1.0));
}

}  // namespace detail

// Fixed point of alpha = g_min · [2·rho·s^2 / ((gamma-2)·Q(alpha))]^{1/(gamma-1)}
// where Q is Q_U, Q_N or Q_B(·, k*) evaluated on `density`. Starts from Q = 1;
// a 0.5 damping kicks in when successive steps change sign. Raises
// AlphaBelowGmin when the fixed point lands at or below g_min (the tail model
// cannot justify this budget) or when the density carries no in-range mass; a
// run that diverges (Q(alpha) vanishing faster than the map contracts, which
// happens for gamma near 3 on compact supports) or fails to settle returns
// the last iterate with converged = false.
template <class Density>
SolverResult solve_alpha(SolverScheme scheme, const PowerLawTail& tail, int s,
                         const Density& density, const SolverOptions& opts = {}) {
    validate_tail(tail);
    require(s >= 1, ErrKind::BudgetTooSmall, "need at least one quantization interval");
    if (scheme == SolverScheme::BiScaled)
        require(s >= 3, ErrKind::BudgetTooSmall, "biscaled needs s >= 3");
    require(tail.rho > 0.0, ErrKind::AlphaBelowGmin,
            "fitted tail mass is zero; any positive threshold is above the optimum");

    SolverResult res;
    res.alpha = detail::alpha_update(tail, s, 1.0);

    if (opts.force_q_one) {
        res.converged = true;
        res.q_value = 1.0;
        require(res.alpha > tail.g_min, ErrKind::AlphaBelowGmin,
                "optimal alpha does not exceed g_min; tail model invalid for this budget");
        return res;
    }

    auto eval_q = [&](double alpha) {
        switch (scheme) {
            case SolverScheme::Uniform: return q_u(alpha, density);
            case SolverScheme::NonUniform: return q_n(alpha, density);
            case SolverScheme::BiScaled: {
                double q;
                res.k = minimize_q_b(alpha, density, &q);
                return q;
            }
        }
        return 1.0;
    };

    const double alpha_cap = tail.g_min * 1e9;
    double prev_step = 0.0;
    int same_sign_run = 0;
    int max_iters = opts.max_iters;
    if (scheme == SolverScheme::BiScaled && opts.alternations > 0)
        max_iters = opts.alternations;

    bool settled = false;
    for (int it = 1; it <= max_iters; ++it) {
        res.iterations = it;
        double q = eval_q(res.alpha);
        require(q > 0.0, ErrKind::AlphaBelowGmin,
                "density has no mass inside [-alpha, alpha]; threshold cannot be calibrated");
        double next = detail::alpha_update(tail, s, q);
        if (next > alpha_cap) {  // diverging: report the capped iterate, unconverged
            res.alpha = alpha_cap;
            res.q_value = q;
            break;
        }
        double step = next - res.alpha;
        bool jumped = false;
        if (step * prev_step < 0.0) {
            // oscillation: damp
            next = 0.5 * (res.alpha + next);
            step = next - res.alpha;
            same_sign_run = 0;
        } else if (step * prev_step > 0.0) {
            // sustained monotone approach: jump to the geometric limit. Near
            // gamma = 3 the plain map contracts like 1 - 2/(gamma-1) per step
            // and would need thousands of iterations.
            ++same_sign_run;
            double ratio = step / prev_step;
            if (same_sign_run >= 2 && ratio > 0.3 && ratio < 0.9995) {
                double target = next + step * ratio / (1.0 - ratio);
                if (target > 0.0 && target < alpha_cap) {
                    next = target;
                    jumped = true;
                    same_sign_run = 0;
                }
            }
        }
        double rel = std::abs(step) / std::max(res.alpha, 1e-300);
        prev_step = jumped ? 0.0 : step;
        res.alpha = next;
        res.q_value = q;
        if (!jumped && rel < opts.rel_tol &&
            (scheme != SolverScheme::BiScaled || opts.alternations == 0)) {
            settled = true;
            break;
        }
    }
    if (scheme == SolverScheme::BiScaled && opts.alternations > 0)
        settled = true;  // fixed-step mode ran to completion by definition
    res.converged = settled;

    res.q_value = eval_q(res.alpha);
    if (res.converged)
        require(res.alpha > tail.g_min, ErrKind::AlphaBelowGmin,
                "optimal alpha does not exceed g_min; tail model invalid for this budget");
    if (scheme == SolverScheme::BiScaled) {
        BiscaledSplit split = split_levels_biscaled(s, res.k, res.alpha, density);
        res.s_alpha = split.s_alpha;
        res.s_beta = split.s_beta;
    }
    return res;
}

}  // namespace htq

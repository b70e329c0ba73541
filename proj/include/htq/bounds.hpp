#pragma once

#include <cmath>
#include <limits>

#include "htq/qfun.hpp"
#include "htq/solver.hpp"
#include "htq/tail.hpp"

namespace htq {

// Distributed-SGD problem description: N clients, batch size B, dimension d,
// per-sample gradient variance bound sigma2, smoothness nu, learning rate
// eta <= 1/nu, T rounds, and the initial optimality gap F(theta_0) - F*.
struct ProblemSpec {
    int clients = 1;     // N
    int batch = 1;       // B
    int dim = 1;         // d
    double sigma2 = 1.0;
    double nu = 1.0;
    double eta = 0.1;
    int rounds = 1000;   // T
    double f_gap = 1.0;
};

inline void validate_problem(const ProblemSpec& p) {
    require(p.clients >= 1 && p.batch >= 1 && p.dim >= 1 && p.rounds >= 1, ErrKind::OutOfRange,
            "N, B, d, T must be positive");
    require(p.sigma2 >= 0.0 && p.nu > 0.0 && p.eta > 0.0 && p.f_gap > 0.0, ErrKind::OutOfRange,
            "sigma2 must be non-negative; nu, eta, f_gap must be positive");
    require(p.eta <= 1.0 / p.nu, ErrKind::InvalidEta, "eta must satisfy eta <= 1/nu");
}

// Additive error terms. e_tq = quant_variance + trunc_bias is the compression
// penalty; e_dsgd the uncompressed-SGD term; total_bound their sum with the
// closed-form quantization term.
struct ErrorBreakdown {
    double quant_variance = 0.0;
    double trunc_bias = 0.0;
    double e_tq = 0.0;
    double e_dsgd = 0.0;
    double total_bound = 0.0;
    double alpha = 0.0;
    double q_value = 1.0;
    // Uniform scheme only: the approximate-alpha variant of the bound and the
    // coefficient gap between the two forms.
    double total_bound_approx = std::numeric_limits<double>::quiet_NaN();
    double epsilon_gap = std::numeric_limits<double>::quiet_NaN();
};

// Closed-form truncation bias 2·∫_alpha^inf (g-alpha)^2 p(g) dg under the
// power-law tail, times d/N:
//   4·d·rho·g_min^{gamma-1}·alpha^{3-gamma} / (N·(gamma-2)·(gamma-3))
inline double truncation_bias(const PowerLawTail& t, double alpha, int d, int n_clients) {
    require(t.gamma > kGammaMin, ErrKind::GammaOutOfRange,
            "gamma too close to 3; bias integral diverges");
    require(alpha > 0.0, ErrKind::InvalidAlpha, "alpha must be > 0");
    return 4.0 * d * t.rho * std::pow(t.g_min, t.gamma - 1.0) * std::pow(alpha, 3.0 - t.gamma) /
           (n_clients * (t.gamma - 2.0) * (t.gamma - 3.0));
}

// E_TQ for the uniform / cube-root layouts: d·Q(alpha)·alpha^2/(N·s^2) + bias.
template <class Density>
ErrorBreakdown error_tq(SolverScheme scheme, const PowerLawTail& tail, double alpha, int s,
                        int d, int n_clients, const Density& density) {
    require(scheme != SolverScheme::BiScaled, ErrKind::UsageError,
            "biscaled breakdown needs the (s_alpha, s_beta, k) overload");
    require(s >= 1, ErrKind::BudgetTooSmall, "need at least one interval");
    ErrorBreakdown e;
    e.alpha = alpha;
    e.q_value = scheme == SolverScheme::Uniform ? q_u(alpha, density) : q_n(alpha, density);
    e.quant_variance = d * e.q_value * alpha * alpha / (n_clients * static_cast<double>(s) * s);
    e.trunc_bias = truncation_bias(tail, alpha, d, n_clients);
    e.e_tq = e.quant_variance + e.trunc_bias;
    return e;
}

// E_TQ for the bi-scaled layout with an integer split:
//   2·d·p1·beta^3/(N·s_beta^2) + 2·d·p2·(alpha-beta)^3/(N·s_alpha^2) + bias,
// beta = k·alpha, p1/p2 the average densities of the inner/outer bands.
template <class Density>
ErrorBreakdown error_tq_biscaled(const PowerLawTail& tail, double alpha, double k, int s_alpha,
                                 int s_beta, int d, int n_clients, const Density& density) {
    require(k > 0.0 && k < 1.0, ErrKind::InvalidK, "k must be in (0, 1)");
    require(s_alpha >= 1 && s_beta >= 1, ErrKind::BudgetTooSmall, "need levels in both bands");
    double beta = k * alpha;
    double inner = 0.5 * density.mass_between(-beta, beta);
    double outer = std::max(0.0, 0.5 * (density.mass_between(-alpha, alpha) -
                                        density.mass_between(-beta, beta)));
    double p1 = inner / beta;
    double p2 = outer / (alpha - beta);
    ErrorBreakdown e;
    e.alpha = alpha;
    e.q_value = q_b(alpha, k, density);
    e.quant_variance =
        2.0 * d * p1 * beta * beta * beta / (n_clients * static_cast<double>(s_beta) * s_beta) +
        2.0 * d * p2 * (alpha - beta) * (alpha - beta) * (alpha - beta) /
            (n_clients * static_cast<double>(s_alpha) * s_alpha);
    e.trunc_bias = truncation_bias(tail, alpha, d, n_clients);
    e.e_tq = e.quant_variance + e.trunc_bias;
    return e;
}

// Closed-form quantization term of the convergence bound at the solved alpha:
//   (gamma-1)·Q^{(gamma-3)/(gamma-1)} · d·g_min^2·(2rho)^{2/(gamma-1)}
//     · s^{(6-2gamma)/(gamma-1)} / (N·(gamma-3)·(gamma-2)^{2/(gamma-1)})
inline double bound_quant_term(const PowerLawTail& t, double q, int s, int d, int n_clients) {
    double g1 = t.gamma - 1.0, g2 = t.gamma - 2.0, g3 = t.gamma - 3.0;
    return g1 * std::pow(q, g3 / g1) * d * t.g_min * t.g_min * std::pow(2.0 * t.rho, 2.0 / g1) *
           std::pow(static_cast<double>(s), (6.0 - 2.0 * t.gamma) / g1) /
           (n_clients * g3 * std::pow(g2, 2.0 / g1));
}

inline double e_dsgd_term(const ProblemSpec& p) {
    return 2.0 * p.f_gap / (p.rounds * p.eta) + p.sigma2 / (p.clients * p.batch);
}

// Full convergence-error bound for one scheme: solves alpha internally,
// reports the breakdown at the solution and the closed-form total. For the
// uniform scheme also reports the approximate-alpha variant with coefficient
// (gamma-3)·Q_U(alpha') + 2 and the coefficient gap epsilon.
template <class Density>
ErrorBreakdown convergence_bound(const ProblemSpec& problem, SolverScheme scheme,
                                 const PowerLawTail& tail, int s, const Density& density,
                                 const SolverOptions& opts = {}) {
    validate_problem(problem);
    SolverResult sol = solve_alpha(scheme, tail, s, density, opts);
    ErrorBreakdown e;
    if (scheme == SolverScheme::BiScaled)
        e = error_tq_biscaled(tail, sol.alpha, sol.k, sol.s_alpha, sol.s_beta, problem.dim,
                              problem.clients, density);
    else
        e = error_tq(scheme, tail, sol.alpha, s, problem.dim, problem.clients, density);
    e.q_value = sol.q_value;
    e.e_dsgd = e_dsgd_term(problem);
    e.total_bound = e.e_dsgd + bound_quant_term(tail, sol.q_value, s, problem.dim, problem.clients);

    if (scheme == SolverScheme::Uniform) {
        double g1 = tail.gamma - 1.0, g3 = tail.gamma - 3.0;
        double alpha_prime = detail::alpha_update(tail, s, 1.0);
        double qp = q_u(alpha_prime, density);
        double coeff_main = g1 * std::pow(sol.q_value, g3 / g1);
        double coeff_approx = g3 * qp + 2.0;
        double unit = bound_quant_term(tail, sol.q_value, s, problem.dim, problem.clients) / coeff_main;
        e.total_bound_approx = e.e_dsgd + coeff_approx * unit;
        e.epsilon_gap = coeff_approx - coeff_main;
    }
    return e;
}

}  // namespace htq

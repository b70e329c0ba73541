#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "htq/bounds.hpp"
#include "htq/codec.hpp"
#include "htq/codebook.hpp"
#include "htq/losses.hpp"
#include "htq/quantizer.hpp"
#include "htq/solver.hpp"
#include "htq/tail.hpp"

namespace htq {

enum class SimScheme { Dsgd, Qsgd, Nqsgd, Tqsgd, Tnqsgd, Tbqsgd };
enum class LossKind { QuadraticPareto, LogisticSynthetic };
enum class WeightsMode { Uniform, DataProportional };

inline bool is_truncated(SimScheme s) {
    return s == SimScheme::Tqsgd || s == SimScheme::Tnqsgd || s == SimScheme::Tbqsgd;
}
inline bool is_compressed(SimScheme s) { return s != SimScheme::Dsgd; }

inline Scheme wire_scheme(SimScheme s) {
    switch (s) {
        case SimScheme::Tqsgd: return Scheme::TqUniform;
        case SimScheme::Tnqsgd: return Scheme::Tnq;
        case SimScheme::Tbqsgd: return Scheme::Tbq;
        case SimScheme::Qsgd: return Scheme::Qsgd;
        case SimScheme::Nqsgd: return Scheme::Nqsgd;
        default: raise(ErrKind::UsageError, "DSGD sends raw floats, not messages");
    }
}

inline const char* scheme_name(SimScheme s) {
    switch (s) {
        case SimScheme::Dsgd: return "dsgd";
        case SimScheme::Qsgd: return "qsgd";
        case SimScheme::Nqsgd: return "nqsgd";
        case SimScheme::Tqsgd: return "tqsgd";
        case SimScheme::Tnqsgd: return "tnqsgd";
        case SimScheme::Tbqsgd: return "tbqsgd";
    }
    return "?";
}

inline SimScheme parse_scheme(const std::string& s) {
    if (s == "dsgd") return SimScheme::Dsgd;
    if (s == "qsgd") return SimScheme::Qsgd;
    if (s == "nqsgd") return SimScheme::Nqsgd;
    if (s == "tqsgd" || s == "tq") return SimScheme::Tqsgd;
    if (s == "tnqsgd" || s == "tnq") return SimScheme::Tnqsgd;
    if (s == "tbqsgd" || s == "tbq") return SimScheme::Tbqsgd;
    raise(ErrKind::UsageError, "unknown scheme: " + s);
}

struct SimConfig {
    ProblemSpec problem;
    SimScheme scheme = SimScheme::Tqsgd;
    int bits = 3;
    LossKind loss = LossKind::QuadraticPareto;
    WeightsMode weights = WeightsMode::Uniform;
    int refit_every = 10;
    uint64_t seed = 1;
    double gmin_quantile = 0.90;
    int histogram_bins = 1024;
    double momentum = 0.0;  // off by default; the analyzed algorithm is plain SGD
    // quadratic loss knobs
    double noise_gamma = 3.5;
    double noise_rho = 0.25;
    double noise_cutoff = std::numeric_limits<double>::infinity();
    double init_distance = 10.0;
    InitStyle init_style = InitStyle::Constant;
    // logistic loss knobs
    int samples_per_client = 128;
    double feature_scale_hi = 3.0;
    double label_noise = 0.05;
    std::vector<ParamGroup> groups;  // empty = loss default
};

inline void validate_sim_config(const SimConfig& cfg) {
    validate_problem(cfg.problem);
    if (cfg.scheme != SimScheme::Dsgd)
        require(cfg.bits >= 1 && cfg.bits <= 8, ErrKind::OutOfRange, "bits must be in [1, 8]");
    require(cfg.refit_every >= 1, ErrKind::OutOfRange, "refit_every must be >= 1");
    require(cfg.gmin_quantile > 0.0 && cfg.gmin_quantile < 1.0, ErrKind::OutOfRange,
            "gmin_quantile must be in (0, 1)");
    require(cfg.momentum >= 0.0 && cfg.momentum < 1.0, ErrKind::OutOfRange,
            "momentum must be in [0, 1)");
}

struct GroupFitInfo {
    std::string name;
    double gamma = 0.0;
    double g_min = 0.0;
    double rho = 0.0;
    double alpha = 0.0;
};

struct RoundRecord {
    int round = 0;
    double loss = 0.0;
    double grad_norm_sq = 0.0;
    uint64_t bytes_per_client = 0;
    uint64_t cum_bytes = 0;  // total uplink across all clients so far
    std::vector<GroupFitInfo> fits;
};

struct MetricsLog {
    std::string scheme;
    int bits = 0;
    uint64_t seed = 0;
    std::vector<RoundRecord> rounds;
    double final_loss = 0.0;
    double final_grad_norm_sq = 0.0;
    uint64_t total_bytes = 0;
};

// Weighted aggregation of serialized messages for one parameter group.
// Messages come straight off the wire: parse, decode, dequantize with the
// codebook the resolver hands back, then sum in client order.
template <class Resolver>
std::vector<double> server_aggregate(const std::vector<std::vector<uint8_t>>& messages,
                                     std::span<const double> weights, Resolver resolver) {
    require(messages.size() == weights.size(), ErrKind::DimensionMismatch,
            "one weight per message required");
    require(!messages.empty(), ErrKind::DimensionMismatch, "no messages");
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    require(std::abs(wsum - 1.0) <= 1e-9, ErrKind::OutOfRange, "weights must sum to 1");

    std::vector<double> agg;
    uint32_t dim = 0;
    for (size_t i = 0; i < messages.size(); ++i) {
        QuantizedMessage msg = QuantizedMessage::deserialize(messages[i]);
        if (i == 0) {
            dim = msg.dim;
            agg.assign(dim, 0.0);
        } else {
            require(msg.dim == dim, ErrKind::DimensionMismatch, "message dimension mismatch");
        }
        Codebook cb = resolver(msg);
        auto indices = decode_bits(msg.payload, msg.bits, msg.dim);
        auto values = dequantize(indices, cb);
        for (size_t j = 0; j < values.size(); ++j) agg[j] += weights[i] * values[j];
    }
    return agg;
}

namespace detail {

// Round a range bound up to the nearest representable f32 so every encoded
// value stays inside the codebook after the header round-trips the wire.
inline double snap_alpha_up(double a) {
    float f = static_cast<float>(a);
    if (static_cast<double>(f) < a) f = std::nextafterf(f, std::numeric_limits<float>::infinity());
    return static_cast<double>(f);
}

struct GroupState {
    ParamGroup group;
    TailFitReport fit;
    DensityHistogram hist;
    Codebook codebook;  // truncated schemes: shared by clients and server
    SolverResult sol;
    bool fitted = false;
};

// "Empirical inside, model for the tails": pad the sample histogram with
// power-law mass out to `range`, so Q and the cube-root level layout see the
// fitted tail instead of a hard zero beyond the largest observed value.
inline DensityHistogram extend_with_model_tail(const DensityHistogram& base,
                                               const PowerLawTail& tail, double range) {
    if (range <= base.hi() || base.hi() < tail.g_min) return base;
    const int n_ext = 128;
    const double hi = base.hi();
    const double w = (range - hi) / n_ext;

    // one-sided model mass beyond x
    auto tail_mass = [&](double x) { return tail.rho * std::pow(tail.g_min / x, tail.gamma - 1.0); };

    std::vector<double> edges;
    std::vector<double> mass;
    edges.reserve(base.edges().size() + 2 * n_ext);
    mass.reserve(base.mass().size() + 2 * n_ext);
    for (int i = 0; i < n_ext; ++i) {
        double a = range - i * w, b = range - (i + 1) * w;  // outer to inner, left side
        edges.push_back(-a);
        mass.push_back(tail_mass(b) - tail_mass(a));
    }
    edges.insert(edges.end(), base.edges().begin(), base.edges().end());
    mass.insert(mass.end(), base.mass().begin(), base.mass().end());
    for (int i = 0; i < n_ext; ++i) {
        double a = hi + i * w, b = hi + (i + 1) * w;
        edges.push_back(b);
        mass.push_back(tail_mass(a) - tail_mass(b));
    }
    double total = 0.0;
    for (double m : mass) total += m;
    for (double& m : mass) m /= total;
    return DensityHistogram(std::move(edges), std::move(mass), base.symmetric());
}

inline void refit_group(const SimConfig& cfg, GroupState& st,
                        const std::vector<std::vector<double>>& gradients, int s_levels,
                        int round) {
    std::vector<double> pooled;
    pooled.reserve(gradients.size() * (st.group.end - st.group.begin));
    for (const auto& g : gradients)
        pooled.insert(pooled.end(), g.begin() + static_cast<std::ptrdiff_t>(st.group.begin),
                      g.begin() + static_cast<std::ptrdiff_t>(st.group.end));
    // never ask for more bins than the pool can populate
    int bins = std::min<int>(cfg.histogram_bins,
                             std::max<int>(16, static_cast<int>(pooled.size() / 4)));
    try {
        st.hist = empirical_density(pooled, bins, true);
        if (!is_truncated(cfg.scheme)) return;  // NQSGD only needs the shape

        st.fit = fit_tail(pooled, cfg.gmin_quantile);
        SolverScheme solver_scheme = cfg.scheme == SimScheme::Tqsgd    ? SolverScheme::Uniform
                                     : cfg.scheme == SimScheme::Tnqsgd ? SolverScheme::NonUniform
                                                                       : SolverScheme::BiScaled;
        double alpha_q1 = alpha_update(st.fit.tail, s_levels, 1.0);
        st.hist = extend_with_model_tail(st.hist, st.fit.tail, 10.0 * alpha_q1);
        st.sol = solve_alpha(solver_scheme, st.fit.tail, s_levels, st.hist);
        require(st.sol.converged, ErrKind::NoConvergence,
                "threshold iteration did not converge on the fitted tail");
        double alpha = static_cast<double>(static_cast<float>(st.sol.alpha));

        if (cfg.scheme == SimScheme::Tqsgd) {
            st.codebook = make_uniform_codebook(alpha, s_levels);
        } else if (cfg.scheme == SimScheme::Tnqsgd) {
            st.codebook = make_cuberoot_codebook(alpha, s_levels, st.hist);
        } else {
            double k = static_cast<double>(static_cast<float>(st.sol.k));
            st.codebook = make_biscaled_codebook(alpha, k, st.sol.s_alpha, st.sol.s_beta);
        }
        st.fitted = true;
    } catch (const HtqError& e) {
        raise(e.kind(),
              "round " + std::to_string(round) + ", group '" + st.group.name + "': " + e.what());
    }
}

inline QuantizedMessage encode_group(const SimConfig& cfg, const GroupState& st,
                                     std::span<const double> values, int s_levels, Rng& rng) {
    QuantizedMessage msg;
    msg.scheme = wire_scheme(cfg.scheme);
    msg.bits = static_cast<uint8_t>(cfg.bits);
    msg.dim = static_cast<uint32_t>(values.size());

    if (is_truncated(cfg.scheme)) {
        const Codebook& cb = st.codebook;
        msg.alpha = static_cast<float>(cb.alpha());
        if (cfg.scheme == SimScheme::Tbqsgd) {
            msg.k = static_cast<float>(st.sol.k);
            msg.s_alpha = static_cast<uint16_t>(st.sol.s_alpha);
            msg.s_beta = static_cast<uint16_t>(st.sol.s_beta);
        }
        auto clipped = truncate(values, cb.alpha());
        msg.payload = encode_bits(stochastic_quantize(clipped, cb, rng), cfg.bits);
        return msg;
    }

    // QSGD / NQSGD: per-message range, no truncation
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, std::abs(v));
    double alpha = peak > 0.0 ? snap_alpha_up(peak) : 1.0;
    msg.alpha = static_cast<float>(alpha);
    Codebook cb = cfg.scheme == SimScheme::Qsgd ? make_uniform_codebook(alpha, s_levels)
                                                : make_cuberoot_codebook(alpha, s_levels, st.hist);
    msg.payload = encode_bits(stochastic_quantize(values, cb, rng), cfg.bits);
    return msg;
}

inline Codebook resolve_codebook(const GroupState& st, const QuantizedMessage& msg) {
    int s_levels = (1 << msg.bits) - 1;
    switch (msg.scheme) {
        case Scheme::Qsgd:
            return make_uniform_codebook(static_cast<double>(msg.alpha), s_levels);
        case Scheme::Nqsgd:
            return make_cuberoot_codebook(static_cast<double>(msg.alpha), s_levels, st.hist);
        default:
            return st.codebook;  // truncated schemes share solver state
    }
}

template <class Loss>
MetricsLog run_simulation_impl(const SimConfig& cfg, const Loss& loss) {
    const int n_clients = cfg.problem.clients;
    const size_t dim = loss.dim();
    require(dim == static_cast<size_t>(cfg.problem.dim), ErrKind::DimensionMismatch,
            "problem.dim must match the loss dimension");
    const int s_levels = (1 << cfg.bits) - 1;

    std::vector<ParamGroup> groups = cfg.groups.empty() ? loss.default_groups() : cfg.groups;
    validate_groups(groups, dim);

    std::vector<double> weights(static_cast<size_t>(n_clients),
                                1.0 / static_cast<double>(n_clients));
    if (cfg.weights == WeightsMode::DataProportional) {
        auto sizes = loss.shard_sizes(n_clients);
        double total = 0.0;
        for (size_t m : sizes) total += static_cast<double>(m);
        for (int i = 0; i < n_clients; ++i)
            weights[static_cast<size_t>(i)] = static_cast<double>(sizes[static_cast<size_t>(i)]) / total;
    }

    std::vector<double> theta = loss.initial_theta();
    std::vector<double> velocity(cfg.momentum > 0.0 ? dim : 0, 0.0);
    std::vector<GroupState> states;
    for (const auto& g : groups) states.push_back(GroupState{g, {}, {}, {}, {}, false});

    MetricsLog log;
    log.scheme = scheme_name(cfg.scheme);
    log.bits = cfg.scheme == SimScheme::Dsgd ? 32 : cfg.bits;
    log.seed = cfg.seed;

    std::vector<std::vector<double>> gradients(static_cast<size_t>(n_clients));
    std::vector<double> full_grad;
    std::vector<double> aggregated(dim, 0.0);
    uint64_t cum_bytes = 0;

    for (int t = 0; t < cfg.problem.rounds; ++t) {
        RoundRecord rec;
        rec.round = t;
        rec.loss = loss.loss(theta);
        loss.full_gradient(theta, full_grad);
        for (double v : full_grad) rec.grad_norm_sq += v * v;

        for (int i = 0; i < n_clients; ++i) {
            Rng rng(cfg.seed, "client-noise",
                    static_cast<uint64_t>(t) * static_cast<uint64_t>(n_clients) +
                        static_cast<uint64_t>(i));
            loss.client_gradient(theta, i, cfg.problem.batch, rng,
                                 gradients[static_cast<size_t>(i)]);
        }

        uint64_t bytes_this_client = 0;
        if (!is_compressed(cfg.scheme)) {
            std::fill(aggregated.begin(), aggregated.end(), 0.0);
            for (int i = 0; i < n_clients; ++i)
                for (size_t j = 0; j < dim; ++j)
                    aggregated[j] +=
                        weights[static_cast<size_t>(i)] * gradients[static_cast<size_t>(i)][j];
            bytes_this_client = 4ull * dim;  // f32 baseline
        } else {
            const bool needs_hist = is_truncated(cfg.scheme) || cfg.scheme == SimScheme::Nqsgd;
            if (needs_hist && t % cfg.refit_every == 0)
                for (auto& st : states) refit_group(cfg, st, gradients, s_levels, t);

            for (size_t gi = 0; gi < states.size(); ++gi) {
                auto& st = states[gi];
                const size_t glen = st.group.end - st.group.begin;
                std::vector<std::vector<uint8_t>> raw(static_cast<size_t>(n_clients));

                for (int i = 0; i < n_clients; ++i) {
                    std::span<const double> vals(
                        gradients[static_cast<size_t>(i)].data() + st.group.begin, glen);
                    uint64_t msg_index =
                        (static_cast<uint64_t>(t) * static_cast<uint64_t>(n_clients) +
                         static_cast<uint64_t>(i)) *
                            states.size() +
                        gi;
                    Rng rng(cfg.seed, "quantize", msg_index);
                    QuantizedMessage msg = encode_group(cfg, st, vals, s_levels, rng);
                    raw[static_cast<size_t>(i)] = msg.serialize();
                    if (i == 0) bytes_this_client += raw[0].size();
                }

                auto resolver = [&](const QuantizedMessage& m) { return resolve_codebook(st, m); };
                std::vector<double> part = server_aggregate(raw, weights, resolver);
                for (size_t j = 0; j < glen; ++j) aggregated[st.group.begin + j] = part[j];
            }
        }

        for (const auto& st : states)
            if (st.fitted)
                rec.fits.push_back(GroupFitInfo{st.group.name, st.fit.tail.gamma,
                                                st.fit.tail.g_min, st.fit.tail.rho, st.sol.alpha});

        cum_bytes += bytes_this_client * static_cast<uint64_t>(n_clients);
        rec.bytes_per_client = bytes_this_client;
        rec.cum_bytes = cum_bytes;
        log.rounds.push_back(std::move(rec));

        // theta_{t+1} = theta_t - eta * aggregate
        if (cfg.momentum > 0.0) {
            for (size_t j = 0; j < dim; ++j) {
                velocity[j] = cfg.momentum * velocity[j] + aggregated[j];
                theta[j] -= cfg.problem.eta * velocity[j];
            }
        } else {
            for (size_t j = 0; j < dim; ++j) theta[j] -= cfg.problem.eta * aggregated[j];
        }
    }

    log.final_loss = loss.loss(theta);
    loss.full_gradient(theta, full_grad);
    for (double v : full_grad) log.final_grad_norm_sq += v * v;
    log.total_bytes = cum_bytes;
    return log;
}

}  // namespace detail

inline MetricsLog run_simulation(const SimConfig& cfg) {
    validate_sim_config(cfg);
    if (cfg.loss == LossKind::QuadraticPareto) {
        QuadraticParetoLoss loss(static_cast<size_t>(cfg.problem.dim), cfg.problem.sigma2,
                                 cfg.init_distance, cfg.noise_gamma, cfg.noise_rho,
                                 cfg.init_style, cfg.seed, cfg.noise_cutoff);
        return detail::run_simulation_impl(cfg, loss);
    }
    LogisticSyntheticLoss loss(static_cast<size_t>(cfg.problem.dim), cfg.problem.clients,
                               cfg.samples_per_client, cfg.feature_scale_hi, cfg.seed,
                               cfg.label_noise);
    return detail::run_simulation_impl(cfg, loss);
}

// ---------------------------------------------------------------------------
// Scheme comparison over a shared benchmark.
// ---------------------------------------------------------------------------

struct CompareRow {
    std::string scheme;
    int bits = 0;
    int round = 0;
    double loss = 0.0;
    double grad_norm_sq = 0.0;
    uint64_t cum_bytes = 0;
};

inline std::vector<CompareRow> compare_schemes(const std::vector<SimConfig>& configs) {
    require(!configs.empty(), ErrKind::IncompatibleConfigs, "no configs");
    const SimConfig& base = configs.front();
    for (const auto& c : configs) {
        bool same = c.seed == base.seed && c.loss == base.loss &&
                    c.problem.dim == base.problem.dim &&
                    c.problem.clients == base.problem.clients &&
                    c.problem.batch == base.problem.batch && c.problem.eta == base.problem.eta &&
                    c.problem.rounds == base.problem.rounds &&
                    c.problem.sigma2 == base.problem.sigma2;
        require(same, ErrKind::IncompatibleConfigs,
                "compare requires a shared (seed, loss, problem) across configs");
    }
    std::vector<CompareRow> rows;
    for (const auto& c : configs) {
        MetricsLog log = run_simulation(c);
        for (const auto& r : log.rounds)
            rows.push_back(
                CompareRow{log.scheme, log.bits, r.round, r.loss, r.grad_norm_sq, r.cum_bytes});
        rows.push_back(CompareRow{log.scheme, log.bits, c.problem.rounds, log.final_loss,
                                  log.final_grad_norm_sq, log.total_bytes});
    }
    return rows;
}

inline std::string compare_csv(const std::vector<CompareRow>& rows) {
    std::ostringstream out;
    out << "scheme,bits,round,loss,grad_norm_sq,cum_bytes\n";
    out.precision(12);
    for (const auto& r : rows)
        out << r.scheme << ',' << r.bits << ',' << r.round << ',' << r.loss << ','
            << r.grad_norm_sq << ',' << r.cum_bytes << '\n';
    return out.str();
}

}  // namespace htq

#pragma once

#include <sstream>
#include <string>

#include <json.hpp>

#include "htq/bounds.hpp"
#include "htq/config.hpp"
#include "htq/io.hpp"
#include "htq/sim.hpp"
#include "htq/solver.hpp"

namespace htq {

inline ordered_json solver_result_to_json(const SolverResult& r, const std::string& scheme,
                                          int bits) {
    ordered_json j;
    j["scheme"] = scheme;
    j["bits"] = bits;
    j["alpha"] = r.alpha;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["q_value"] = r.q_value;
    if (!std::isnan(r.k)) {
        j["k"] = r.k;
        j["s_alpha"] = r.s_alpha;
        j["s_beta"] = r.s_beta;
    }
    return j;
}

inline ordered_json error_breakdown_to_json(const ErrorBreakdown& e) {
    ordered_json j;
    j["quant_variance"] = e.quant_variance;
    j["trunc_bias"] = e.trunc_bias;
    j["e_tq"] = e.e_tq;
    j["e_dsgd"] = e.e_dsgd;
    j["total_bound"] = e.total_bound;
    j["alpha"] = e.alpha;
    j["q_value"] = e.q_value;
    if (!std::isnan(e.total_bound_approx)) {
        j["total_bound_approx"] = e.total_bound_approx;
        j["epsilon_gap"] = e.epsilon_gap;
    }
    return j;
}

// One JSON object per line: every round, then a summary line.
inline std::string metrics_to_jsonl(const MetricsLog& log) {
    std::ostringstream out;
    for (const auto& r : log.rounds) {
        ordered_json j;
        j["round"] = r.round;
        j["loss"] = r.loss;
        j["grad_norm_sq"] = r.grad_norm_sq;
        j["bytes_per_client"] = r.bytes_per_client;
        j["cum_bytes"] = r.cum_bytes;
        ordered_json fits = ordered_json::array();
        for (const auto& f : r.fits) {
            ordered_json fj;
            fj["group"] = f.name;
            fj["gamma"] = f.gamma;
            fj["g_min"] = f.g_min;
            fj["rho"] = f.rho;
            fj["alpha"] = f.alpha;
            fits.push_back(fj);
        }
        j["groups"] = fits;
        out << j.dump() << '\n';
    }
    ordered_json s;
    s["summary"] = true;
    s["scheme"] = log.scheme;
    s["bits"] = log.bits;
    s["seed"] = log.seed;
    s["rounds"] = log.rounds.size();
    s["final_loss"] = log.final_loss;
    s["final_grad_norm_sq"] = log.final_grad_norm_sq;
    s["total_bytes"] = log.total_bytes;
    out << s.dump() << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Simulation config file (sectioned key-value text).
// ---------------------------------------------------------------------------

inline std::string default_sim_config_text() {
    return

        "# htq simulation config\n"
        "[problem]\n"
        "clients = 8\n"
        "batch = 1\n"
        "dim = 1000\n"
        "sigma2 = 10.0\n"
        "nu = 1.0\n"
        "eta = 0.1\n"
        "rounds = 2000\n"
        "f_gap = 50.0\n"
        "\n"
        "[sim]\n"
        "scheme = tqsgd\n"
        "bits = 3\n"
        "seed = 1\n"
        "refit_every = 10\n"
        "weights = uniform        # uniform | data\n"
        "momentum = 0.0\n"
        "\n"
        "[tail]\n"
        "gmin_quantile = 0.90\n"
        "bins = 1024\n"
        "\n"
        "[loss]\n"
        "kind = quadratic_pareto  # quadratic_pareto | logistic\n"
        "noise_gamma = 3.5\n"
        "noise_rho = 0.25\n"
        "noise_cutoff = 0          # 0 = uncensored Pareto tail\n"
        "init_distance = 10.0\n"
        "init_style = constant    # constant | heavy\n"
        "samples_per_client = 128\n"
        "feature_scale_hi = 3.0\n"
        "label_noise = 0.05\n";
}

inline SimConfig sim_config_from_ini(const IniConfig& ini) {
    SimConfig cfg;
    cfg.problem.clients = static_cast<int>(ini.get_int("problem", "clients", cfg.problem.clients));
    cfg.problem.batch = static_cast<int>(ini.get_int("problem", "batch", cfg.problem.batch));
    cfg.problem.dim = static_cast<int>(ini.get_int("problem", "dim", cfg.problem.dim));
    cfg.problem.sigma2 = ini.get_num("problem", "sigma2", cfg.problem.sigma2);
    cfg.problem.nu = ini.get_num("problem", "nu", cfg.problem.nu);
    cfg.problem.eta = ini.get_num("problem", "eta", cfg.problem.eta);
    cfg.problem.rounds = static_cast<int>(ini.get_int("problem", "rounds", cfg.problem.rounds));
    cfg.problem.f_gap = ini.get_num("problem", "f_gap", cfg.problem.f_gap);

    cfg.scheme = parse_scheme(ini.get_str("sim", "scheme", "tqsgd"));
    cfg.bits = static_cast<int>(ini.get_int("sim", "bits", cfg.bits));
    cfg.seed = static_cast<uint64_t>(ini.get_int("sim", "seed", static_cast<long>(cfg.seed)));
    cfg.refit_every = static_cast<int>(ini.get_int("sim", "refit_every", cfg.refit_every));
    std::string w = ini.get_str("sim", "weights", "uniform");
    if (w == "uniform") cfg.weights = WeightsMode::Uniform;
    else if (w == "data") cfg.weights = WeightsMode::DataProportional;
    else raise(ErrKind::ParseError, "sim.weights must be uniform or data");
    cfg.momentum = ini.get_num("sim", "momentum", cfg.momentum);

    cfg.gmin_quantile = ini.get_num("tail", "gmin_quantile", cfg.gmin_quantile);
    cfg.histogram_bins = static_cast<int>(ini.get_int("tail", "bins", cfg.histogram_bins));

    std::string kind = ini.get_str("loss", "kind", "quadratic_pareto");
    if (kind == "quadratic_pareto") cfg.loss = LossKind::QuadraticPareto;
    else if (kind == "logistic") cfg.loss = LossKind::LogisticSynthetic;
    else raise(ErrKind::ParseError, "loss.kind must be quadratic_pareto or logistic");
    cfg.noise_gamma = ini.get_num("loss", "noise_gamma", cfg.noise_gamma);
    cfg.noise_rho = ini.get_num("loss", "noise_rho", cfg.noise_rho);
    double cutoff = ini.get_num("loss", "noise_cutoff", 0.0);
    if (cutoff > 0.0) cfg.noise_cutoff = cutoff;
    cfg.init_distance = ini.get_num("loss", "init_distance", cfg.init_distance);
    std::string init = ini.get_str("loss", "init_style", "constant");
    if (init == "constant") cfg.init_style = InitStyle::Constant;
    else if (init == "heavy") cfg.init_style = InitStyle::HeavyTail;
    else raise(ErrKind::ParseError, "loss.init_style must be constant or heavy");
    cfg.samples_per_client =
        static_cast<int>(ini.get_int("loss", "samples_per_client", cfg.samples_per_client));
    cfg.feature_scale_hi = ini.get_num("loss", "feature_scale_hi", cfg.feature_scale_hi);
    cfg.label_noise = ini.get_num("loss", "label_noise", cfg.label_noise);
    return cfg;
}

}  // namespace htq

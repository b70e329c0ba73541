// htq command-line tool: tail fitting, quantization codec, threshold solving,
// bound calculators, the distributed-SGD simulator and the verification
// suites, glued together with a reproducibility manifest per output.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htq/bounds.hpp"
#include "htq/codec.hpp"
#include "htq/common.hpp"
#include "htq/io.hpp"
#include "htq/report.hpp"
#include "htq/sim.hpp"
#include "htq/solver.hpp"
#include "htq/verify.hpp"

namespace {

using htq::ordered_json;

struct RunContext {
    std::string subcommand;
    uint64_t seed = 0;
    int threads = 0;
    ordered_json config = ordered_json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

void write_manifest(const RunContext& ctx) {
    if (ctx.outputs.empty()) return;
    ordered_json m;
    m["subcommand"] = ctx.subcommand;
    m["version"] = htq::kVersion;
    m["seed"] = ctx.seed;
    m["threads"] = ctx.threads;
    m["config"] = ctx.config;
    m["inputs"] = ctx.inputs;
    m["outputs"] = ctx.outputs;
    auto elapsed = std::chrono::steady_clock::now() - ctx.start;
    m["duration_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    htq::write_file_text(ctx.outputs.front() + ".manifest.json", m.dump(2) + "\n");
}

void emit(const ordered_json& j, const std::string& out_path, RunContext& ctx) {
    std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        htq::write_file_text(out_path, text);
        ctx.outputs.push_back(out_path);
    }
}

htq::SolverScheme parse_solver_scheme(const std::string& s) {
    if (s == "uniform") return htq::SolverScheme::Uniform;
    if (s == "nonuniform") return htq::SolverScheme::NonUniform;
    if (s == "biscaled") return htq::SolverScheme::BiScaled;
    htq::raise(htq::ErrKind::UsageError, "scheme must be uniform, nonuniform or biscaled");
}

int levels_for_bits(int bits) {
    htq::require(bits >= 1 && bits <= 8, htq::ErrKind::UsageError, "bits must be in [1, 8]");
    return (1 << bits) - 1;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string input, format = "auto", out;
    double gmin = 0.0;
    double gmin_quantile = 0.90;
};

void cmd_fit(const FitArgs& a, RunContext& ctx) {
    ctx.inputs.push_back(a.input);
    auto values = htq::read_gradient_dump(a.input, a.format);
    htq::TailFitReport report;
    if (a.gmin > 0.0) {
        report.tail.g_min = a.gmin;
        report.gamma_raw = htq::fit_gamma_mle(values, a.gmin);
        report.tail.gamma = std::clamp(report.gamma_raw, htq::kGammaClampLo, htq::kGammaClampHi);
        report.gamma_clamped = report.tail.gamma != report.gamma_raw;
        report.tail.rho = htq::estimate_rho(values, a.gmin);
        for (double v : values)
            if (std::abs(v) > a.gmin) ++report.n_tail;
    } else {
        report = htq::fit_tail(values, a.gmin_quantile);
    }
    emit(htq::tail_to_json(report), a.out, ctx);
}

// ---------------------------------------------------------------------------
// quantize / dequantize
// ---------------------------------------------------------------------------

struct QuantizeArgs {
    std::string input, output;
    std::string scheme = "tq";
    int bits = 3;
    double alpha = 0.0;  // 0 = derive
    std::string tail_path;
    double gmin_quantile = 0.90;
    int bins = 1024;
};

void cmd_quantize(const QuantizeArgs& a, RunContext& ctx) {
    ctx.inputs.push_back(a.input);
    auto values = htq::read_gradient_dump(a.input);
    htq::require(!values.empty(), htq::ErrKind::DegenerateSamples, "empty gradient dump");
    const int s = levels_for_bits(a.bits);
    const htq::SimScheme scheme = htq::parse_scheme(a.scheme);
    htq::require(scheme != htq::SimScheme::Dsgd, htq::ErrKind::UsageError,
                 "dsgd is uncompressed; nothing to quantize");

    htq::QuantizedMessage msg;
    msg.scheme = htq::wire_scheme(scheme);
    msg.bits = static_cast<uint8_t>(a.bits);
    msg.dim = static_cast<uint32_t>(values.size());

    htq::Codebook cb;
    std::vector<double> prepared;
    if (!htq::is_truncated(scheme)) {
        double peak = 0.0;
        for (double v : values) peak = std::max(peak, std::abs(v));
        double alpha = a.alpha > 0.0 ? a.alpha : (peak > 0.0 ? htq::detail::snap_alpha_up(peak) : 1.0);
        cb = scheme == htq::SimScheme::Qsgd
                 ? htq::make_uniform_codebook(alpha, s)
                 : htq::make_cuberoot_codebook(alpha, s, htq::empirical_density(values, a.bins, true));
        prepared = htq::truncate(values, alpha);  // no-op unless --alpha under-covers
    } else {
        htq::DensityHistogram hist = htq::empirical_density(values, a.bins, true);
        double alpha = a.alpha;
        htq::SolverResult sol;
        if (alpha <= 0.0) {
            htq::PowerLawTail tail = a.tail_path.empty() ? htq::fit_tail(values, a.gmin_quantile).tail
                                                         : htq::read_tail_json(a.tail_path);
            if (!a.tail_path.empty()) ctx.inputs.push_back(a.tail_path);
            htq::SolverScheme ss = scheme == htq::SimScheme::Tqsgd    ? htq::SolverScheme::Uniform
                                   : scheme == htq::SimScheme::Tnqsgd ? htq::SolverScheme::NonUniform
                                                                      : htq::SolverScheme::BiScaled;
            sol = htq::solve_alpha(ss, tail, s, hist);
            alpha = sol.alpha;
        }
        alpha = static_cast<double>(static_cast<float>(alpha));
        if (scheme == htq::SimScheme::Tqsgd) {
            cb = htq::make_uniform_codebook(alpha, s);
        } else if (scheme == htq::SimScheme::Tnqsgd) {
            cb = htq::make_cuberoot_codebook(alpha, s, hist);
        } else {
            double k;
            int s_alpha;
            if (a.alpha > 0.0) {  // no solver run: pick k on the Q_B grid, split from data
                k = htq::minimize_q_b(alpha, hist);
                s_alpha = htq::split_levels_biscaled(s, k, alpha, hist).s_alpha;
            } else {
                k = static_cast<double>(static_cast<float>(sol.k));
                s_alpha = sol.s_alpha;
            }
            int s_beta = s - s_alpha;
            cb = htq::make_biscaled_codebook(alpha, k, s_alpha, s_beta);
            msg.k = static_cast<float>(k);
            msg.s_alpha = static_cast<uint16_t>(s_alpha);
            msg.s_beta = static_cast<uint16_t>(s_beta);
        }
        prepared = htq::truncate(values, alpha);
    }
    msg.alpha = static_cast<float>(cb.alpha());

    htq::Rng rng(ctx.seed, "quantize", 0);
    msg.payload = htq::encode_bits(htq::stochastic_quantize(prepared, cb, rng), a.bits);

    auto bytes = msg.serialize();
    htq::write_file_bytes(a.output, bytes);
    ctx.outputs.push_back(a.output);
    htq::write_file_text(a.output + ".codebook.json", htq::codebook_to_json(cb).dump(2) + "\n");
    ctx.outputs.push_back(a.output + ".codebook.json");

    ordered_json summary;
    summary["scheme"] = a.scheme;
    summary["bits"] = a.bits;
    summary["dim"] = msg.dim;
    summary["alpha"] = cb.alpha();
    summary["message_bytes"] = bytes.size();
    std::cout << summary.dump(2) << "\n";
}

struct DequantizeArgs {
    std::string input, output;
    std::string codebook_path;
    std::string density_path;
};

void cmd_dequantize(const DequantizeArgs& a, RunContext& ctx) {
    ctx.inputs.push_back(a.input);
    auto bytes = htq::read_file_bytes(a.input);
    htq::QuantizedMessage msg = htq::QuantizedMessage::deserialize(bytes);
    const int s = levels_for_bits(msg.bits);

    auto load_json = [](const std::string& path) {
        auto bytes = htq::read_file_bytes(path);
        ordered_json j = ordered_json::parse(bytes.begin(), bytes.end(), nullptr, false);
        htq::require(!j.is_discarded(), htq::ErrKind::ParseError, path + ": invalid JSON");
        return j;
    };
    htq::Codebook cb;
    std::string sidecar = a.input + ".codebook.json";
    if (!a.codebook_path.empty()) {
        ctx.inputs.push_back(a.codebook_path);
        cb = htq::codebook_from_json(load_json(a.codebook_path));
    } else if (std::filesystem::exists(sidecar)) {
        ctx.inputs.push_back(sidecar);
        cb = htq::codebook_from_json(load_json(sidecar));
    } else {
        switch (msg.scheme) {
            case htq::Scheme::TqUniform:
            case htq::Scheme::Qsgd:
                cb = htq::make_uniform_codebook(static_cast<double>(msg.alpha), s);
                break;
            case htq::Scheme::Tbq:
                cb = htq::make_biscaled_codebook(static_cast<double>(msg.alpha),
                                                 static_cast<double>(msg.k), msg.s_alpha, msg.s_beta);
                break;
            default:
                htq::require(!a.density_path.empty(), htq::ErrKind::UsageError,
                             "cube-root messages need --codebook or --density to rebuild levels");
                ctx.inputs.push_back(a.density_path);
                cb = htq::make_cuberoot_codebook(static_cast<double>(msg.alpha), s,
                                                 htq::read_histogram_json(a.density_path));
        }
    }

    auto indices = htq::decode_bits(msg.payload, msg.bits, msg.dim);
    auto values = htq::dequantize(indices, cb);
    htq::write_f32_dump(a.output, values);
    ctx.outputs.push_back(a.output);
}

// ---------------------------------------------------------------------------
// solve / bound
// ---------------------------------------------------------------------------

struct SolveArgs {
    std::string tail_path;
    std::string scheme = "uniform";
    int bits = 3;
    int levels = 0;  // overrides bits when set
    std::string density_path;
    bool q_one = false;
    int alternations = 0;
    int clients = 1;
    int dim = 1;
    std::string out;
};

template <class Density>
htq::SolverResult solve_with(const SolveArgs& a, const htq::PowerLawTail& tail, int s,
                             const Density& density) {
    htq::SolverOptions opts;
    opts.force_q_one = a.q_one;
    opts.alternations = a.alternations;
    return htq::solve_alpha(parse_solver_scheme(a.scheme), tail, s, density, opts);
}

int cmd_solve(const SolveArgs& a, RunContext& ctx) {
    ctx.inputs.push_back(a.tail_path);
    htq::PowerLawTail tail = htq::read_tail_json(a.tail_path);
    int s = a.levels > 0 ? a.levels : levels_for_bits(a.bits);
    htq::SolverResult sol;
    if (a.density_path.empty()) {
        sol = solve_with(a, tail, s, htq::PowerLawModelDensity(tail));
    } else {
        ctx.inputs.push_back(a.density_path);
        sol = solve_with(a, tail, s, htq::read_histogram_json(a.density_path));
    }
    emit(htq::solver_result_to_json(sol, a.scheme, a.bits), a.out, ctx);
    return sol.converged ? 0 : 4;
}

struct BoundArgs {
    std::string tail_path;
    std::string scheme = "uniform";
    int bits = 3;
    std::string density_path;
    htq::ProblemSpec problem;
    std::string sweep;  // "lo:hi" bit range
    std::string csv_out;
    std::string out;
};

template <class Density>
void bound_with(const BoundArgs& a, const htq::PowerLawTail& tail, const Density& density,
                RunContext& ctx) {
    htq::SolverScheme scheme = parse_solver_scheme(a.scheme);
    htq::ErrorBreakdown e =
        htq::convergence_bound(a.problem, scheme, tail, levels_for_bits(a.bits), density);
    emit(htq::error_breakdown_to_json(e), a.out, ctx);

    if (!a.sweep.empty()) {
        auto colon = a.sweep.find(':');
        htq::require(colon != std::string::npos, htq::ErrKind::UsageError,
                     "--sweep-bits expects LO:HI");
        int lo = std::stoi(a.sweep.substr(0, colon));
        int hi = std::stoi(a.sweep.substr(colon + 1));
        htq::require(lo >= 1 && hi >= lo && hi <= 8, htq::ErrKind::UsageError,
                     "--sweep-bits range must lie in [1, 8]");
        std::ostringstream csv;
        csv << "bits,s,quant_variance,trunc_bias,e_tq,e_dsgd,total_bound\n";
        csv.precision(12);
        for (int b = lo; b <= hi; ++b) {
            try {
                htq::ErrorBreakdown row =
                    htq::convergence_bound(a.problem, scheme, tail, levels_for_bits(b), density);
                csv << b << ',' << levels_for_bits(b) << ',' << row.quant_variance << ','
                    << row.trunc_bias << ',' << row.e_tq << ',' << row.e_dsgd << ','
                    << row.total_bound << '\n';
            } catch (const htq::HtqError& e) {
                if (e.kind() != htq::ErrKind::AlphaBelowGmin) throw;
                csv << "# bits=" << b << ": skipped, " << e.what() << '\n';
            }
        }
        std::string path = a.csv_out.empty() ? "bound_sweep.csv" : a.csv_out;
        htq::write_file_text(path, csv.str());
        ctx.outputs.push_back(path);
    }
}

void cmd_bound(const BoundArgs& a, RunContext& ctx) {
    ctx.inputs.push_back(a.tail_path);
    htq::PowerLawTail tail = htq::read_tail_json(a.tail_path);
    if (a.density_path.empty()) {
        bound_with(a, tail, htq::PowerLawModelDensity(tail), ctx);
    } else {
        ctx.inputs.push_back(a.density_path);
        bound_with(a, tail, htq::read_histogram_json(a.density_path), ctx);
    }
}

// ---------------------------------------------------------------------------
// simulate / compare
// ---------------------------------------------------------------------------

htq::SimConfig load_sim_config(const std::string& path, RunContext& ctx) {
    ctx.inputs.push_back(path);
    auto bytes = htq::read_file_bytes(path);
    auto ini = htq::IniConfig::parse(std::string(bytes.begin(), bytes.end()), path);
    for (const auto& [k, v] : ini.values()) ctx.config[k] = v;
    return htq::sim_config_from_ini(ini);
}

struct SimulateArgs {
    std::string config_path;
    std::string out = "metrics.jsonl";
    std::string scheme_override;
    int bits_override = 0;
    bool seed_given = false;
};

void cmd_simulate(const SimulateArgs& a, RunContext& ctx) {
    htq::SimConfig cfg = load_sim_config(a.config_path, ctx);
    if (!a.scheme_override.empty()) cfg.scheme = htq::parse_scheme(a.scheme_override);
    if (a.bits_override > 0) cfg.bits = a.bits_override;
    if (a.seed_given) cfg.seed = ctx.seed;
    htq::MetricsLog log = htq::run_simulation(cfg);
    htq::write_file_text(a.out, htq::metrics_to_jsonl(log));
    ctx.outputs.push_back(a.out);
    std::cout << "final_loss " << log.final_loss << ", total_bytes " << log.total_bytes << "\n";
}

struct CompareArgs {
    std::string config_path;
    std::string schemes = "dsgd,qsgd,tqsgd,tnqsgd";
    std::string bits = "";
    std::string out = "compare.csv";
    bool seed_given = false;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

void cmd_compare(const CompareArgs& a, RunContext& ctx) {
    htq::SimConfig base = load_sim_config(a.config_path, ctx);
    if (a.seed_given) base.seed = ctx.seed;
    std::vector<int> bit_list;
    for (const auto& b : split_list(a.bits)) bit_list.push_back(std::stoi(b));
    if (bit_list.empty()) bit_list.push_back(base.bits);

    std::vector<htq::SimConfig> configs;
    for (const auto& name : split_list(a.schemes)) {
        htq::SimScheme scheme = htq::parse_scheme(name);
        if (scheme == htq::SimScheme::Dsgd) {
            htq::SimConfig c = base;
            c.scheme = scheme;
            configs.push_back(c);
            continue;
        }
        for (int b : bit_list) {
            htq::SimConfig c = base;
            c.scheme = scheme;
            c.bits = b;
            configs.push_back(c);
        }
    }
    auto rows = htq::compare_schemes(configs);
    htq::write_file_text(a.out, htq::compare_csv(rows));
    ctx.outputs.push_back(a.out);
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const std::vector<std::string>& suites, RunContext& ctx) {
    auto reports = htq::verify::verify_suites(suites, ctx.seed == 0 ? 1 : ctx.seed, ctx.threads);
    bool all_pass = true;
    for (const auto& r : reports) {
        bool ok = r.pass();
        all_pass = all_pass && ok;
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << r.criterion << " (" << r.suite
                  << ", " << std::fixed << std::setprecision(2) << r.seconds << " s)\n";
        std::cout.unsetf(std::ios::fixed);
        for (const auto& c : r.checks)
            std::cout << "    " << (c.pass ? "ok   " : "FAIL ") << c.name
                      << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
    }
    return all_pass ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"htq: truncate-then-quantize gradient compression toolkit"};
    app.require_subcommand(1);

    RunContext ctx;
    uint64_t seed = 0;
    int threads = 0;
    app.add_option("--seed", seed, "top-level RNG seed (default 0)")->capture_default_str();
    app.add_option("--threads", threads, "worker threads (default: all cores)");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit the heavy-tail model to a gradient dump");
    fit->add_option("--input", fit_args.input, "gradient dump (.f32 binary or .csv)")->required();
    fit->add_option("--format", fit_args.format, "auto|f32|csv")->capture_default_str();
    fit->add_option("--gmin", fit_args.gmin, "fixed g_min (skips quantile selection)");
    fit->add_option("--gmin-quantile", fit_args.gmin_quantile, "|g| quantile for g_min")
        ->capture_default_str();
    fit->add_option("--out", fit_args.out, "write the tail JSON here (default stdout)");

    QuantizeArgs q_args;
    auto* quant = app.add_subcommand("quantize", "compress a gradient dump into a .htq message");
    quant->add_option("input", q_args.input, "gradient dump")->required();
    quant->add_option("output", q_args.output, "output message file")->required();
    quant->add_option("--scheme", q_args.scheme, "tq|tnq|tbq|qsgd|nqsgd")->capture_default_str();
    quant->add_option("--bits", q_args.bits, "bit budget per element")->capture_default_str();
    quant->add_option("--alpha", q_args.alpha, "override the truncation threshold");
    quant->add_option("--tail", q_args.tail_path, "fitted-tail JSON (default: fit from input)");
    quant->add_option("--gmin-quantile", q_args.gmin_quantile, "")->capture_default_str();
    quant->add_option("--bins", q_args.bins, "histogram bins")->capture_default_str();

    DequantizeArgs dq_args;
    auto* dequant = app.add_subcommand("dequantize", "decode a .htq message back to f32");
    dequant->add_option("input", dq_args.input, "message file")->required();
    dequant->add_option("output", dq_args.output, "output f32 dump")->required();
    dequant->add_option("--codebook", dq_args.codebook_path, "codebook JSON (default: sidecar)");
    dequant->add_option("--density", dq_args.density_path,
                        "histogram JSON for rebuilding cube-root levels");

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "solve the optimal truncation threshold");
    solve->add_option("--tail", solve_args.tail_path, "fitted-tail JSON")->required();
    solve->add_option("--scheme", solve_args.scheme, "uniform|nonuniform|biscaled")
        ->capture_default_str();
    solve->add_option("--bits", solve_args.bits, "")->capture_default_str();
    solve->add_option("--levels", solve_args.levels, "interval count s (overrides --bits)");
    solve->add_option("--density", solve_args.density_path,
                      "histogram JSON for Q (default: fitted model)");
    solve->add_flag("--q-one", solve_args.q_one, "closed form with Q forced to 1");
    solve->add_option("--alternations", solve_args.alternations,
                      "biscaled: fixed alternation steps (0 = run to convergence)");
    solve->add_option("--clients", solve_args.clients, "")->capture_default_str();
    solve->add_option("--dim", solve_args.dim, "")->capture_default_str();
    solve->add_option("--out", solve_args.out, "write SolverResult JSON here (default stdout)");

    BoundArgs bound_args;
    auto* bound = app.add_subcommand("bound", "evaluate the convergence-error bound");
    bound->add_option("--tail", bound_args.tail_path, "fitted-tail JSON")->required();
    bound->add_option("--scheme", bound_args.scheme, "uniform|nonuniform|biscaled")
        ->capture_default_str();
    bound->add_option("--bits", bound_args.bits, "")->capture_default_str();
    bound->add_option("--density", bound_args.density_path, "histogram JSON for Q");
    bound->add_option("--clients", bound_args.problem.clients, "")->capture_default_str();
    bound->add_option("--batch", bound_args.problem.batch, "")->capture_default_str();
    bound->add_option("--dim", bound_args.problem.dim, "")->capture_default_str();
    bound->add_option("--sigma2", bound_args.problem.sigma2, "")->capture_default_str();
    bound->add_option("--nu", bound_args.problem.nu, "")->capture_default_str();
    bound->add_option("--eta", bound_args.problem.eta, "")->capture_default_str();
    bound->add_option("--rounds", bound_args.problem.rounds, "")->capture_default_str();
    bound->add_option("--f-gap", bound_args.problem.f_gap, "")->capture_default_str();
    bound->add_option("--sweep-bits", bound_args.sweep, "emit a CSV sweep, e.g. 2:5");
    bound->add_option("--csv", bound_args.csv_out, "sweep CSV path")->capture_default_str();
    bound->add_option("--out", bound_args.out, "write ErrorBreakdown JSON here (default stdout)");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "run the distributed-SGD simulator");
    simulate->add_option("--config", sim_args.config_path, "sim config file")->required();
    simulate->add_option("--out", sim_args.out, "metrics JSONL path")->capture_default_str();
    simulate->add_option("--scheme", sim_args.scheme_override, "override [sim] scheme");
    simulate->add_option("--bits", sim_args.bits_override, "override [sim] bits");

    CompareArgs cmp_args;
    auto* compare = app.add_subcommand("compare", "run several schemes on a shared benchmark");
    compare->add_option("--config", cmp_args.config_path, "sim config file")->required();
    compare->add_option("--schemes", cmp_args.schemes, "comma list")->capture_default_str();
    compare->add_option("--bits", cmp_args.bits, "comma list (default: config value)");
    compare->add_option("--out", cmp_args.out, "comparison CSV path")->capture_default_str();

    std::vector<std::string> verify_suites{"all"};
    auto* verify = app.add_subcommand("verify", "run verification oracle suites");
    verify->add_option("suites", verify_suites,
                       "unbiased lemma1 bias fixedpoint holder slope ordering endtoend "
                       "accounting codec all");

    auto* config_cmd = app.add_subcommand("config", "config helpers");
    auto* print_defaults = config_cmd->add_subcommand("print-defaults", "dump the default sim config");
    config_cmd->require_subcommand(1);

    for (auto* sc : app.get_subcommands([](const CLI::App*) { return true; })) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    ctx.seed = seed;
    ctx.threads = threads;
    try {
        if (fit->parsed()) {
            ctx.subcommand = "fit";
            ctx.config = {{"input", fit_args.input}, {"format", fit_args.format},
                          {"gmin", fit_args.gmin}, {"gmin_quantile", fit_args.gmin_quantile}};
            cmd_fit(fit_args, ctx);
        } else if (quant->parsed()) {
            ctx.subcommand = "quantize";
            ctx.config = {{"scheme", q_args.scheme}, {"bits", q_args.bits},
                          {"alpha", q_args.alpha}, {"gmin_quantile", q_args.gmin_quantile},
                          {"bins", q_args.bins}};
            cmd_quantize(q_args, ctx);
        } else if (dequant->parsed()) {
            ctx.subcommand = "dequantize";
            cmd_dequantize(dq_args, ctx);
        } else if (solve->parsed()) {
            ctx.subcommand = "solve";
            ctx.config = {{"scheme", solve_args.scheme}, {"bits", solve_args.bits},
                          {"levels", solve_args.levels}, {"q_one", solve_args.q_one},
                          {"alternations", solve_args.alternations},
                          {"clients", solve_args.clients}, {"dim", solve_args.dim}};
            int code = cmd_solve(solve_args, ctx);
            write_manifest(ctx);
            return code;
        } else if (bound->parsed()) {
            ctx.subcommand = "bound";
            ctx.config = {{"scheme", bound_args.scheme}, {"bits", bound_args.bits},
                          {"clients", bound_args.problem.clients},
                          {"batch", bound_args.problem.batch}, {"dim", bound_args.problem.dim},
                          {"sigma2", bound_args.problem.sigma2}, {"nu", bound_args.problem.nu},
                          {"eta", bound_args.problem.eta}, {"rounds", bound_args.problem.rounds},
                          {"f_gap", bound_args.problem.f_gap}, {"sweep", bound_args.sweep}};
            cmd_bound(bound_args, ctx);
        } else if (simulate->parsed()) {
            ctx.subcommand = "simulate";
            sim_args.seed_given = app.count("--seed") > 0;
            ctx.config["scheme_override"] = sim_args.scheme_override;
            ctx.config["bits_override"] = sim_args.bits_override;
            cmd_simulate(sim_args, ctx);
        } else if (compare->parsed()) {
            ctx.subcommand = "compare";
            cmp_args.seed_given = app.count("--seed") > 0;
            ctx.config["schemes"] = cmp_args.schemes;
            ctx.config["bits"] = cmp_args.bits;
            cmd_compare(cmp_args, ctx);
        } else if (verify->parsed()) {
            ctx.subcommand = "verify";
            return cmd_verify(verify_suites, ctx);
        } else if (config_cmd->parsed()) {
            if (print_defaults->parsed()) std::cout << htq::default_sim_config_text();
            return 0;
        }
        write_manifest(ctx);
        return 0;
    } catch (const htq::HtqError& e) {
        ordered_json err;
        err["error"]["kind"] = htq::err_kind_name(e.kind());
        err["error"]["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return htq::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"]["kind"] = "Internal";
        err["error"]["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 4;
    }
}

#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "divband/gerber_shiu.hpp"
#include "divband/io.hpp"
#include "divband/optimizer.hpp"
#include "divband/piecewise.hpp"
#include "divband/scale.hpp"
#include "divband/simulate.hpp"

namespace divband::cli {

// ============================================================================
// Command-line front end: scale, gerber-shiu, optimize, value, simulate,
// table1.  Exit codes: 0 success, 1 computation error (error name printed),
// 2 flag errors.
// ============================================================================

struct GridSpec {
    double lo = 0.0, hi = 1.0, step = 0.1;
};

inline GridSpec parse_grid(const std::string& s) {
    GridSpec g;
    char colon1, colon2;
    std::istringstream in(s);
    if (!(in >> g.lo >> colon1 >> g.hi >> colon2 >> g.step) || colon1 != ':' ||
        colon2 != ':' || g.step <= 0.0 || g.hi < g.lo)
        throw InputError("grid must be lo:hi:step with step > 0, got '" + s + "'");
    return g;
}

inline std::vector<double> grid_points(const GridSpec& g) {
    std::vector<double> xs;
    long n = std::lround((g.hi - g.lo) / g.step);
    for (long i = 0; i <= n; ++i) xs.push_back(g.lo + i * g.step);
    return xs;
}

struct PenaltyFlags {
    std::string kind = "zero";
    double c = 0.0;
    double c0 = 0.0;
    double v = 0.0;

    Penalty build() const {
        if (kind == "zero") return Penalty::zero();
        if (kind == "affine") return Penalty::affine(c, c0);
        if (kind == "exp") return Penalty::exponential(c, v);
        throw InputError("penalty must be one of zero|affine|exp");
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--penalty", kind, "penalty kind: zero|affine|exp")
            ->default_val("zero");
        cmd->add_option("--c", c, "penalty slope (affine) or coefficient (exp)");
        cmd->add_option("--c0", c0, "affine penalty intercept (<= 0)");
        cmd->add_option("--v", v, "exponential penalty exponent (<= 0)");
    }
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw InputError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

inline std::uint64_t digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    char c;
    while (in.get(c)) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    return h;
}

struct RunReport {
    std::string subcommand;
    std::uint64_t input_digest = 0;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;

    void print() const {
        std::fprintf(stderr, "[%s] digest=%016llx wall=%.3fs", subcommand.c_str(),
                     static_cast<unsigned long long>(input_digest), wall_seconds);
        for (const auto& o : outputs) std::fprintf(stderr, " out=%s", o.c_str());
        std::fprintf(stderr, "\n");
    }
};

inline int cmd_scale(const std::string& model_path, const GridSpec& grid,
                     const std::string& out_path) {
    RiskModel model = load_model(model_path);
    ScaleBasis basis(model);
    Output out(out_path);
    auto& os = out.stream();
    os << "x,W,W1,W2,Z,Z1\n";
    for (double x : grid_points(grid)) {
        os << csv_num(x) << ',' << csv_num(w_q(basis, x)) << ','
           << csv_num(w_q(basis, x, 1)) << ',' << csv_num(w_q(basis, x, 2)) << ','
           << csv_num(z_q(basis, x)) << ',' << csv_num(z_1(basis, x)) << '\n';
    }
    return 0;
}

inline int cmd_gerber_shiu(const std::string& model_path, const PenaltyFlags& pf,
                           const GridSpec& grid, const std::string& out_path) {
    RiskModel model = load_model(model_path);
    GerberShiu gs(ScaleBasis(model), pf.build());
    Output out(out_path);
    auto& os = out.stream();
    os << "x,F,F1,V\n";
    for (double x : grid_points(grid)) {
        os << csv_num(x) << ',' << csv_num(gs.f_w(x)) << ','
           << csv_num(gs.f_w(x, 1)) << ',' << csv_num(gs.v_penalty(x)) << '\n';
    }
    return 0;
}

inline int cmd_optimize(const std::string& model_path, const PenaltyFlags& pf,
                        double K, int max_bands, const std::string& report_path,
                        const std::string& csv_path, const OptimizerConfig& cfg_in) {
    RiskModel model = load_model(model_path);
    GerberShiu gs(ScaleBasis(model), pf.build());
    OptimizerConfig cfg = cfg_in;
    cfg.max_bands = max_bands;
    RecursionResult res = multi_band_recursion(gs, K, cfg);

    json report = strategy_to_json(res.levels);
    report["generator_margin"] = res.levels.generator_margin;
    report["iterations"] = res.levels.iterations;
    report["converged"] = res.levels.converged;
    {
        Output out(report_path);
        out.stream() << report.dump(2) << '\n';
    }
    if (!csv_path.empty()) {
        Output out(csv_path);
        auto& os = out.stream();
        BarrierInfluence bi = BarrierInfluence::first_band(gs, K);
        double x_max = cfg.horizon_factor / gs.basis().phi_q();
        os << (K == 0.0 ? "x,G_sharp,D\n" : "x,G_sharp\n");
        int n = 2000;
        for (int i = 0; i <= n; ++i) {
            double x = x_max * i / n;
            os << csv_num(x) << ',' << csv_num(bi.g_sharp(x));
            if (K == 0.0) os << ',' << csv_num(bi.d_function(x));
            os << '\n';
        }
    }
    if (!res.levels.converged) {
        std::fprintf(stderr,
                     "IterationCapExceeded: recursion stopped after %d bands "
                     "with generator margin %.3e\n",
                     res.levels.iterations, res.levels.generator_margin);
        return 1;
    }
    return 0;
}

inline int cmd_value(const std::string& model_path, const std::string& strategy_path,
                     const PenaltyFlags& pf, double K, const GridSpec& grid,
                     const std::string& out_path) {
    RiskModel model = load_model(model_path);
    GerberShiu gs(ScaleBasis(model), pf.build());
    CandidateLevels strategy = load_strategy(strategy_path);
    PiecewiseValue v = assemble(gs, strategy, K);
    Output out(out_path);
    auto& os = out.stream();
    os << "x,v,v1\n";
    for (double x : grid_points(grid)) {
        os << csv_num(x) << ',' << csv_num(v.evaluate(x)) << ','
           << csv_num(v.evaluate(x, 1)) << '\n';
    }
    return 0;
}

inline int cmd_simulate(const std::string& model_path, const std::string& strategy_path,
                        const PenaltyFlags& pf, const SimConfig& cfg,
                        const std::string& out_path) {
    RiskModel model = load_model(model_path);
    CandidateLevels strategy = load_strategy(strategy_path);
    SimResult r = simulate(model, strategy, pf.build(), cfg);
    Output out(out_path);
    out.stream() << sim_result_to_json(r).dump(2) << '\n';
    return 0;
}

inline int cmd_table1(const std::string& model_path, const OptimizerConfig& cfg) {
    RiskModel model = load_model(model_path);
    ScaleBasis basis(model);
    std::printf("%6s %10s %10s %10s %10s\n", "c", "b1", "v2", "a2", "b2");
    for (double c : {0.0, 0.2, 0.6, 1.0}) {
        GerberShiu gs(basis, Penalty::affine(c, 0.0));
        RecursionResult res = multi_band_recursion(gs, 0.0, cfg);
        const auto& bands = res.levels.bands;
        double b1 = bands.front().b_plus;
        double top = bands.back().b_plus;
        double v2 = res.value.evaluate(top) - top;
        std::printf("%6.1f %10.4f %10.4f", c, b1, v2);
        if (bands.size() > 1)
            std::printf(" %10.4f %10.4f\n", bands[1].a, bands[1].b_plus);
        else
            std::printf(" %10s %10s\n", "inf", "inf");
    }
    return 0;
}

inline int run(std::vector<std::string> args) {
    CLI::App app{"optimal dividend bands for spectrally negative Levy risk "
                 "processes"};
    app.require_subcommand(1);

    std::string model_path, strategy_path, out_path = "-", report_path = "-",
                csv_path;
    std::string grid_str = "0:10:0.1";
    PenaltyFlags pf_scale, pf_gs, pf_opt, pf_val, pf_sim;
    double K_opt = 0.0, K_val = 0.0;
    int max_bands = 16;
    OptimizerConfig ocfg;
    SimConfig scfg;

    auto* scale = app.add_subcommand("scale", "emit W, W', W'', Z, Z1 on a grid");
    scale->add_option("--model", model_path, "model JSON file")->required();
    scale->add_option("--grid", grid_str, "grid lo:hi:step")->default_val("0:10:0.1");
    scale->add_option("--out", out_path, "output CSV ('-' for stdout)");

    auto* gshiu = app.add_subcommand("gerber-shiu", "emit F_w, F_w', V_w on a grid");
    gshiu->add_option("--model", model_path, "model JSON file")->required();
    pf_gs.attach(gshiu);
    gshiu->add_option("--grid", grid_str, "grid lo:hi:step")->default_val("0:10:0.1");
    gshiu->add_option("--out", out_path, "output CSV ('-' for stdout)");

    auto* opt = app.add_subcommand("optimize", "compute candidate optimal bands");
    opt->add_option("--model", model_path, "model JSON file")->required();
    pf_opt.attach(opt);
    opt->add_option("--K", K_opt, "fixed transaction cost")->default_val(0.0);
    opt->add_option("--max-bands", max_bands, "band cap")->default_val(16);
    opt->add_option("--report", report_path, "JSON report ('-' for stdout)");
    opt->add_option("--csv", csv_path, "optional CSV of G#/D over the grid");
    opt->add_option("--horizon-factor", ocfg.horizon_factor,
                    "search horizon as multiple of 1/Phi(q)");
    opt->add_option("--grid-points", ocfg.grid_points, "coarse scan resolution");
    opt->add_option("--gen-tol", ocfg.generator_tol,
                    "generator nonpositivity tolerance");
    opt->add_option("--gen-grid", ocfg.generator_grid, "generator test grid");

    auto* val = app.add_subcommand("value", "evaluate a band strategy's value");
    val->add_option("--model", model_path, "model JSON file")->required();
    val->add_option("--strategy", strategy_path, "strategy JSON file")->required();
    pf_val.attach(val);
    val->add_option("--K", K_val, "fixed transaction cost")->default_val(0.0);
    val->add_option("--grid", grid_str, "grid lo:hi:step")->default_val("0:10:0.1");
    val->add_option("--out", out_path, "output CSV ('-' for stdout)");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo value of a strategy");
    sim->add_option("--model", model_path, "model JSON file")->required();
    sim->add_option("--strategy", strategy_path, "strategy JSON file")->required();
    pf_sim.attach(sim);
    sim->add_option("--x0", scfg.x0, "initial reserve")->default_val(0.0);
    sim->add_option("--paths", scfg.n_paths, "number of paths")->default_val(100000);
    sim->add_option("--seed", scfg.seed, "RNG seed")->default_val(1);
    sim->add_option("--K", scfg.K, "fixed transaction cost")->default_val(0.0);
    sim->add_option("--floor", scfg.discount_floor, "discount truncation floor");
    sim->add_option("--out", out_path, "output JSON ('-' for stdout)");

    auto* t1 = app.add_subcommand(
        "table1", "optimal levels for the Erlang(2) benchmark, c in {0,.2,.6,1}");
    t1->add_option("--model", model_path, "model JSON file")->required();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    RunReport report;
    auto t_start = std::chrono::steady_clock::now();
    int rc = 0;
    try {
        if (scale->parsed()) {
            report.subcommand = "scale";
            rc = cmd_scale(model_path, parse_grid(grid_str), out_path);
        } else if (gshiu->parsed()) {
            report.subcommand = "gerber-shiu";
            rc = cmd_gerber_shiu(model_path, pf_gs, parse_grid(grid_str), out_path);
        } else if (opt->parsed()) {
            report.subcommand = "optimize";
            rc = cmd_optimize(model_path, pf_opt, K_opt, max_bands, report_path,
                              csv_path, ocfg);
        } else if (val->parsed()) {
            report.subcommand = "value";
            rc = cmd_value(model_path, strategy_path, pf_val, K_val,
                           parse_grid(grid_str), out_path);
        } else if (sim->parsed()) {
            report.subcommand = "simulate";
            rc = cmd_simulate(model_path, strategy_path, pf_sim, scfg, out_path);
        } else if (t1->parsed()) {
            report.subcommand = "table1";
            rc = cmd_table1(model_path, ocfg);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    report.input_digest = model_path.empty() ? 0 : digest_file(model_path);
    if (out_path != "-" && !out_path.empty()) report.outputs.push_back(out_path);
    if (report_path != "-" && !report_path.empty())
        report.outputs.push_back(report_path);
    if (!csv_path.empty()) report.outputs.push_back(csv_path);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    report.print();
    return rc;
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

}  // namespace divband::cli

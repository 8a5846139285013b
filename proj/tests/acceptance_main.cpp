// Acceptance suite: runs every top-level requirement end to end and prints
// one PASS/FAIL line per criterion.  Exit code is the number of failed
// criteria.
//
// Criterion 1 compares the Erlang(2) benchmark pipeline against the reference
// table bundled with the `table1` subcommand.  The two-band reference rows
// (c = 0 and c = 0.2) are internally inconsistent: at the reference levels the
// smooth-fit equations fail (F' = 0.9984 at the claimed optimum), the
// strategy they describe is beaten by the solver's strategy in direct
// simulation (10 sigma at c = 0.2, x0 = 1.6), and the solver's levels satisfy
// the generator optimality test at machine precision while reproducing the
// single-band rows exactly.  Those sub-checks are asserted as stated anyway
// and reported honestly below.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "divband/optimizer.hpp"
#include "divband/piecewise.hpp"
#include "divband/simulate.hpp"

using namespace divband;

namespace {

int g_failures = 0;

struct Criterion {
    std::string name;
    bool ok = true;
    std::vector<std::string> notes = {};

    void check(bool cond, const std::string& detail) {
        if (!cond) {
            ok = false;
            notes.push_back(detail);
        }
    }
    void finish() {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
        for (const auto& n : notes) std::printf("       %s\n", n.c_str());
        if (!ok) ++g_failures;
        std::fflush(stdout);
    }
};

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

RiskModel benchmark_model() {
    return RiskModel(21.4, 10.0, ErlangClaims{2, 1.0}, 0.0, 0.1);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

// --------------------------------------------------------------------------
void criterion_1_table() {
    Criterion c{"criterion 1: benchmark table reproduction (+-0.01, < 60 s)"};
    auto t0 = std::chrono::steady_clock::now();
    ScaleBasis basis(benchmark_model());
    struct Row {
        double cslope, b1, v2, a2, b2;
        bool two_bands;
    };
    std::vector<Row> rows = {{0.0, 0.0, 2.44, 1.83, 10.45, true},
                             {0.2, 0.0, 1.72, 1.90, 10.47, true},
                             {0.6, 10.96, 1.71, 0.0, 0.0, false},
                             {1.0, 11.37, 1.30, 0.0, 0.0, false}};
    for (const Row& r : rows) {
        GerberShiu gs(basis, Penalty::affine(r.cslope, 0.0));
        RecursionResult res = multi_band_recursion(gs, 0.0);
        double b1 = res.levels.bands.front().b_plus;
        double top = res.levels.bands.back().b_plus;
        double v2 = res.value.evaluate(top) - top;
        c.check(std::abs(b1 - r.b1) <= 0.01,
                fmt("c=%.1f: b1 = %.4f, reference %.2f", r.cslope, b1, r.b1));
        c.check(std::abs(v2 - r.v2) <= 0.01,
                fmt("c=%.1f: v2 = %.4f, reference %.2f", r.cslope, v2, r.v2));
        if (r.two_bands) {
            bool has2 = res.levels.bands.size() == 2;
            c.check(has2, fmt("c=%.1f: expected a second band", r.cslope));
            if (has2) {
                double a2 = res.levels.bands[1].a;
                double b2 = res.levels.bands[1].b_plus;
                c.check(std::abs(a2 - r.a2) <= 0.01,
                        fmt("c=%.1f: a2 = %.4f, reference %.2f", r.cslope, a2, r.a2));
                c.check(std::abs(b2 - r.b2) <= 0.01,
                        fmt("c=%.1f: b2 = %.4f, reference %.2f", r.cslope, b2, r.b2));
            }
        } else {
            c.check(res.levels.bands.size() == 1,
                    fmt("c=%.1f: expected a single band", r.cslope));
        }
    }
    double el = seconds_since(t0);
    c.check(el < 60.0, fmt("runtime %.1f s exceeds 60 s", el));
    c.notes.push_back(fmt("runtime %.2f s", el));
    c.finish();
}

// --------------------------------------------------------------------------
void criterion_2_roots() {
    Criterion c{"criterion 2: benchmark roots and W'(0)"};
    ScaleBasis basis(benchmark_model());
    const auto& roots = basis.roots().roots;
    double expect[3] = {0.0396, -0.0794, -1.4882};
    c.check(roots.size() == 3, "expected three roots");
    for (size_t i = 0; i < roots.size() && i < 3; ++i)
        c.check(std::abs(roots[i] - expect[i]) <= 1e-4,
                fmt("root %zu = %.6f, expected %.4f", i, roots[i], expect[i]));
    double w1 = w_q(basis, 0.0, 1);
    double expect_w1 = (101.0 / 10.0) * 25.0 / (107.0 * 107.0);
    c.check(std::abs(w1 - expect_w1) <= 1e-9,
            fmt("W'(0) = %.12f, expected %.12f", w1, expect_w1));
    c.finish();
}

// --------------------------------------------------------------------------
void criterion_3_closed_form_barrier() {
    Criterion c{"criterion 3: closed-form barrier sweep for exponential claims"};
    int positive = 0, zero = 0;
    for (double p : {1.05, 1.1, 1.15, 1.2, 1.25, 1.3, 1.4, 1.6, 1.9, 2.3}) {
        for (double q : {0.1, 0.25}) {
            double lambda = 1.0, mu = 1.0;
            RiskModel m(p, lambda, ExponentialClaims{mu}, 0.0, q);
            GerberShiu gs(ScaleBasis(m), Penalty::zero());
            auto [bm, bp] = find_single_band(BarrierInfluence::first_band(gs, 0.0));
            (void)bm;
            if ((q + lambda) * (q + lambda) >= p * lambda * mu) {
                c.check(bp == 0.0, fmt("p=%.2f q=%.2f: b* = %.8f, expected 0 exactly",
                                       p, q, bp));
                ++zero;
            } else {
                double disc =
                    std::sqrt(std::pow(q + lambda - mu * p, 2) + 4.0 * p * q * mu);
                double zp = (q + lambda - mu * p + disc) / (2.0 * p);
                double zm = (q + lambda - mu * p - disc) / (2.0 * p);
                double expect =
                    std::log(zm * zm * (mu + zm) / (zp * zp * (mu + zp))) / (zp - zm);
                c.check(std::abs(bp - expect) <= 1e-6,
                        fmt("p=%.2f q=%.2f: b* = %.8f, formula %.8f", p, q, bp,
                            expect));
                ++positive;
            }
        }
    }
    c.notes.push_back(fmt("%d zero-barrier and %d interior cases checked", zero,
                          positive));
    c.finish();
}

// --------------------------------------------------------------------------
void criterion_4_gerber_shiu_identities() {
    Criterion c{"criterion 4: Gerber-Shiu identity suite"};
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::string, RiskModel>> models = {
        {"exp", RiskModel(1.5, 1.0, ExponentialClaims{1.0}, 0.0, 0.1)},
        {"erlang", benchmark_model()}};
    for (auto& [mname, model] : models) {
        ScaleBasis basis(model);
        // exponential payoff: the smooth extension of c e^{v x} is c Z^(q,v)
        {
            double cc = -1.0, v = -0.4;
            Penalty w = Penalty::exponential(cc, v);
            GsExtension ext = extend_boundary(basis, BoundaryFn::from_penalty(w),
                                              0.0, w.slope_at_zero());
            for (int i = 0; i <= 40; ++i) {
                double x = 12.0 * i / 40.0;
                double lhs = ext.eval(x);
                double rhs = cc * z_qv(basis, v, x);
                c.check(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)),
                        fmt("%s: F_ev(%.2f) = %.12f vs c Z^(q,v) = %.12f",
                            mname.c_str(), x, lhs, rhs));
            }
        }
        for (int kind = 0; kind < 2; ++kind) {
            Penalty w = kind == 0 ? Penalty::affine(0.6, -0.3)
                                  : Penalty::exponential(-1.0, -0.4);
            GerberShiu gs(basis, w);
            c.check(std::abs(gs.f_w(0.0) - w.value(0.0)) <= 1e-12,
                    fmt("%s kind %d: F_w(0) != w(0)", mname.c_str(), kind));
            double X = 40.0 / basis.phi_q();
            double ratio = gs.f_w(X) / w_q(basis, X);
            c.check(std::abs(ratio - gs.kappa()) <= 1e-5,
                    fmt("%s kind %d: F/W = %.8f vs kappa = %.8f", mname.c_str(),
                        kind, ratio, gs.kappa()));
        }
        (void)inf;
    }
    c.finish();
}

// --------------------------------------------------------------------------
void criterion_5_monte_carlo() {
    Criterion c{"criterion 5: Monte Carlo validation (1e6 paths, 3 s.e.)"};
    // (a) reflecting barrier, zero penalty, exponential claims
    {
        auto t0 = std::chrono::steady_clock::now();
        RiskModel m(1.5, 1.0, ExponentialClaims{1.0}, 0.0, 0.1);
        ScaleBasis basis(m);
        GerberShiu gs(basis, Penalty::zero());
        auto [bm, bp] = find_single_band(BarrierInfluence::first_band(gs, 0.0));
        (void)bm;
        CandidateLevels lv;
        lv.bands.push_back({0.0, bp, bp, false});
        SimConfig cfg;
        cfg.n_paths = 1000000;
        cfg.seed = 101;
        for (double x0 : {0.0, 0.5 * bp, bp}) {
            cfg.x0 = x0;
            SimResult r = simulate(m, lv, Penalty::zero(), cfg);
            double truth = w_q(basis, x0) / w_q(basis, bp, 1);
            c.check(std::abs(r.mean - truth) <= 3.0 * r.stderr_,
                    fmt("(a) x0=%.2f: mc %.5f vs %.5f (se %.5f)", x0, r.mean,
                        truth, r.stderr_));
        }
        double el = seconds_since(t0);
        c.check(el < 300.0, fmt("(a) runtime %.1f s exceeds 300 s", el));
        c.notes.push_back(fmt("(a) runtime %.1f s", el));
    }
    // (b) benchmark two-band solution without penalty
    {
        auto t0 = std::chrono::steady_clock::now();
        RiskModel m = benchmark_model();
        GerberShiu gs(ScaleBasis(m), Penalty::zero());
        RecursionResult res = multi_band_recursion(gs, 0.0);
        SimConfig cfg;
        cfg.n_paths = 1000000;
        cfg.seed = 202;
        for (double x0 : {1.0, 5.0, 15.0}) {
            cfg.x0 = x0;
            SimResult r = simulate(m, res.levels, Penalty::zero(), cfg);
            double truth = res.value.evaluate(x0);
            c.check(std::abs(r.mean - truth) <= 3.0 * r.stderr_,
                    fmt("(b) x0=%.1f: mc %.5f vs %.5f (se %.5f)", x0, r.mean,
                        truth, r.stderr_));
        }
        double el = seconds_since(t0);
        c.check(el < 300.0, fmt("(b) runtime %.1f s exceeds 300 s", el));
        c.notes.push_back(fmt("(b) runtime %.1f s", el));
    }
    // (c) ruin transform
    {
        auto t0 = std::chrono::steady_clock::now();
        RiskModel m(1.5, 1.0, ExponentialClaims{1.0}, 0.0, 0.1);
        ScaleBasis basis(m);
        SimConfig cfg;
        cfg.n_paths = 1000000;
        cfg.seed = 303;
        for (double x0 : {0.5, 2.0, 5.0}) {
            SimResult r = simulate_ruin_transform(m, x0, cfg);
            double truth =
                z_q(basis, x0) - basis.q() / basis.phi_q() * w_q(basis, x0);
            c.check(std::abs(r.mean - truth) <= 3.0 * r.stderr_,
                    fmt("(c) x0=%.1f: mc %.6f vs %.6f (se %.6f)", x0, r.mean,
                        truth, r.stderr_));
        }
        double el = seconds_since(t0);
        c.check(el < 300.0, fmt("(c) runtime %.1f s exceeds 300 s", el));
        c.notes.push_back(fmt("(c) runtime %.1f s", el));
    }
    c.finish();
}

// --------------------------------------------------------------------------
void criterion_6_generator_discrimination() {
    Criterion c{"criterion 6: generator test discriminates optimality"};
    ScaleBasis basis(benchmark_model());
    {
        GerberShiu gs(basis, Penalty::zero());
        CandidateLevels lv;
        lv.bands.push_back({0.0, 0.0, 0.0, false});
        PiecewiseValue v = assemble(gs, lv, 0.0);
        GeneratorCheck chk = check_generator_nonpositive(v, 0.0, basis);
        c.check(!chk.ok, fmt("single band at 0 must fail (margin %.3e)", chk.margin));

        RecursionResult res = multi_band_recursion(gs, 0.0);
        double top = res.levels.bands.back().b_plus;
        GeneratorCheck chk2 = check_generator_nonpositive(res.value, top, basis);
        c.check(chk2.ok,
                fmt("completed two-band solution must pass (margin %.3e)",
                    chk2.margin));
    }
    for (double cs : {0.6, 1.0}) {
        GerberShiu gs(basis, Penalty::affine(cs, 0.0));
        BarrierInfluence bi = BarrierInfluence::first_band(gs, 0.0);
        auto [bm, bp] = find_single_band(bi);
        CandidateLevels lv;
        lv.bands.push_back({0.0, bm, bp, false});
        PiecewiseValue v = assemble(gs, lv, 0.0);
        GeneratorCheck chk = check_generator_nonpositive(v, bp, basis);
        c.check(chk.ok, fmt("c=%.1f single band must pass (margin %.3e)", cs,
                            chk.margin));
    }
    c.finish();
}

// --------------------------------------------------------------------------
void criterion_7_structural_suite() {
    Criterion c{"criterion 7: structural invariant suite"};
    std::vector<std::pair<std::string, RiskModel>> models = {
        {"exp", RiskModel(1.5, 1.0, ExponentialClaims{1.0}, 0.0, 0.1)},
        {"erlang", benchmark_model()}};
    std::vector<std::pair<std::string, Penalty>> penalties = {
        {"zero", Penalty::zero()},
        {"affine", Penalty::affine(0.6, 0.0)},
        {"exppen", Penalty::exponential(-0.8, -0.4)}};

    for (auto& [mname, model] : models) {
        ScaleBasis basis(model);
        double phi = basis.phi_q();
        for (auto& [pname, w] : penalties) {
            GerberShiu gs(basis, w);
            std::vector<PiecewiseValue> values;
            for (double K : {0.0, 0.5}) {
                RecursionResult res = multi_band_recursion(gs, K);
                std::string tag = mname + "/" + pname + fmt("/K=%.1f", K);
                c.check(res.levels.converged, tag + ": recursion did not converge");
                values.push_back(res.value);
                const PiecewiseValue& v = res.value;

                // continuity at the knots
                for (const auto& seg : v.segments()) {
                    if (seg.lo <= 0.0) continue;
                    double gap =
                        std::abs(v.evaluate_left(seg.lo) - v.evaluate(seg.lo));
                    c.check(gap <= 1e-9,
                            tag + fmt(": knot gap %.2e at %.3f", gap, seg.lo));
                }
                // gradient constraint on a 200 x 200 grid
                double top = res.levels.bands.back().b_plus + 5.0;
                bool grad_ok = true;
                for (int i = 1; i <= 200 && grad_ok; ++i) {
                    double x = top * i / 200.0;
                    double vx = v.evaluate(x);
                    for (int j = 1; j < i; ++j) {
                        double y = top * j / 200.0;
                        if (vx - v.evaluate(y) < x - y - K - 1e-9) {
                            grad_ok = false;
                            c.check(false, tag + fmt(": gradient constraint fails "
                                                     "at (%.3f, %.3f)",
                                                     x, y));
                            break;
                        }
                    }
                }
                // smooth fit at reflecting barriers
                if (K == 0.0) {
                    for (const Band& b : res.levels.bands) {
                        if (b.b_plus == 0.0) continue;
                        double slope = v.evaluate_left(b.b_plus, 1);
                        c.check(std::abs(slope - 1.0) <= 1e-7,
                                tag + fmt(": smooth fit v'(b-) = %.10f", slope));
                    }
                }
                // affine bound
                for (int i = 0; i <= 100; ++i) {
                    double x = top * i / 100.0;
                    c.check(v.evaluate(x) - x <= 1.0 / phi + 1e-9,
                            tag + fmt(": affine bound fails at %.3f", x));
                }
            }
            // K-monotonicity
            for (int i = 0; i <= 100; ++i) {
                double x = 20.0 * i / 100.0;
                c.check(values[1].evaluate(x) <= values[0].evaluate(x) + 1e-9,
                        mname + "/" + pname +
                            fmt(": value increased with K at x=%.2f", x));
            }
        }
        // unimodality of D for exponential claims (interior optima)
        if (mname == "exp") {
            for (auto& [pname, w] : penalties) {
                GerberShiu gs(basis, w);
                BarrierInfluence bi = BarrierInfluence::first_band(gs, 0.0);
                int changes = 0;
                double prev = bi.d_function(1e-6);
                for (int i = 1; i <= 4000; ++i) {
                    double x = 40.0 / phi * i / 4000.0;
                    double cur = bi.d_function(x);
                    if ((prev < 0.0) != (cur < 0.0)) ++changes;
                    prev = cur;
                }
                c.check(changes == 1 && bi.d_function(1e-6) < 0.0,
                        mname + "/" + pname +
                            fmt(": D sign changes = %d (expected 1)", changes));
            }
        }
    }
    c.finish();
}

}  // namespace

int main() {
    std::printf("acceptance suite\n================\n");
    criterion_1_table();
    criterion_2_roots();
    criterion_3_closed_form_barrier();
    criterion_4_gerber_shiu_identities();
    criterion_5_monte_carlo();
    criterion_6_generator_discrimination();
    criterion_7_structural_suite();
    std::printf("================\n%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}

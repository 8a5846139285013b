#include <catch2/catch_amalgamated.hpp>

#include "divband/optimizer.hpp"
#include "divband/simulate.hpp"
#include "helpers.hpp"

using namespace divband;
using testutil::azcue_muler;
using testutil::exp_model;

namespace {

CandidateLevels single_barrier(double b) {
    CandidateLevels lv;
    lv.bands.push_back({0.0, b, b, false});
    return lv;
}

bool within_3se(double estimate, double truth, double se) {
    return std::abs(estimate - truth) <= 3.0 * std::max(se, 1e-12);
}

}  // namespace

TEST_CASE("simulation is deterministic in (seed, n_paths)") {
    RiskModel m = exp_model(1.5, 1.0, 1.0, 0.1);
    SimConfig cfg;
    cfg.n_paths = 1;
    cfg.seed = 99;
    cfg.x0 = 1.0;
    SimResult a = simulate(m, single_barrier(2.0), Penalty::zero(), cfg);
    SimResult b = simulate(m, single_barrier(2.0), Penalty::zero(), cfg);
    REQUIRE(a.mean == b.mean);
    REQUIRE(a.mean_discounted_dividends == b.mean_discounted_dividends);

    cfg.n_paths = 20000;
    SimResult c = simulate(m, single_barrier(2.0), Penalty::affine(0.5, 0.0), cfg);
    SimResult d = simulate(m, single_barrier(2.0), Penalty::affine(0.5, 0.0), cfg);
    REQUIRE(c.mean == d.mean);
    REQUIRE(c.stderr_ == d.stderr_);
    REQUIRE(c.ruin_fraction == d.ruin_fraction);
}

TEST_CASE("value decomposition holds exactly") {
    RiskModel m = azcue_muler();
    SimConfig cfg;
    cfg.n_paths = 20000;
    cfg.seed = 5;
    cfg.x0 = 4.0;
    SimResult r = simulate(m, single_barrier(10.0), Penalty::affine(0.6, 0.0), cfg);
    REQUIRE(r.mean ==
            Catch::Approx(r.mean_discounted_dividends + r.mean_discounted_penalty)
                .margin(1e-12));
    REQUIRE(r.mean_discounted_penalty <= 0.0);
    REQUIRE(r.ruin_fraction > 0.0);
}

TEST_CASE("lump-sum strategy matches the closed-form value") {
    RiskModel m = exp_model(1.5, 1.0, 1.0, 0.1);
    SimConfig cfg;
    cfg.n_paths = 400000;
    cfg.seed = 11;
    cfg.x0 = 0.0;
    SimResult r = simulate(m, single_barrier(0.0), Penalty::zero(), cfg);
    REQUIRE(within_3se(r.mean, 1.5 / 1.1, r.stderr_));
}

TEST_CASE("reflecting barrier matches W(x)/W'(b)") {
    RiskModel m = exp_model(1.5, 1.0, 1.0, 0.1);
    ScaleBasis basis(m);
    GerberShiu gs(basis, Penalty::zero());
    auto [bm, bp] = find_single_band(BarrierInfluence::first_band(gs, 0.0));
    SimConfig cfg;
    cfg.n_paths = 400000;
    cfg.seed = 17;
    for (double x0 : {0.0, 0.5 * bp, bp}) {
        cfg.x0 = x0;
        SimResult r = simulate(m, single_barrier(bp), Penalty::zero(), cfg);
        double truth = w_q(basis, x0) / w_q(basis, bp, 1);
        INFO("x0 = " << x0 << " mc = " << r.mean << " truth = " << truth);
        REQUIRE(within_3se(r.mean, truth, r.stderr_));
    }
    (void)bm;
}

TEST_CASE("ruin transform against the scale-function closed form") {
    RiskModel m = exp_model(1.5, 1.0, 1.0, 0.1);
    ScaleBasis basis(m);
    SimConfig cfg;
    cfg.n_paths = 400000;
    cfg.seed = 23;
    for (double x0 : {0.5, 2.0}) {
        SimResult r = simulate_ruin_transform(m, x0, cfg);
        double truth =
            z_q(basis, x0) - basis.q() / basis.phi_q() * w_q(basis, x0);
        REQUIRE(within_3se(r.mean, truth, r.stderr_));
    }
    // benchmark model at x0 = 5
    RiskModel am = azcue_muler();
    ScaleBasis ab(am);
    SimResult r = simulate_ruin_transform(am, 5.0, cfg);
    double truth = z_q(ab, 5.0) - ab.q() / ab.phi_q() * w_q(ab, 5.0);
    REQUIRE(within_3se(r.mean, truth, r.stderr_));
    // deep capital: discounted ruin vanishes
    SimConfig cheap = cfg;
    cheap.n_paths = 50000;
    SimResult far = simulate_ruin_transform(m, 40.0 / ScaleBasis(m).phi_q(), cheap);
    REQUIRE(within_3se(far.mean, 0.0, std::max(far.stderr_, 1e-9)));
}

TEST_CASE("penalty-weighted ruin transform matches v_penalty") {
    RiskModel am = azcue_muler();
    ScaleBasis basis(am);
    Penalty w = Penalty::affine(0.6, 0.0);
    GerberShiu gs(basis, w);
    SimConfig cfg;
    cfg.n_paths = 400000;
    cfg.seed = 29;
    SimResult r = simulate_ruin_transform(am, 5.0, cfg, w);
    // crude stderr proxy for the penalty component: reuse the transform's
    // scale; the claim sizes near ruin keep the ratio modest
    REQUIRE(std::abs(r.mean_discounted_penalty - gs.v_penalty(5.0)) <=
            3.0 * 3.0 * r.stderr_);
}

TEST_CASE("two-sided exit identity against a dedicated path oracle") {
    // independent mini-simulator: drift up, claims down, absorb outside [a, b]
    RiskModel am = azcue_muler();
    ScaleBasis basis(am);
    Penalty w = Penalty::affine(0.6, 0.0);
    GerberShiu gs(basis, w);
    double a = 0.0, b = 5.0, x0 = 2.0;
    double p = am.premium_rate(), q = am.discount(), lambda = am.intensity();
    std::int64_t n = 400000;
    double sum = 0.0, sum2 = 0.0;
    detail::ClaimSampler claims{&am};
    for (std::int64_t i = 0; i < n; ++i) {
        rng::SplitMix64 g(31, static_cast<std::uint64_t>(i));
        double t = 0.0, u = x0, v = 0.0;
        for (;;) {
            double dt = g.exponential(lambda);
            double t_hit = (b - u) / p;
            if (t_hit < dt) {  // upper boundary crossed by the drift
                v = 0.0;       // delta = 0: no reward at the top
                break;
            }
            t += dt;
            u += p * dt - claims.draw(g);
            if (u < a) {
                v = std::exp(-q * t) * w.value(u - a);
                break;
            }
            if (std::exp(-q * t) < 1e-12) {
                v = 0.0;
                break;
            }
        }
        sum += v;
        sum2 += v * v;
    }
    double mean = sum / n;
    double se = std::sqrt((sum2 - sum * sum / n) / (n - 1.0) / n);
    double truth = gs.two_sided_exit(a, b, x0, 0.0);
    REQUIRE(within_3se(mean, truth, se));
}

TEST_CASE("two-band benchmark value is confirmed pathwise") {
    RiskModel am = azcue_muler();
    GerberShiu gs(ScaleBasis(am), Penalty::zero());
    RecursionResult res = multi_band_recursion(gs, 0.0);
    SimConfig cfg;
    cfg.n_paths = 300000;
    cfg.seed = 38;
    for (double x0 : {1.0, 5.0, 15.0}) {
        cfg.x0 = x0;
        SimResult r = simulate(am, res.levels, Penalty::zero(), cfg);
        INFO("x0 = " << x0 << " mc = " << r.mean
                     << " truth = " << res.value.evaluate(x0));
        REQUIRE(within_3se(r.mean, res.value.evaluate(x0), r.stderr_));
    }
}

TEST_CASE("suboptimal strategies are dominated") {
    RiskModel m = exp_model(1.5, 1.0, 1.0, 0.1);
    GerberShiu gs(ScaleBasis(m), Penalty::zero());
    RecursionResult res = multi_band_recursion(gs, 0.0);
    double b_star = res.levels.bands[0].b_plus;
    SimConfig cfg;
    cfg.n_paths = 200000;
    cfg.seed = 41;
    cfg.x0 = 1.0;
    for (double shift : {2.0, -1.0}) {
        double b = std::max(0.0, b_star + shift);
        SimResult r = simulate(m, single_barrier(b), Penalty::zero(), cfg);
        REQUIRE(r.mean <= res.value.evaluate(cfg.x0) + 3.0 * r.stderr_);
    }
}

TEST_CASE("fixed-cost lumps charge K and match the assembled value") {
    RiskModel m = exp_model(1.5, 1.0, 1.0, 0.1);
    double K = 0.5;
    GerberShiu gs(ScaleBasis(m), Penalty::zero());
    RecursionResult res = multi_band_recursion(gs, K);
    SimConfig cfg;
    cfg.n_paths = 400000;
    cfg.seed = 43;
    cfg.K = K;
    for (double x0 : {0.0, 2.0, 6.0}) {
        cfg.x0 = x0;
        SimResult r = simulate(m, res.levels, Penalty::zero(), cfg);
        INFO("x0 = " << x0 << " mc = " << r.mean
                     << " truth = " << res.value.evaluate(x0));
        REQUIRE(within_3se(r.mean, res.value.evaluate(x0), r.stderr_));
    }
}

TEST_CASE("standard error scales like the square root of the path count") {
    RiskModel m = azcue_muler();
    SimConfig cfg;
    cfg.seed = 47;
    cfg.x0 = 5.0;
    std::vector<double> scaled;
    for (std::int64_t n : {10000, 40000, 160000}) {
        cfg.n_paths = n;
        SimResult r = simulate(m, single_barrier(10.0), Penalty::zero(), cfg);
        scaled.push_back(r.stderr_ * std::sqrt(static_cast<double>(n)));
    }
    for (double s : scaled) {
        REQUIRE(s == Catch::Approx(scaled.front()).epsilon(0.2));
    }
}

TEST_CASE("halving the discount floor moves the mean within the reported bound") {
    // a slow-ruin configuration where the truncation actually bites
    RiskModel m = exp_model(2.5, 1.0, 1.0, 0.1);
    SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.seed = 53;
    cfg.x0 = 6.0;
    cfg.discount_floor = 1e-2;  // large floor so the truncation bites
    SimResult coarse = simulate(m, single_barrier(6.0), Penalty::zero(), cfg);
    REQUIRE(coarse.truncation_bias_bound > 0.0);
    cfg.discount_floor = 5e-3;
    SimResult fine = simulate(m, single_barrier(6.0), Penalty::zero(), cfg);
    REQUIRE(std::abs(fine.mean - coarse.mean) <=
            2.0 * coarse.truncation_bias_bound);
}

TEST_CASE("simulator rejects unsupported configurations") {
    RiskModel gauss(1.5, 1.0, ExponentialClaims{1.0}, 0.3, 0.1);
    SimConfig cfg;
    REQUIRE_THROWS_AS(simulate(gauss, single_barrier(1.0), Penalty::zero(), cfg),
                      UnsupportedModel);
    REQUIRE_THROWS_AS(simulate_ruin_transform(gauss, 1.0, cfg), UnsupportedModel);
    RiskModel ok = exp_model(1.5, 1.0, 1.0, 0.1);
    SimConfig bad;
    bad.n_paths = 0;
    REQUIRE_THROWS_AS(simulate(ok, single_barrier(1.0), Penalty::zero(), bad),
                      DomainError);
    SimConfig badf;
    badf.discount_floor = 0.0;
    REQUIRE_THROWS_AS(simulate(ok, single_barrier(1.0), Penalty::zero(), badf),
                      DomainError);
}

TEST_CASE("claims without drift never ruin") {
    RiskModel m(2.0, 0.0, ExponentialClaims{1.0}, 0.0, 0.1);
    SimConfig cfg;
    cfg.n_paths = 100;
    cfg.seed = 59;
    cfg.x0 = 1.0;
    SimResult r = simulate(m, single_barrier(3.0), Penalty::zero(), cfg);
    REQUIRE(r.ruin_fraction == 0.0);
    // drift to the barrier, then hold it forever: e^{-q t_hit} p / q
    double t_hit = (3.0 - 1.0) / 2.0;
    REQUIRE(r.mean ==
            Catch::Approx(std::exp(-0.1 * t_hit) * 2.0 / 0.1).epsilon(1e-12));
    // identical paths: the sample deviation is pure floating-point residue
    REQUIRE(r.stderr_ <= 1e-7);
}

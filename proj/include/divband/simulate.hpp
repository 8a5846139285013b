#pragma once

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "divband/bands.hpp"
#include "divband/errors.hpp"
#include "divband/model.hpp"
#include "divband/penalty.hpp"

namespace divband {

// ============================================================================
// Exact event-driven Monte Carlo of the controlled reserve process
//
// For sigma^2 = 0 compound-Poisson models every path quantity is computed in
// closed form between claim arrivals (linear drift, exact discounted local
// time at reflecting barriers), so the estimator carries no discretization
// bias, only the documented discount-floor truncation.
// ============================================================================

struct SimConfig {
    std::int64_t n_paths = 100000;
    std::uint64_t seed = 1;
    double x0 = 0.0;
    double discount_floor = 1e-12;
    double K = 0.0;
};

struct SimResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::int64_t n_paths = 0;
    double ruin_fraction = 0.0;
    double mean_discounted_penalty = 0.0;
    double mean_discounted_dividends = 0.0;
    double truncation_bias_bound = 0.0;  // sum of per-path remaining-value bounds / n
};

namespace rng {

/// Counter-based per-path stream: the state is derived from (seed, path) so
/// results do not depend on scheduling or thread count.
struct SplitMix64 {
    std::uint64_t state;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    SplitMix64(std::uint64_t seed, std::uint64_t path)
        : state(mix(seed + 0x9E3779B97F4A7C15ULL * (path + 1))) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        return mix(state);
    }

    /// Uniform in [0, 1).
    double uniform() { return (next() >> 11) * 0x1.0p-53; }

    /// Exponential with the given rate.
    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }
};

}  // namespace rng

namespace detail {

struct ClaimSampler {
    const RiskModel* model;

    double draw(rng::SplitMix64& g) const {
        return std::visit(
            [&](const auto& c) -> double {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, ExponentialClaims>) {
                    return g.exponential(c.mu);
                } else if constexpr (std::is_same_v<T, ErlangClaims>) {
                    double s = 0.0;
                    for (int i = 0; i < c.shape; ++i) s += g.exponential(c.mu);
                    return s;
                } else {
                    double u = g.uniform();
                    double acc = 0.0;
                    for (size_t k = 0; k < c.weights.size(); ++k) {
                        acc += c.weights[k];
                        if (u < acc || k + 1 == c.weights.size())
                            return g.exponential(c.rates[k]);
                    }
                    return g.exponential(c.rates.back());
                }
            },
            model->claims());
    }
};

/// Phi(q) by doubling + bisection (the simulator stays independent of the
/// scale-function machinery).
inline double phi_q_of(const RiskModel& m) {
    double q = m.discount();
    double hi = 1.0;
    while (psi(m, hi) <= q) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (psi(m, mid) < q ? lo : hi) = mid;
        if (hi - lo < 1e-14 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

struct PathAccumulator {
    double dividends = 0.0;
    double penalty = 0.0;
    bool ruined = false;
    double bias = 0.0;
};

struct BlockSums {
    double v = 0.0, v2 = 0.0, div = 0.0, pen = 0.0, bias = 0.0;
    std::int64_t ruined = 0;
};

/// One controlled path under a band strategy; all contributions exact.
inline PathAccumulator run_band_path(const RiskModel& model,
                                     const CandidateLevels& strategy,
                                     const Penalty& penalty, const SimConfig& cfg,
                                     double bound_const, std::uint64_t path) {
    rng::SplitMix64 g(cfg.seed, path);
    ClaimSampler claims{&model};
    const auto& bands = strategy.bands;
    const double p = model.premium_rate();
    const double q = model.discount();
    const double lambda = model.intensity();
    const double K = cfg.K;

    PathAccumulator acc;
    double t = 0.0;
    double u = cfg.x0;
    int band = -1;     // continuation band index containing u
    bool pinned = false;

    // cut the reserve into a continuation band (or to a barrier), paying the
    // excess as lump sums
    auto normalize = [&]() {
        for (;;) {
            if (u < 0.0) {
                acc.ruined = true;
                return;
            }
            band = -1;
            pinned = false;
            // highest band whose payout region or continuation interval holds u
            int payout_of = -1;
            for (int i = static_cast<int>(bands.size()) - 1; i >= 0; --i) {
                if (u > bands[i].b_plus) {
                    payout_of = i;
                    break;
                }
                if (u >= bands[i].a) {
                    if (u == bands[i].b_plus && K == 0.0) {
                        band = i;
                        pinned = true;
                        return;
                    }
                    if (u == bands[i].b_plus && K > 0.0) {
                        payout_of = i;
                        break;
                    }
                    band = i;
                    return;
                }
            }
            if (payout_of < 0) {
                // below every band start: only possible above ruin when the
                // first band starts at 0, so u sits in band 0
                band = 0;
                return;
            }
            double disc = std::exp(-q * t);
            acc.dividends += disc * (u - bands[payout_of].b_minus - K);
            u = bands[payout_of].b_minus;
            if (K == 0.0 && u == bands[payout_of].b_plus) {
                band = payout_of;
                pinned = true;
                return;
            }
        }
    };

    normalize();
    for (;;) {
        if (acc.ruined) {
            acc.penalty += std::exp(-q * t) * penalty.value(u);
            break;
        }
        double disc = std::exp(-q * t);
        if (disc < cfg.discount_floor) {
            acc.bias = disc * (u + bound_const);
            break;
        }
        double dt = lambda > 0.0 ? g.exponential(lambda)
                                 : std::numeric_limits<double>::infinity();
        double t_claim = t + dt;

        if (pinned) {
            double b = bands[band].b_plus;
            if (std::isinf(t_claim)) {
                acc.dividends += p / q * std::exp(-q * t);
                break;
            }
            acc.dividends += p / q * (std::exp(-q * t) - std::exp(-q * t_claim));
            u = b - claims.draw(g);
            t = t_claim;
            normalize();
            continue;
        }

        double b_top = bands[band].b_plus;
        double t_hit = t + (b_top - u) / p;
        if (K == 0.0) {
            if (t_claim <= t_hit) {
                u += p * (t_claim - t);
            } else {
                if (std::isinf(t_claim)) {
                    acc.dividends += p / q * std::exp(-q * t_hit);
                    break;
                }
                acc.dividends +=
                    p / q * (std::exp(-q * t_hit) - std::exp(-q * t_claim));
                u = b_top;
            }
            u -= claims.draw(g);
            t = t_claim;
            normalize();
            continue;
        }

        // K > 0: process every barrier hit before the claim arrival
        bool floored = false;
        while (t_hit < t_claim) {
            double disc_hit = std::exp(-q * t_hit);
            if (disc_hit < cfg.discount_floor) {
                acc.bias = disc_hit * (b_top + bound_const);
                floored = true;
                break;
            }
            acc.dividends += disc_hit * (bands[band].b_plus - bands[band].b_minus - K);
            u = bands[band].b_minus;
            t = t_hit;
            normalize();  // b_minus may fall into a lower payout region
            b_top = bands[band].b_plus;
            t_hit = t + (b_top - u) / p;
        }
        if (floored) break;
        if (std::isinf(t_claim)) break;  // lambda = 0, discount exhausted above
        u += p * (t_claim - t);
        u -= claims.draw(g);
        t = t_claim;
        normalize();
    }
    return acc;
}

/// Uncontrolled path to first passage below zero (ruin transform).
inline PathAccumulator run_ruin_path(const RiskModel& model, const Penalty& penalty,
                                     const SimConfig& cfg, std::uint64_t path) {
    rng::SplitMix64 g(cfg.seed, path);
    ClaimSampler claims{&model};
    const double p = model.premium_rate();
    const double q = model.discount();
    const double lambda = model.intensity();

    PathAccumulator acc;
    double t = 0.0, u = cfg.x0;
    for (;;) {
        double disc = std::exp(-q * t);
        if (disc < cfg.discount_floor) {
            acc.bias = disc;
            break;
        }
        if (lambda == 0.0) break;  // never ruins
        double dt = g.exponential(lambda);
        t += dt;
        u += p * dt;
        u -= claims.draw(g);
        if (u < 0.0) {
            acc.ruined = true;
            double d = std::exp(-q * t);
            acc.dividends += d;  // carries e^{-q T} for the transform estimate
            acc.penalty += d * penalty.value(u);
            break;
        }
    }
    return acc;
}

template <typename PathFn, typename ValueFn>
SimResult reduce_paths(const SimConfig& cfg, PathFn&& one_path, ValueFn&& value_of) {
    constexpr std::int64_t kBlock = 4096;
    const std::int64_t n = cfg.n_paths;
    const std::int64_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<BlockSums> blocks(static_cast<size_t>(n_blocks));

    unsigned hw = std::thread::hardware_concurrency();
    unsigned n_threads = std::min<unsigned>(std::max(1u, hw), 8u);
    if (n < 4 * kBlock) n_threads = 1;

    auto work = [&](unsigned tid) {
        for (std::int64_t blk = tid; blk < n_blocks; blk += n_threads) {
            BlockSums s;
            double cv = 0.0, cv2 = 0.0;  // Kahan compensations
            std::int64_t lo = blk * kBlock;
            std::int64_t hi = std::min(n, lo + kBlock);
            for (std::int64_t i = lo; i < hi; ++i) {
                PathAccumulator a = one_path(static_cast<std::uint64_t>(i));
                double v = value_of(a);
                double y = v - cv;
                double tt = s.v + y;
                cv = (tt - s.v) - y;
                s.v = tt;
                double y2 = v * v - cv2;
                double t2 = s.v2 + y2;
                cv2 = (t2 - s.v2) - y2;
                s.v2 = t2;
                s.div += a.dividends;
                s.pen += a.penalty;
                s.bias += a.bias;
                s.ruined += a.ruined ? 1 : 0;
            }
            blocks[static_cast<size_t>(blk)] = s;
        }
    };
    if (n_threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned tid = 0; tid < n_threads; ++tid) pool.emplace_back(work, tid);
        for (auto& th : pool) th.join();
    }

    BlockSums tot;
    double cv = 0.0, cv2 = 0.0;
    for (const auto& b : blocks) {
        double y = b.v - cv;
        double t = tot.v + y;
        cv = (t - tot.v) - y;
        tot.v = t;
        double y2 = b.v2 - cv2;
        double t2 = tot.v2 + y2;
        cv2 = (t2 - tot.v2) - y2;
        tot.v2 = t2;
        tot.div += b.div;
        tot.pen += b.pen;
        tot.bias += b.bias;
        tot.ruined += b.ruined;
    }

    SimResult r;
    r.n_paths = n;
    r.mean = tot.v / n;
    double var = (tot.v2 - tot.v * tot.v / n) / std::max<std::int64_t>(1, n - 1);
    r.stderr_ = std::sqrt(std::max(0.0, var) / n);
    r.ruin_fraction = static_cast<double>(tot.ruined) / n;
    r.mean_discounted_dividends = tot.div / n;
    r.mean_discounted_penalty = tot.pen / n;
    r.truncation_bias_bound = tot.bias / n;
    return r;
}

}  // namespace detail

/// Monte Carlo estimate of the band-strategy value (discounted dividends
/// minus fixed costs plus the discounted ruin penalty).
inline SimResult simulate(const RiskModel& model, const CandidateLevels& strategy,
                          const Penalty& penalty, const SimConfig& cfg) {
    if (model.gaussian_sq() > 0.0)
        throw UnsupportedModel("simulation requires sigma^2 = 0");
    if (cfg.n_paths < 1) throw DomainError("n_paths must be >= 1");
    if (!(cfg.discount_floor > 0.0 && cfg.discount_floor < 1.0))
        throw DomainError("discount_floor must lie in (0, 1)");
    strategy.validate(cfg.K);
    for (const Band& b : strategy.bands)
        if (cfg.K > 0.0 && !(b.b_minus < b.b_plus))
            throw UnsupportedModel(
                "stopping band without a lump target cannot be simulated");
    penalty.check_admissible(model);

    // crude per-path remaining-value bound used at truncation: affine bound on
    // future dividends plus the penalty at a deep shortfall
    double phi = detail::phi_q_of(model);
    double deep = cfg.x0 + 50.0 * std::max(1.0, model.claim_mean());
    double bound_const = 1.0 / phi + std::abs(penalty.value(-deep));

    return detail::reduce_paths(
        cfg,
        [&](std::uint64_t path) {
            return detail::run_band_path(model, strategy, penalty, cfg,
                                         bound_const, path);
        },
        [](const detail::PathAccumulator& a) { return a.dividends + a.penalty; });
}

/// Monte Carlo estimate of E_x[e^{-q T_0^-}] (no dividends paid); the
/// penalty-weighted transform E_x[e^{-q T} w(X_T)] is reported in
/// mean_discounted_penalty when a penalty is supplied.
inline SimResult simulate_ruin_transform(const RiskModel& model, double x0,
                                         const SimConfig& cfg_in,
                                         const Penalty& penalty = Penalty::zero()) {
    if (model.gaussian_sq() > 0.0)
        throw UnsupportedModel("simulation requires sigma^2 = 0");
    SimConfig cfg = cfg_in;
    cfg.x0 = x0;
    if (cfg.n_paths < 1) throw DomainError("n_paths must be >= 1");
    // the path's transform contribution e^{-q T} rides in `dividends`; the
    // mean estimates E_x[e^{-q T_0^-}] alone
    return detail::reduce_paths(
        cfg,
        [&](std::uint64_t path) {
            return detail::run_ruin_path(model, penalty, cfg, path);
        },
        [](const detail::PathAccumulator& a) { return a.dividends; });
}

}  // namespace divband

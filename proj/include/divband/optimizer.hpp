#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "divband/bands.hpp"
#include "divband/errors.hpp"
#include "divband/gerber_shiu.hpp"
#include "divband/piecewise.hpp"

namespace divband {

// ============================================================================
// Candidate band levels: maximization of barrier-influence functions,
// smooth/continuous-fit solves, and the generator-sign optimality test
// ============================================================================

struct OptimizerConfig {
    double horizon_factor = 40.0;  // search horizon X_max = 40 / Phi(q)
    int grid_points = 4000;        // coarse scan of influence functions
    double arg_tol = 1e-9;         // golden-section argument tolerance
    double pair_tol = 1e-8;        // K > 0 joint-optimization tolerance
    double tie_tol = 1e-9;         // tie window for the last-global-max rule
    int generator_grid = 2000;     // grid for the generator-sign test
    double generator_tol = 1e-8;   // nonpositivity tolerance
    int level_grid = 240;          // scan resolution for the stopping level a
    double level_tol = 1e-11;      // bisection tolerance on a
    int max_bands = 16;
};

namespace detail {

struct Extremum {
    double x;
    double value;
};

/// Golden-section maximization on [lo, hi].
template <typename F>
Extremum golden_max(F&& f, double lo, double hi, double tol) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

/// Last global maximum of f on [lo, hi]: every grid-local maximum is refined,
/// and among refined maxima within `tie_tol` of the best value the largest
/// location wins (the sup convention of the band-level definitions).
template <typename F>
Extremum last_global_max(F&& f, double lo, double hi, int n, double arg_tol,
                         double tie_tol) {
    std::vector<double> xs(n + 1), vs(n + 1);
    double h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
        xs[i] = lo + i * h;
        vs[i] = f(xs[i]);
    }
    std::vector<Extremum> cands;
    if (vs[0] >= vs[1]) cands.push_back({xs[0], vs[0]});
    for (int i = 1; i < n; ++i) {
        if (vs[i] >= vs[i - 1] && vs[i] >= vs[i + 1]) {
            auto e = golden_max(f, xs[i - 1], xs[i + 1], arg_tol);
            if (e.value < vs[i]) e = {xs[i], vs[i]};
            cands.push_back(e);
        }
    }
    if (vs[n] >= vs[n - 1]) cands.push_back({xs[n], vs[n]});
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : cands) best = std::max(best, c.value);
    Extremum out{lo, best};
    double window = tie_tol * std::max(1.0, std::abs(best));
    for (const auto& c : cands)
        if (c.value >= best - window && c.x >= out.x) out = {c.x, c.value};
    return out;
}

/// Nelder-Mead maximization in 2D, used for the fixed-cost pair search.
template <typename F>
std::array<double, 3> nelder_mead_2d(F&& f, std::array<double, 2> start,
                                     double scale, double tol, int max_iter) {
    using P = std::array<double, 2>;
    std::array<P, 3> simplex{P{start[0], start[1]},
                             P{start[0] + scale, start[1]},
                             P{start[0], start[1] + scale}};
    std::array<double, 3> fv;
    for (int i = 0; i < 3; ++i) fv[i] = f(simplex[i][0], simplex[i][1]);
    for (int it = 0; it < max_iter; ++it) {
        // order descending (maximization)
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                if (fv[j] > fv[i]) {
                    std::swap(fv[i], fv[j]);
                    std::swap(simplex[i], simplex[j]);
                }
        double spread = std::hypot(simplex[0][0] - simplex[2][0],
                                   simplex[0][1] - simplex[2][1]);
        if (spread < tol) break;
        P centroid{0.5 * (simplex[0][0] + simplex[1][0]),
                   0.5 * (simplex[0][1] + simplex[1][1])};
        auto blend = [&](double t) {
            return P{centroid[0] + t * (centroid[0] - simplex[2][0]),
                     centroid[1] + t * (centroid[1] - simplex[2][1])};
        };
        P refl = blend(1.0);
        double fr = f(refl[0], refl[1]);
        if (fr > fv[0]) {
            P exp_ = blend(2.0);
            double fe = f(exp_[0], exp_[1]);
            if (fe > fr) {
                simplex[2] = exp_;
                fv[2] = fe;
            } else {
                simplex[2] = refl;
                fv[2] = fr;
            }
        } else if (fr > fv[1]) {
            simplex[2] = refl;
            fv[2] = fr;
        } else {
            P con = blend(-0.5);
            double fc = f(con[0], con[1]);
            if (fc > fv[2]) {
                simplex[2] = con;
                fv[2] = fc;
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[i] = {0.5 * (simplex[i][0] + simplex[0][0]),
                                  0.5 * (simplex[i][1] + simplex[0][1])};
                    fv[i] = f(simplex[i][0], simplex[i][1]);
                }
            }
        }
    }
    for (int i = 1; i < 3; ++i)
        if (fv[i] > fv[0]) {
            std::swap(fv[0], fv[i]);
            std::swap(simplex[0], simplex[i]);
        }
    return {simplex[0][0], simplex[0][1], fv[0]};
}

}  // namespace detail

// ============================================================================
// Barrier influence
// ============================================================================

/// The ratio functions G, G^# and the stationarity function D built from a
/// Gerber-Shiu function F (in coordinates relative to the band start) and a
/// fixed cost K.
class BarrierInfluence {
public:
    using FEval = std::function<double(double, int)>;

    BarrierInfluence(const ScaleBasis& basis, FEval f, double K)
        : basis_(&basis), f_(std::move(f)), K_(K) {}

    /// Influence of the penalty's own Gerber-Shiu function (first band).
    static BarrierInfluence first_band(const GerberShiu& gs, double K) {
        BarrierInfluence bi(
            gs.basis(),
            [&gs](double x, int d) { return gs.f_translated(0.0, x, d); }, K);
        // D = W''(1 - F') + F'' W' in exact form: the e^{2 zeta_i x} products
        // cancel algebraically, so only rates <= Phi(q) survive; pruning the
        // cancelled rates removes their floating-point residue, which would
        // otherwise swamp D far out on the search horizon
        ExpPoly w1 = gs.basis().w_poly().derivative();
        ExpPoly w2 = w1.derivative();
        ExpPoly f1 = gs.f_poly().derivative();
        ExpPoly d = w2 - w2 * f1 + f1.derivative() * w1;
        std::vector<ExpTerm> keep;
        for (const auto& t : d.terms())
            if (t.rate <= gs.basis().phi_q() + 1e-9) keep.push_back(t);
        bi.d_poly_ = ExpPoly(std::move(keep));
        return bi;
    }

    /// Influence of the smooth extension of an assembled value (later bands);
    /// arguments stay relative to the extension anchor.
    static BarrierInfluence from_extension(const ScaleBasis& basis,
                                           const GsExtension& ext, double K) {
        return BarrierInfluence(
            basis, [&ext](double x, int d) { return ext.eval(x, d); }, K);
    }

    double K() const { return K_; }
    const ScaleBasis& basis() const { return *basis_; }
    double F(double x, int deriv = 0) const { return f_(x, deriv); }

    /// G^#(x) = (1 - F'(x)) / W^(q)'(x).
    double g_sharp(double x) const {
        return (1.0 - f_(x, 1)) / w_q(*basis_, x, 1);
    }

    /// G(b-, b+) = (b+ - b- - K - (F(b+) - F(b-))) / (W(b+) - W(b-)).
    double g(double b_minus, double b_plus) const {
        return (b_plus - b_minus - K_ - (f_(b_plus, 0) - f_(b_minus, 0))) /
               (w_q(*basis_, b_plus) - w_q(*basis_, b_minus));
    }

    /// D(x) = -G^#'(x) W'(x)^2 = W''(x)(1 - F'(x)) + F''(x) W'(x); K = 0 only.
    double d_function(double x) const {
        if (K_ > 0.0)
            throw DomainError("D is the K = 0 stationarity function");
        if (d_poly_) return d_poly_->eval(x);
        return w_q(*basis_, x, 2) * (1.0 - f_(x, 1)) +
               f_(x, 2) * w_q(*basis_, x, 1);
    }

private:
    const ScaleBasis* basis_;
    FEval f_;
    double K_;
    std::optional<ExpPoly> d_poly_;
};

// ============================================================================
// Single-band levels
// ============================================================================

namespace detail {

/// Newton polish of the fixed-cost stationarity system at an interior optimum:
/// G(b-, b+) = G#(b-) = G#(b+).  Cuts the indifference residual at the band
/// endpoints to near machine precision, which the later generator test needs.
inline void polish_pair_stationarity(const BarrierInfluence& bi, double& b_minus,
                                     double& b_plus) {
    auto residual = [&](double bm, double bp, double* r) {
        double g = bi.g(bm, bp);
        r[0] = g - bi.g_sharp(bm);
        r[1] = g - bi.g_sharp(bp);
    };
    for (int it = 0; it < 40; ++it) {
        double r[2];
        residual(b_minus, b_plus, r);
        if (std::abs(r[0]) + std::abs(r[1]) < 1e-13) break;
        double h0 = 1e-7 * (1.0 + std::abs(b_minus));
        double h1 = 1e-7 * (1.0 + std::abs(b_plus));
        double ra[2], rb[2];
        residual(b_minus + h0, b_plus, ra);
        residual(b_minus, b_plus + h1, rb);
        double j00 = (ra[0] - r[0]) / h0, j01 = (rb[0] - r[0]) / h1;
        double j10 = (ra[1] - r[1]) / h0, j11 = (rb[1] - r[1]) / h1;
        double det = j00 * j11 - j01 * j10;
        if (det == 0.0 || !std::isfinite(det)) break;
        double db = (r[0] * j11 - r[1] * j01) / det;
        double dp = (j00 * r[1] - j10 * r[0]) / det;
        double damp = 1.0;
        if (std::abs(db) > 0.5) damp = std::min(damp, 0.5 / std::abs(db));
        if (std::abs(dp) > 0.5) damp = std::min(damp, 0.5 / std::abs(dp));
        double nm = b_minus - damp * db, np = b_plus - damp * dp;
        if (!(nm >= 0.0) || !(np > nm)) break;
        b_minus = nm;
        b_plus = np;
    }
}

/// At a boundary optimum b- = 0 the remaining stationarity is in b+ alone:
/// G(0, b+) = G#(b+).
inline void polish_pair_boundary(const BarrierInfluence& bi, double& b_plus) {
    for (int it = 0; it < 60; ++it) {
        double r = bi.g(0.0, b_plus) - bi.g_sharp(b_plus);
        double h = 1e-7 * (1.0 + b_plus);
        double r2 = bi.g(0.0, b_plus + h) - bi.g_sharp(b_plus + h);
        double d = (r2 - r) / h;
        if (d == 0.0 || !std::isfinite(d)) break;
        double step = r / d;
        if (std::abs(step) > 0.5) step = step > 0 ? 0.5 : -0.5;
        if (!(b_plus - step > 0.0)) break;
        b_plus -= step;
        if (std::abs(step) < 1e-13 * (1.0 + b_plus)) break;
    }
}

}  // namespace detail

/// Last global maximizer of G^# (K = 0) or of G(b, b+d) over pairs (K > 0).
inline std::pair<double, double> find_single_band(
    const BarrierInfluence& bi, const OptimizerConfig& cfg = {}) {
    const ScaleBasis& basis = bi.basis();
    double x_max = cfg.horizon_factor / basis.phi_q();
    if (bi.K() == 0.0) {
        auto e = detail::last_global_max([&](double x) { return bi.g_sharp(x); },
                                         0.0, x_max, cfg.grid_points, cfg.arg_tol,
                                         cfg.tie_tol);
        return {e.x, e.x};
    }
    // fixed cost: multistart Nelder-Mead over (b, d), then coordinate-wise
    // golden polishing and a stationarity polish
    double d_floor = 1e-7;
    auto val = [&](double b, double d) {
        if (b < 0.0 || d < d_floor) return -1e300;
        if (b + d > 2.0 * x_max) return -1e300;
        return bi.g(b, b + d);
    };
    double best_b = 0.0, best_d = d_floor, best_v = -1e300;
    for (int ib = 0; ib < 8; ++ib) {
        for (int id = 0; id < 8; ++id) {
            double b0 = x_max * (ib + 0.5) / 8.0;
            double d0 = x_max * (id + 0.5) / 8.0;
            auto r = detail::nelder_mead_2d(val, {b0, d0}, x_max / 16.0,
                                            cfg.pair_tol, 400);
            if (r[2] > best_v + cfg.tie_tol ||
                (r[2] > best_v - cfg.tie_tol && r[0] > best_b)) {
                best_b = r[0];
                best_d = r[1];
                best_v = r[2];
            }
        }
    }
    // boundary candidate b = 0
    {
        auto e = detail::golden_max([&](double d) { return val(0.0, d); }, d_floor,
                                    x_max, cfg.arg_tol);
        if (e.value > best_v + cfg.tie_tol) {
            best_b = 0.0;
            best_d = e.x;
            best_v = e.value;
        }
    }
    for (int sweep = 0; sweep < 60; ++sweep) {
        double lo_b = std::max(0.0, best_b - x_max / 64.0);
        auto eb = detail::golden_max([&](double b) { return val(b, best_d); }, lo_b,
                                     best_b + x_max / 64.0, cfg.pair_tol * 0.1);
        auto ed = detail::golden_max([&](double d) { return val(best_b, d); },
                                     std::max(d_floor, best_d - x_max / 64.0),
                                     best_d + x_max / 64.0, cfg.pair_tol * 0.1);
        double move = std::abs(eb.x - best_b) + std::abs(ed.x - best_d);
        best_b = eb.x;
        best_d = ed.x;
        best_v = val(best_b, best_d);
        if (move < cfg.pair_tol) break;
    }
    if (best_b < cfg.pair_tol) best_b = 0.0;
    double b_plus = best_b + best_d;
    if (best_b > 0.0)
        detail::polish_pair_stationarity(bi, best_b, b_plus);
    else
        detail::polish_pair_boundary(bi, b_plus);
    return {best_b, b_plus};
}

// ============================================================================
// Generator-sign optimality test
// ============================================================================

struct GeneratorCheck {
    bool ok = false;
    double margin = 0.0;  // max of J over the verification grid
    double worst_x = 0.0;
};

/// Tests (Gamma - q) v <= 0 above `from`, where v is affine with unit slope
/// there.  The remainder J is an exact exponential polynomial whose only
/// non-decaying term is -q (x - from), so the grid max together with the
/// linear tail dominance decides the sign on all of (from, infty).
inline GeneratorCheck check_generator_nonpositive(const PiecewiseValue& value,
                                                  double from,
                                                  const ScaleBasis& basis,
                                                  const OptimizerConfig& cfg = {},
                                                  double until = 0.0) {
    ExpPoly J = generator_remainder(value.boundary_below(from), from, 1.0,
                                    basis.model(), value.evaluate(from));
    double span = until > from ? until - from : cfg.horizon_factor / basis.phi_q();
    int n = cfg.generator_grid;
    double best = -std::numeric_limits<double>::infinity(), best_t = 0.0;
    for (int i = 1; i <= n; ++i) {
        double t = span * i / n;
        double v = J.eval(t);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    double h = span / n;
    auto e = detail::golden_max([&](double t) { return J.eval(t); },
                                std::max(1e-12, best_t - h),
                                std::min(span, best_t + h), 1e-12);
    if (e.value > best) {
        best = e.value;
        best_t = e.x;
    }
    GeneratorCheck out;
    out.margin = best;
    out.worst_x = from + best_t;
    out.ok = best <= cfg.generator_tol;
    return out;
}

/// Full verification of a band strategy's value: the generator remainder of
/// the affine extension must be nonpositive on every payout region, interior
/// ones and the tail above the top band.
inline GeneratorCheck verify_strategy(const PiecewiseValue& value,
                                      const CandidateLevels& levels,
                                      const ScaleBasis& basis,
                                      const OptimizerConfig& cfg = {}) {
    GeneratorCheck worst;
    worst.ok = true;
    worst.margin = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < levels.bands.size(); ++i) {
        double from = levels.bands[i].b_plus;
        double until =
            i + 1 < levels.bands.size() ? levels.bands[i + 1].a : 0.0;
        if (until > 0.0 && until - from < 1e-9) continue;
        GeneratorCheck c = check_generator_nonpositive(value, from, basis, cfg, until);
        if (c.margin > worst.margin) worst = c;
    }
    return worst;
}

// ============================================================================
// Second and later bands: stopping level + band pair for the updated payoff
// ============================================================================

namespace detail {

/// sup over d in (0, span] of G^(a)#(d) together with its last argmax.
inline Extremum sup_g_sharp(const BarrierInfluence& bi, double span,
                            const OptimizerConfig& cfg, int grid) {
    return last_global_max([&](double d) { return bi.g_sharp(d); }, 1e-9, span,
                           grid, cfg.arg_tol, cfg.tie_tol);
}

/// sup over pairs (b, b+d), b >= 0, d > 0 of G^(a); reduced multistart keeps
/// the level scan affordable, the final solve uses the full one.
inline std::array<double, 3> sup_g_pair(const BarrierInfluence& bi, double span,
                                        const OptimizerConfig& cfg, bool full) {
    double d_floor = 1e-7;
    auto val = [&](double b, double d) {
        if (b < 0.0 || d < d_floor || b + d > 2.0 * span) return -1e300;
        return bi.g(b, b + d);
    };
    int starts = full ? 8 : 4;
    int iters = full ? 400 : 120;
    double best_b = 0.0, best_d = d_floor, best_v = -1e300;
    for (int ib = 0; ib < starts; ++ib)
        for (int id = 0; id < starts; ++id) {
            double b0 = span * (ib + 0.5) / starts;
            double d0 = span * (id + 0.5) / starts;
            auto r = nelder_mead_2d(val, {b0, d0}, span / (2.0 * starts),
                                    cfg.pair_tol, iters);
            if (r[2] > best_v + cfg.tie_tol ||
                (r[2] > best_v - cfg.tie_tol && r[0] > best_b)) {
                best_b = r[0];
                best_d = r[1];
                best_v = r[2];
            }
        }
    auto e0 = golden_max([&](double d) { return val(0.0, d); }, d_floor, span,
                         cfg.arg_tol);
    if (e0.value > best_v + cfg.tie_tol) {
        best_b = 0.0;
        best_d = e0.x;
        best_v = e0.value;
    }
    if (full) {
        for (int sweep = 0; sweep < 60; ++sweep) {
            auto eb = golden_max([&](double b) { return val(b, best_d); },
                                 std::max(0.0, best_b - span / 64.0),
                                 best_b + span / 64.0, cfg.pair_tol * 0.1);
            auto ed = golden_max([&](double d) { return val(best_b, d); },
                                 std::max(d_floor, best_d - span / 64.0),
                                 best_d + span / 64.0, cfg.pair_tol * 0.1);
            double move = std::abs(eb.x - best_b) + std::abs(ed.x - best_d);
            best_b = eb.x;
            best_d = ed.x;
            best_v = val(best_b, best_d);
            if (move < cfg.pair_tol) break;
        }
    }
    return {best_b, best_d, best_v};
}

/// sup over b >= a of the no-dividend ratio G^(a)_empty together with its
/// last argmax (fixed-cost branch only).  Arguments relative to a.
inline Extremum sup_g_empty(const ScaleBasis& basis, const GsExtension& ext,
                            double span, const OptimizerConfig& cfg, int grid) {
    auto g = [&](double d) {
        return (ext.value_at_anchor() + d - ext.eval(d)) / w_q(basis, d);
    };
    return last_global_max(g, 1e-9, span, grid, cfg.arg_tol, cfg.tie_tol);
}

}  // namespace detail

/// Locates the next band above `top` for the current value function: the
/// stopping level a is the root of gbar(a) = sup_b G^(a)(...) (continuous /
/// smooth fit), the band endpoints the last argmax at that level.  Returns
/// std::nullopt only if no level in range admits a positive influence, which
/// contradicts a failed generator test and is reported as NoSecondBand.
inline Band find_next_band(const GerberShiu& gs, const PiecewiseValue& value,
                           double top, double K,
                           const OptimizerConfig& cfg = {}) {
    const ScaleBasis& basis = gs.basis();
    double span = cfg.horizon_factor / basis.phi_q();

    auto extension_at = [&](double a_abs) {
        return extend_boundary(basis, value.boundary_below(a_abs), a_abs, 1.0);
    };
    // gbar(a): largest influence achievable with a band above level top + a
    auto gbar = [&](double a_rel, bool full) -> double {
        GsExtension ext = extension_at(top + a_rel);
        BarrierInfluence bi = BarrierInfluence::from_extension(basis, ext, K);
        if (K == 0.0)
            return detail::sup_g_sharp(bi, span, cfg, full ? cfg.grid_points : 800)
                .value;
        return detail::sup_g_pair(bi, span, cfg, full)[2];
    };

    // scan for the first sign change of gbar, then bisect to the stopping level
    auto locate_level = [&](const std::function<double(double)>& f)
        -> std::optional<double> {
        for (int i = 1; i <= cfg.level_grid; ++i) {
            double a = span * i / cfg.level_grid;
            if (f(a) > 0.0) {
                double lo = span * (i - 1) / cfg.level_grid, hi = a;
                while (hi - lo > cfg.level_tol * std::max(1.0, hi)) {
                    double mid = 0.5 * (lo + hi);
                    (f(mid) > 0.0 ? hi : lo) = mid;
                }
                return hi;
            }
        }
        return std::nullopt;
    };

    std::optional<double> alpha =
        locate_level([&](double a) { return gbar(a, false); });

    if (K == 0.0) {
        if (!alpha)
            throw NoSecondBand(
                "generator test failed but no level admits a positive band "
                "influence; solver inconsistency");
        GsExtension ext = extension_at(top + *alpha);
        BarrierInfluence bi = BarrierInfluence::from_extension(basis, ext, K);
        auto e = detail::sup_g_sharp(bi, span, cfg, cfg.grid_points);
        double a_abs = top + *alpha;
        return Band{a_abs, a_abs + e.x, a_abs + e.x, false};
    }

    // fixed cost: also locate the no-dividend stopping levels and pick the
    // branch with the lower stopping level
    auto gbar_empty = [&](double a_rel) -> double {
        GsExtension ext = extension_at(top + a_rel);
        return detail::sup_g_empty(basis, ext, span, cfg, 800).value;
    };
    std::optional<double> alpha_empty = locate_level(gbar_empty);
    if (!alpha && !alpha_empty)
        throw NoSecondBand(
            "generator test failed but no level admits a positive band "
            "influence; solver inconsistency");

    if (alpha_empty && (!alpha || *alpha_empty < *alpha)) {
        GsExtension ext = extension_at(top + *alpha_empty);
        auto e = detail::sup_g_empty(basis, ext, span, cfg, cfg.grid_points);
        double a_abs = top + *alpha_empty;
        double b_plus = a_abs + e.x;
        // lower lump level where the gradient constraint saturates:
        // v(b+) - v(b-) = b+ - b- - K.  At the solved level the influence is
        // zero and no such b- may exist; the band is then provisional
        // (b_minus = b_plus) and a dividend band must cap it later.
        double v_bp = ext.eval(e.x);
        auto gap = [&](double bm) {
            double v_bm = bm >= a_abs ? ext.eval(bm - a_abs) : value.evaluate(bm);
            return v_bp - v_bm - (b_plus - bm - K);
        };
        double bm = b_plus;
        int n = 512;
        double prev = gap(0.0);
        for (int i = 1; i <= n && bm == b_plus; ++i) {
            double x = b_plus * i / n;
            double cur = gap(x);
            if ((prev <= 0.0) != (cur <= 0.0)) {
                double lo = b_plus * (i - 1) / n, hi = x;
                for (int it = 0; it < 200; ++it) {
                    double mid = 0.5 * (lo + hi);
                    ((gap(mid) <= 0.0) == (prev <= 0.0) ? lo : hi) = mid;
                    if (hi - lo < cfg.level_tol * std::max(1.0, hi)) break;
                }
                bm = 0.5 * (lo + hi);
            }
            prev = cur;
        }
        return Band{a_abs, bm, b_plus, true};
    }

    GsExtension ext = extension_at(top + *alpha);
    BarrierInfluence bi = BarrierInfluence::from_extension(basis, ext, K);
    auto r = detail::sup_g_pair(bi, span, cfg, true);
    double a_abs = top + *alpha;
    return Band{a_abs, a_abs + r[0], a_abs + r[0] + r[1], false};
}

// ============================================================================
// Multi-band recursion
// ============================================================================

struct RecursionResult {
    CandidateLevels levels;
    PiecewiseValue value;
};

/// Runs the band recursion: find a band, test optimality with the generator
/// sign, append further bands until the test passes or the cap is reached.
inline RecursionResult multi_band_recursion(const GerberShiu& gs, double K,
                                            const OptimizerConfig& cfg = {}) {
    CandidateLevels levels;
    BarrierInfluence bi0 = BarrierInfluence::first_band(gs, K);
    auto [bm, bp] = find_single_band(bi0, cfg);
    levels.bands.push_back({0.0, bm, bp, false});

    PiecewiseValue value = assemble(gs, levels, K);
    for (int iter = 1; iter <= cfg.max_bands; ++iter) {
        levels.iterations = iter;
        double top = levels.bands.back().b_plus;
        GeneratorCheck chk = check_generator_nonpositive(value, top, gs.basis(), cfg);
        levels.generator_margin = chk.margin;
        levels.worst_x = chk.worst_x;
        if (chk.ok) {
            levels.converged = true;
            break;
        }
        if (iter == cfg.max_bands) break;  // cap reached, reported unconverged
        Band nb = find_next_band(gs, value, top, K, cfg);
        levels.bands.push_back(nb);
        value = assemble(gs, levels, K);
    }
    return {std::move(levels), std::move(value)};
}

}  // namespace divband

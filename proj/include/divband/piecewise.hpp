#pragma once

#include <cmath>
#include <vector>

#include "divband/bands.hpp"
#include "divband/errors.hpp"
#include "divband/gerber_shiu.hpp"

namespace divband {

// ============================================================================
// Piecewise value functions
//
// The value of a band strategy alternates scale-function segments
// W^(q)(x - a_i) C_i + F^(i)(x - a_i) on the continuation bands [a_i, b_i+]
// and unit-slope affine segments on the payout regions, with the penalty
// pasted on the negative half-line.
// ============================================================================

class PiecewiseValue {
public:
    struct Segment {
        double lo;
        double hi;  // +inf for the final affine piece
        double origin;
        ExpPoly poly;  // value = poly(x - origin)
        bool affine;   // unit-slope payout segment
    };

    PiecewiseValue(Penalty penalty, std::vector<Segment> segs)
        : penalty_(std::move(penalty)), segs_(std::move(segs)) {}

    const Penalty& penalty() const { return penalty_; }
    const std::vector<Segment>& segments() const { return segs_; }

    double evaluate(double x, int deriv = 0) const {
        if (x < 0.0)
            return deriv == 0 ? penalty_.value(x) : penalty_.deriv(x, deriv);
        const Segment& s = locate(x);
        ExpPoly p = s.poly;
        for (int d = 0; d < deriv; ++d) p = p.derivative();
        return p.eval(x - s.origin);
    }

    double operator()(double x) const { return evaluate(x); }

    /// Left-limit evaluation at x > 0 (uses the segment ending at x).
    double evaluate_left(double x, int deriv = 0) const {
        for (size_t i = segs_.size(); i-- > 0;) {
            if (segs_[i].lo < x && x <= segs_[i].hi) {
                ExpPoly p = segs_[i].poly;
                for (int d = 0; d < deriv; ++d) p = p.derivative();
                return p.eval(x - segs_[i].origin);
            }
        }
        return evaluate(x, deriv);
    }

    /// The boundary view on (-inf, A] used by generator computations:
    /// penalty segment plus the value segments clipped to [0, A].
    BoundaryFn boundary_below(double A) const {
        BoundaryFn b = BoundaryFn::from_penalty(penalty_);
        for (const auto& s : segs_) {
            if (s.lo >= A) break;
            b.append(s.lo, std::min(s.hi, A), s.origin, s.poly);
        }
        return b;
    }

private:
    Penalty penalty_;
    std::vector<Segment> segs_;

    const Segment& locate(double x) const {
        for (const auto& s : segs_)
            if (x <= s.hi) return s;
        return segs_.back();
    }
};

/// Assembles the piecewise value function of a band strategy: the first band
/// uses the penalty's Gerber-Shiu function, later bands the smooth extension
/// of the already-assembled value, with influence constants from the
/// barrier-influence ratios.  Continuity is verified at every internal knot.
inline PiecewiseValue assemble(const GerberShiu& gs, const CandidateLevels& strategy,
                               double K) {
    strategy.validate(K);
    const ScaleBasis& basis = gs.basis();
    std::vector<PiecewiseValue::Segment> segs;
    Penalty penalty = gs.penalty();

    double prev_value_at_top = 0.0;  // v(b_{i-1}+)
    double prev_top = 0.0;

    for (size_t i = 0; i < strategy.bands.size(); ++i) {
        const Band& band = strategy.bands[i];
        ExpPoly f_first;
        std::optional<GsExtension> ext;
        double value_at_a;

        if (i == 0) {
            f_first = gs.f_poly();
            value_at_a = penalty.value(0.0);
        } else {
            // affine payout segment between the previous band and this one
            value_at_a = prev_value_at_top + (band.a - prev_top);
            segs.push_back({prev_top, band.a, prev_top,
                            ExpPoly({{prev_value_at_top, 0, 0.0}, {1.0, 1, 0.0}}),
                            true});
            PiecewiseValue partial(penalty, segs);
            ext.emplace(extend_boundary(basis, partial.boundary_below(band.a),
                                        band.a, 1.0));
        }

        auto F = [&](double u, int d) {
            if (ext) return ext->eval(u, d);
            ExpPoly p = f_first;
            for (int j = 0; j < d; ++j) p = p.derivative();
            return p.eval(u);
        };
        // value below the band start (payoff side of the influence ratio)
        auto value_below = [&](double y) {
            if (i == 0) return penalty.value(y);
            return PiecewiseValue(penalty, segs).evaluate(y);
        };

        double d_plus = band.b_plus - band.a;
        double C;
        if (band.stopping) {
            // no-dividend band: G^(a)_empty = (f(b+) - F(b+ - a)) / W(b+ - a)
            C = (value_at_a + d_plus - F(d_plus, 0)) / w_q(basis, d_plus);
        } else if (K > 0.0) {
            double d_minus = band.b_minus - band.a;
            double f_at_minus =
                d_minus >= 0.0 ? F(d_minus, 0) : value_below(band.b_minus);
            double w_at_minus = d_minus >= 0.0 ? w_q(basis, d_minus) : 0.0;
            C = (band.b_plus - band.b_minus - K - (F(d_plus, 0) - f_at_minus)) /
                (w_q(basis, d_plus) - w_at_minus);
        } else {
            C = (1.0 - F(d_plus, 1)) / w_q(basis, d_plus, 1);
        }

        if (d_plus > 0.0) {
            ExpPoly fp = ext ? ext->to_poly(d_plus) : f_first;
            ExpPoly seg_poly = basis.w_poly().scaled(C) + fp;
            // continuity at a_i: affine side is value_at_a, scale side
            // W(0) C_i + F^(i)(0)
            double va_scale = seg_poly.eval(0.0);
            if (i > 0 && std::abs(va_scale - value_at_a) >
                             1e-7 * std::max(1.0, std::abs(value_at_a)))
                throw KnotMismatch("value discontinuous at band start a_" +
                                   std::to_string(i + 1));
            segs.push_back({band.a, band.b_plus, band.a, seg_poly, false});
            prev_value_at_top = seg_poly.eval(d_plus);
        } else {
            // degenerate band [0, 0]: value at 0 is W(0) G^#(0) + F_w(0)
            prev_value_at_top = w_q(basis, 0.0) * C + f_first.eval(0.0);
        }
        prev_top = band.b_plus;
    }

    // affine tail above the top band
    segs.push_back({prev_top, std::numeric_limits<double>::infinity(), prev_top,
                    ExpPoly({{prev_value_at_top, 0, 0.0}, {1.0, 1, 0.0}}), true});
    return PiecewiseValue(std::move(penalty), std::move(segs));
}

/// Value of paying out all reserves immediately and then paying premiums as
/// dividends until ruin: x + gamma_w, with
///   gamma_w = (p + w_nu(0) + nu_bar w(0)) / (q + nu_bar)
/// for finite-activity models without a Gaussian part, and w(0) otherwise.
inline double lump_sum_value(const RiskModel& model, const Penalty& penalty,
                             double x) {
    if (x < 0.0) throw DomainError("lump_sum_value requires x >= 0");
    double gamma;
    if (model.gaussian_sq() > 0.0) {
        gamma = penalty.value(0.0);
    } else {
        auto nu = model.density_terms();
        ExpPoly shifted_w =
            penalty.to_poly() - ExpPoly::constant(penalty.value(0.0));
        double w_nu_0 =
            segment_tail_integral(shifted_w, 0.0,
                                  -std::numeric_limits<double>::infinity(), 0.0,
                                  0.0, nu)
                .eval(0.0);
        double nbar = model.intensity();
        gamma = (model.premium_rate() + w_nu_0 + nbar * penalty.value(0.0)) /
                (model.discount() + nbar);
    }
    return x + gamma;
}

}  // namespace divband

#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "divband/errors.hpp"
#include "divband/exp_poly.hpp"
#include "divband/model.hpp"
#include "divband/penalty.hpp"
#include "divband/scale.hpp"

namespace divband {

// ============================================================================
// Levy-measure tail integrals (closed form)
// ============================================================================

/// int_t^infty z^j e^{-m z} dz as an ExpPoly in t.
inline ExpPoly tail_pow_exp(int j, double m) {
    std::vector<ExpTerm> out;
    double c = 1.0 / m;  // j!/i! / m^{j-i+1}, built from i = j downwards
    out.push_back({c, j, -m});
    for (int i = j - 1; i >= 0; --i) {
        c *= (i + 1) / m;
        out.push_back({c, i, -m});
    }
    return ExpPoly(std::move(out));
}

/// nu((t, infty)) as an ExpPoly in t.
inline ExpPoly nu_bar_poly(const std::vector<DensityTerm>& nu) {
    ExpPoly acc;
    for (const auto& d : nu) acc = acc + tail_pow_exp(d.pow, d.rate).scaled(d.beta);
    return acc;
}

/// int_{(t,infty)} (z - t) nu(dz) as an ExpPoly in t.
inline ExpPoly integrated_tail_poly(const std::vector<DensityTerm>& nu) {
    ExpPoly acc;
    ExpPoly t_lin = ExpPoly::term(1.0, 1, 0.0);
    for (const auto& d : nu) {
        ExpPoly hi = tail_pow_exp(d.pow + 1, d.rate).scaled(d.beta);
        ExpPoly lo = t_lin * tail_pow_exp(d.pow, d.rate).scaled(d.beta);
        acc = acc + hi - lo;
    }
    return acc;
}

namespace detail {

/// int_{u0}^{u1} u^k e^{s u} du; u0 may be -infinity (then s > 0 required).
inline double poly_exp_definite(int k, double s, double u0, double u1) {
    if (std::isinf(u0)) {
        // antiderivative evaluated at u1 (vanishes at -infinity for s > 0)
        long double c = 1.0L / s;
        long double acc = c * std::pow((long double)u1, k);
        for (int i = k - 1; i >= 0; --i) {
            c = -c * (i + 1) / s;
            acc += c * std::pow((long double)u1, i);
        }
        return static_cast<double>(acc * std::exp((long double)s * u1));
    }
    double span = std::max(std::abs(u0), std::abs(u1));
    if (std::abs(s) * span < 0.5) {
        // series in s to avoid cancellation of the antiderivative form
        long double c = 1.0L;  // s^r / r!
        long double acc = 0.0L;
        for (int r = 0; r < 80; ++r) {
            long double hi = std::pow((long double)u1, k + r + 1);
            long double lo = std::pow((long double)u0, k + r + 1);
            long double add = c * (hi - lo) / (k + r + 1);
            acc += add;
            c *= s / (r + 1);
            if (std::abs((double)(c * std::pow((long double)span, k + r + 2))) <
                1e-22 * (1.0 + std::abs((double)acc)))
                break;
        }
        return static_cast<double>(acc);
    }
    auto prim = [&](long double u) {
        long double c = 1.0L / s;
        long double acc = c * std::pow(u, k);
        for (int i = k - 1; i >= 0; --i) {
            c = -c * (i + 1) / s;
            acc += c * std::pow(u, i);
        }
        return acc * std::exp((long double)s * u);
    };
    return static_cast<double>(prim(u1) - prim(u0));
}

}  // namespace detail

// ============================================================================
// Piecewise boundary functions and the generator remainder
// ============================================================================

/// A function defined piecewise on (-inf, A] by ExpPoly segments; segment i
/// covers [lo, hi] and evaluates poly(x - origin).  The first segment may
/// have lo = -infinity.  Used as the boundary data ("payoff below A") of
/// generator computations.
class BoundaryFn {
public:
    struct Segment {
        double lo;
        double hi;
        double origin;
        ExpPoly poly;
    };

    BoundaryFn() = default;
    explicit BoundaryFn(std::vector<Segment> segs) : segs_(std::move(segs)) {}

    const std::vector<Segment>& segments() const { return segs_; }
    double upper() const { return segs_.empty() ? 0.0 : segs_.back().hi; }

    void append(double lo, double hi, double origin, ExpPoly poly) {
        segs_.push_back({lo, hi, origin, std::move(poly)});
    }

    double eval(double x, int deriv = 0) const {
        for (size_t i = segs_.size(); i-- > 0;) {
            const auto& s = segs_[i];
            if (x >= s.lo || (i == 0 && std::isinf(s.lo))) {
                if (x <= s.hi || i + 1 == segs_.size()) {
                    ExpPoly p = s.poly;
                    for (int d = 0; d < deriv; ++d) p = p.derivative();
                    return p.eval(x - s.origin);
                }
            }
        }
        return 0.0;
    }

    /// Boundary function equal to the penalty formula on (-inf, 0].
    static BoundaryFn from_penalty(const Penalty& w) {
        BoundaryFn b;
        b.append(-std::numeric_limits<double>::infinity(), 0.0, 0.0, w.to_poly());
        return b;
    }

private:
    std::vector<Segment> segs_;
};

/// Closed-form I(t) = int over z > t of h(x - z) nu(dz) restricted to the
/// piece where x - z falls in [y0, y1], with x = A + t and h(y) given as an
/// ExpPoly in (y - origin).  All intermediate exponents are kept relative to
/// the segment's upper end so nothing overflows for large A.
inline ExpPoly segment_tail_integral(const ExpPoly& h, double origin, double y0,
                                     double y1, double A,
                                     const std::vector<DensityTerm>& nu) {
    // shift to u = y - y1 in [y0 - y1, 0]; g(u) = h(u + y1 - origin)
    ExpPoly g = h.shifted(y1 - origin);
    double u0 = std::isinf(y0) ? y0 : y0 - y1;
    double Ap = A - y1;  // >= 0
    std::vector<ExpTerm> out;
    for (const auto& gt : g.terms()) {
        for (const auto& d : nu) {
            double envelope = d.beta * gt.coef * std::exp(-d.rate * Ap);
            if (envelope == 0.0) continue;
            // (Ap + t - u)^j expanded over t powers i and u powers l
            for (int i = 0; i <= d.pow; ++i) {
                double cbin_t = ExpPoly::binom(d.pow, i);
                int jm = d.pow - i;  // remaining power of (Ap - u)
                for (int l = 0; l <= jm; ++l) {
                    double cbin_u = ExpPoly::binom(jm, l);
                    double apow = std::pow(Ap, jm - l);
                    double sign = (l % 2) ? -1.0 : 1.0;
                    double inner = detail::poly_exp_definite(
                        gt.pow + l, gt.rate + d.rate, u0, 0.0);
                    double coef =
                        envelope * cbin_t * cbin_u * apow * sign * inner;
                    if (coef != 0.0) out.push_back({coef, i, -d.rate});
                }
            }
        }
    }
    return ExpPoly(std::move(out));
}

/// Generator remainder of the affine extension above A: for x = A + t, t > 0,
///   J(t) = b eta - q (b t + V(A))
///          + int_{(t,infty)} [ V(A + t - z) - V(A) + b (z - t) ] nu(dz),
/// where V is the boundary function below A and b the extension slope.
/// Returned as an ExpPoly in t.
inline ExpPoly generator_remainder(const BoundaryFn& below, double A, double slope,
                                   const RiskModel& model, double value_at_A) {
    auto nu = model.density_terms();
    double eta = net_profit(model);
    double q = model.discount();

    ExpPoly J = ExpPoly({{slope * eta - q * value_at_A, 0, 0.0},
                         {-q * slope, 1, 0.0}});
    J = J + integrated_tail_poly(nu).scaled(slope);
    J = J - nu_bar_poly(nu).scaled(value_at_A);
    for (const auto& seg : below.segments())
        J = J + segment_tail_integral(seg.poly, seg.origin, seg.lo,
                                      std::min(seg.hi, A), A, nu);
    return J;
}

// ============================================================================
// Smooth Gerber-Shiu extension of a boundary function
// ============================================================================

/// The smooth harmonic extension F of a boundary function f below A:
///   F(x) = f(A) + b x - int_0^x W^(q)(x - y) J(y) dy,   x >= 0,
/// evaluated pointwise through stable phi kernels (valid for arbitrarily
/// large x) or frozen into an ExpPoly for a bounded segment.
class GsExtension {
public:
    GsExtension(const ScaleBasis& basis, double value_at_A, double slope, ExpPoly J)
        : basis_(&basis), f_A_(value_at_A), slope_(slope), J_(std::move(J)) {}

    double value_at_anchor() const { return f_A_; }
    double slope() const { return slope_; }
    const ExpPoly& remainder() const { return J_; }

    /// F, F' or F'' at x >= 0 (distance above the anchor).
    double eval(double x, int deriv = 0) const {
        const auto& zs = basis_->roots().roots;
        const auto& as = basis_->coefficients();
        double w0 = 0.0, w0p = 0.0;
        for (size_t i = 0; i < zs.size(); ++i) {
            w0 += as[i];
            w0p += as[i] * zs[i];
        }
        double conv = 0.0;
        for (size_t i = 0; i < zs.size(); ++i) {
            double zfac = as[i];
            for (int d = 0; d < deriv; ++d) zfac *= zs[i];
            conv += zfac * kernel_sum(zs[i], x);
        }
        switch (deriv) {
            case 0:
                return f_A_ + slope_ * x - conv;
            case 1:
                return slope_ - w0 * J_.eval(x) - conv;
            default:
                return -w0 * J_.derivative().eval(x) - w0p * J_.eval(x) - conv;
        }
    }

    /// Freeze into an ExpPoly valid on [0, span].
    ExpPoly to_poly(double span) const {
        ExpPoly f = ExpPoly({{f_A_, 0, 0.0}, {slope_, 1, 0.0}});
        return f - convolve_expsum(basis_->w_poly(), J_, span);
    }

private:
    const ScaleBasis* basis_;
    double f_A_;
    double slope_;
    ExpPoly J_;

    // sum_j c_j x^{n_j + 1} e^{zeta x} phi_{n_j}((beta_j - zeta) x)
    double kernel_sum(double zeta, double x) const {
        if (x == 0.0) return 0.0;
        double acc = 0.0;
        double lx = std::log(x);
        for (const auto& tm : J_.terms()) {
            auto ph = phi_kernel_scaled(tm.pow, (tm.rate - zeta) * x);
            if (ph.factor == 0.0) continue;
            double ln_mag = std::log(std::abs(tm.coef * ph.factor)) +
                            (tm.pow + 1) * lx + zeta * x + ph.exponent;
            if (ln_mag < -745.0) continue;
            double sign = (tm.coef * ph.factor < 0) ? -1.0 : 1.0;
            acc += sign * std::exp(ln_mag);
        }
        return acc;
    }
};

/// Builds the smooth extension of `below` above the anchor A with the given
/// extension slope (defaults to the boundary's left derivative at A).
inline GsExtension extend_boundary(const ScaleBasis& basis, const BoundaryFn& below,
                                   double A, std::optional<double> slope = {}) {
    double vA = below.eval(A);
    double b = slope ? *slope : below.eval(A, 1);
    ExpPoly J = generator_remainder(below, A, b, basis.model(), vA);
    return GsExtension(basis, vA, b, std::move(J));
}

// ============================================================================
// Gerber-Shiu functions for the supported penalty kinds
// ============================================================================

/// Pairs a penalty with a scale basis; F_w uses the closed forms
///   F_zero = 0,  F_affine = c Z_1 + c0 Z^(q),  F_exp = c Z^(q,v)
/// on the positive half-line and the penalty itself below it.
class GerberShiu {
public:
    GerberShiu(ScaleBasis basis, Penalty penalty)
        : basis_(std::move(basis)), penalty_(std::move(penalty)) {
        penalty_.check_admissible(basis_.model());
    }

    const ScaleBasis& basis() const { return basis_; }
    const Penalty& penalty() const { return penalty_; }
    const RiskModel& model() const { return basis_.model(); }

    /// F_{a w}(x): the Gerber-Shiu function of the penalty translated by a,
    /// i.e. payoff u -> w(a + u), evaluated at x >= 0.
    double f_translated(double a, double x, int deriv = 0) const {
        return std::visit(
            [&](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, ZeroPenalty>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, AffinePenalty>) {
                    double c0 = k.c0 + k.c * a;
                    return k.c * z1_eval(x, deriv) + c0 * z_q(basis_, x, deriv);
                } else {
                    double scale = k.c * std::exp(k.v * a);
                    if (deriv == 2) {
                        double z1v = z_qv(basis_, k.v, x, 1);
                        double wq1 = w_q(basis_, x, 1);
                        return scale * (k.v * z1v +
                                        (basis_.q() - psi(model(), k.v)) * wq1);
                    }
                    return scale * z_qv(basis_, k.v, x, deriv);
                }
            },
            penalty_.kind());
    }

    /// F_w(x) with the penalty pasted on the negative half-line.
    double f_w(double x, int deriv = 0) const {
        if (x < 0.0)
            return deriv == 0 ? penalty_.value(x) : penalty_.deriv(x, deriv);
        return f_translated(0.0, x, deriv);
    }

    /// F_w restricted to [0, span] as an ExpPoly.
    ExpPoly f_poly() const {
        return std::visit(
            [&](const auto& k) -> ExpPoly {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, ZeroPenalty>)
                    return ExpPoly::zero();
                else if constexpr (std::is_same_v<T, AffinePenalty>)
                    return basis_.z1_poly().scaled(k.c) + basis_.z_poly().scaled(k.c0);
                else
                    return basis_.z_qv_poly(k.v).scaled(k.c);
            },
            penalty_.kind());
    }

    /// kappa_w = (sigma^2/2) w'(0-) + (q/Phi(q)) w(0) - L w_nu(Phi(q)).
    double kappa() const {
        if (penalty_.is_zero()) return 0.0;
        double phi = basis_.phi_q();
        double k = 0.5 * model().gaussian_sq() * penalty_.slope_at_zero() +
                   basis_.q() / phi * penalty_.value(0.0);
        return k - w_nu_poly().laplace(phi);
    }

    /// w_nu(t) = int_{(t,infty)} [w(t - z) - w(0)] nu(dz), closed form.
    ExpPoly w_nu_poly() const {
        auto nu = model().density_terms();
        ExpPoly shifted_w =
            penalty_.to_poly() - ExpPoly::constant(penalty_.value(0.0));
        return segment_tail_integral(shifted_w, 0.0,
                                     -std::numeric_limits<double>::infinity(), 0.0,
                                     0.0, nu);
    }

    /// Gerber-Shiu penalty value V_w(x) = F_w(x) - W^(q)(x) kappa_w.
    double v_penalty(double x) const {
        if (x < 0.0) return penalty_.value(x);
        return f_w(x) - w_q(basis_, x) * kappa();
    }

    /// Generator remainder J_w(x) of the affine extension with slope b
    /// (default w'_-(0)) above 0; x > 0.
    double j_w(double x, std::optional<double> slope = {}) const {
        return j_w_poly(slope).eval(x);
    }

    ExpPoly j_w_poly(std::optional<double> slope = {}) const {
        double b = slope ? *slope : penalty_.slope_at_zero();
        return generator_remainder(BoundaryFn::from_penalty(penalty_), 0.0, b,
                                   model(), penalty_.value(0.0));
    }

    /// Two-sided exit value on [a, b]: penalty w paid when crossing below a,
    /// reward delta collected when passing above b; the penalty formula is
    /// extended to (-inf, a].
    double two_sided_exit(double a, double b, double x, double delta = 0.0) const {
        if (!(a < x && x < b))
            throw DomainError("two_sided_exit requires a < x < b");
        double fx = f_translated(a, x - a);
        double fb = f_translated(a, b - a);
        return fx + w_q(basis_, x - a) * (delta - fb) / w_q(basis_, b - a);
    }

private:
    ScaleBasis basis_;
    Penalty penalty_;

    double z1_eval(double x, int deriv) const {
        ExpPoly p = basis_.z1_poly();
        for (int d = 0; d < deriv; ++d) p = p.derivative();
        return p.eval(x);
    }
};

}  // namespace divband

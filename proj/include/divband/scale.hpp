#pragma once

#include <cmath>

#include "divband/exp_poly.hpp"
#include "divband/model.hpp"

namespace divband {

// ============================================================================
// Scale functions as exponential sums
//
// For rational Laplace exponents with distinct roots zeta_i of psi = q,
//   W^(q)(x) = sum_i A_i e^{zeta_i x},  A_i = 1 / psi'(zeta_i),
// and the derived families Z^(q), Z^(q,v), Z_1 are exponential sums over the
// same exponents.
// ============================================================================

class ScaleBasis {
public:
    ScaleBasis(RiskModel model) : model_(std::move(model)), roots_(cl_roots(model_)) {
        const auto& zs = roots_.roots;
        coef_.reserve(zs.size());
        for (double z : zs) coef_.push_back(1.0 / psi_deriv(model_, z));
    }

    const RiskModel& model() const { return model_; }
    const RootSet& roots() const { return roots_; }
    const std::vector<double>& coefficients() const { return coef_; }
    double phi_q() const { return roots_.phi_q; }
    double q() const { return model_.discount(); }

    /// W^(q) restricted to [0, inf) as an ExpPoly.
    ExpPoly w_poly() const {
        std::vector<ExpTerm> t;
        for (size_t i = 0; i < coef_.size(); ++i)
            t.push_back({coef_[i], 0, roots_.roots[i]});
        return ExpPoly(std::move(t));
    }

    /// Z^(q) = 1 + q int_0^x W = q sum_i A_i e^{zeta_i x} / zeta_i on [0, inf).
    ExpPoly z_poly() const {
        std::vector<ExpTerm> t;
        for (size_t i = 0; i < coef_.size(); ++i)
            t.push_back({q() * coef_[i] / roots_.roots[i], 0, roots_.roots[i]});
        return ExpPoly(std::move(t));
    }

    /// Z_1 = d/dv Z^(q,v) at v = 0: sum_i A_i (q/zeta_i^2 - eta/zeta_i) e^{zeta_i x}.
    ExpPoly z1_poly() const {
        double eta = net_profit(model_);
        std::vector<ExpTerm> t;
        for (size_t i = 0; i < coef_.size(); ++i) {
            double z = roots_.roots[i];
            t.push_back({coef_[i] * (q() / (z * z) - eta / z), 0, z});
        }
        return ExpPoly(std::move(t));
    }

    /// Z^(q,v) on [0, inf) for v away from every root:
    /// (psi(v) - q) sum_i A_i e^{zeta_i x} / (v - zeta_i).
    ExpPoly z_qv_poly(double v) const {
        double pv = psi(model_, v) - q();
        std::vector<ExpTerm> t;
        for (size_t i = 0; i < coef_.size(); ++i)
            t.push_back({pv * coef_[i] / (v - roots_.roots[i]), 0, roots_.roots[i]});
        return ExpPoly(std::move(t));
    }

    /// True if v is within the near-pole guard band of some root.
    bool near_root(double v) const {
        double scale = 0.0;
        for (double z : roots_.roots) scale = std::max(scale, std::abs(z));
        for (double z : roots_.roots)
            if (std::abs(v - z) < 1e-8 * std::max(1.0, scale)) return true;
        return false;
    }

private:
    RiskModel model_;
    RootSet roots_;
    std::vector<double> coef_;
};

/// W^(q)(x) and its first two derivatives; 0 on (-inf, 0).
inline double w_q(const ScaleBasis& b, double x, int deriv = 0) {
    if (x < 0.0) return 0.0;
    double s = 0.0;
    const auto& zs = b.roots().roots;
    const auto& as = b.coefficients();
    for (size_t i = 0; i < zs.size(); ++i) {
        double f = as[i];
        for (int d = 0; d < deriv; ++d) f *= zs[i];
        s += f * std::exp(zs[i] * x);
    }
    return s;
}

/// Z^(q)(x) = 1 + q int_0^x W; equals 1 for x <= 0.
inline double z_q(const ScaleBasis& b, double x, int deriv = 0) {
    if (x < 0.0) return deriv == 0 ? 1.0 : 0.0;
    if (deriv == 1) return b.q() * w_q(b, x);
    if (deriv == 2) return b.q() * w_q(b, x, 1);
    return b.z_poly().eval(x);
}

/// Z^(q,v)(x): e^{vx} for x < 0; exponential sum for x >= 0.  A near-pole
/// branch evaluates the defining integral representation term by term with
/// the stable phi kernel instead of the rational coefficients.
inline double z_qv(const ScaleBasis& b, double v, double x, int deriv = 0) {
    if (x < 0.0) {
        double base = std::exp(v * x);
        return deriv == 0 ? base : v * base;
    }
    if (deriv == 1) {
        // Z' = v Z + (q - psi(v)) W
        return v * z_qv(b, v, x, 0) + (b.q() - psi(b.model(), v)) * w_q(b, x);
    }
    if (b.near_root(v)) {
        // Z^(q,v)(x) = e^{vx} (1 + (q - psi(v)) sum_i A_i x phi_0((zeta_i - v)x))
        double s = 1.0;
        double pv = b.q() - psi(b.model(), v);
        const auto& zs = b.roots().roots;
        const auto& as = b.coefficients();
        for (size_t i = 0; i < zs.size(); ++i) {
            auto ph = phi_kernel_scaled(0, (zs[i] - v) * x);
            s += pv * as[i] * x * ph.factor * std::exp(ph.exponent);
        }
        return s * std::exp(v * x);
    }
    return b.z_qv_poly(v).eval(x);
}

/// Z_1(x) = d/dv|_{v=0+} Z^(q,v)(x); x for x < 0.
inline double z_1(const ScaleBasis& b, double x, int deriv = 0) {
    if (x < 0.0) return deriv == 0 ? x : 1.0;
    ExpPoly p = b.z1_poly();
    if (deriv == 1) p = p.derivative();
    return p.eval(x);
}

}  // namespace divband

#pragma once

#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "divband/errors.hpp"
#include "divband/exp_poly.hpp"

namespace divband {

// ============================================================================
// Risk-process model: Cramer-Lundberg family with rational Laplace exponent
// ============================================================================

struct ExponentialClaims {
    double mu;  // rate, mean 1/mu
};

struct ErlangClaims {
    int shape;  // n >= 1
    double mu;  // rate, mean n/mu
};

struct HyperExponentialClaims {
    std::vector<double> weights;  // positive, sum to 1
    std::vector<double> rates;    // positive, pairwise distinct
};

using ClaimLaw =
    std::variant<ExponentialClaims, ErlangClaims, HyperExponentialClaims>;

/// One term beta * z^pow * e^{-rate z} of the Levy density nu(z), z > 0.
struct DensityTerm {
    double beta;
    int pow;
    double rate;
};

/// Surplus process: X_t = x + p t + sigma B_t - compound Poisson(lambda) with
/// claim law C.  Immutable after construction; all queries are pure.
class RiskModel {
public:
    RiskModel(double premium_rate, double intensity, ClaimLaw claims,
              double gaussian_sq, double discount)
        : p_(premium_rate),
          lambda_(intensity),
          claims_(std::move(claims)),
          sigma2_(gaussian_sq),
          q_(discount) {
        validate();
    }

    double premium_rate() const { return p_; }
    double intensity() const { return lambda_; }
    double gaussian_sq() const { return sigma2_; }
    double discount() const { return q_; }
    const ClaimLaw& claims() const { return claims_; }
    bool bounded_variation() const { return sigma2_ == 0.0; }

    double claim_mean() const {
        return std::visit(
            [](const auto& c) -> double {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, ExponentialClaims>)
                    return 1.0 / c.mu;
                else if constexpr (std::is_same_v<T, ErlangClaims>)
                    return c.shape / c.mu;
                else {
                    double m = 0.0;
                    for (size_t k = 0; k < c.rates.size(); ++k)
                        m += c.weights[k] / c.rates[k];
                    return m;
                }
            },
            claims_);
    }

    /// Laplace transform of the claim law, L_C(theta) = E[e^{-theta C}].
    double claim_laplace(double theta) const {
        return std::visit(
            [&](const auto& c) -> double {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, ExponentialClaims>)
                    return c.mu / (c.mu + theta);
                else if constexpr (std::is_same_v<T, ErlangClaims>)
                    return std::pow(c.mu / (c.mu + theta), c.shape);
                else {
                    double s = 0.0;
                    for (size_t k = 0; k < c.rates.size(); ++k)
                        s += c.weights[k] * c.rates[k] / (c.rates[k] + theta);
                    return s;
                }
            },
            claims_);
    }

    double claim_laplace_deriv(double theta) const {
        return std::visit(
            [&](const auto& c) -> double {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, ExponentialClaims>)
                    return -c.mu / ((c.mu + theta) * (c.mu + theta));
                else if constexpr (std::is_same_v<T, ErlangClaims>)
                    return -c.shape * std::pow(c.mu, c.shape) /
                           std::pow(c.mu + theta, c.shape + 1);
                else {
                    double s = 0.0;
                    for (size_t k = 0; k < c.rates.size(); ++k)
                        s -= c.weights[k] * c.rates[k] /
                             ((c.rates[k] + theta) * (c.rates[k] + theta));
                    return s;
                }
            },
            claims_);
    }

    /// Levy density nu(z) = lambda * f_C(z) as a sum of z^k e^{-m z} terms.
    std::vector<DensityTerm> density_terms() const {
        std::vector<DensityTerm> out;
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, ExponentialClaims>) {
                    out.push_back({lambda_ * c.mu, 0, c.mu});
                } else if constexpr (std::is_same_v<T, ErlangClaims>) {
                    double coef = lambda_ * std::pow(c.mu, c.shape) /
                                  ExpPoly::factorial(c.shape - 1);
                    out.push_back({coef, c.shape - 1, c.mu});
                } else {
                    for (size_t k = 0; k < c.rates.size(); ++k)
                        out.push_back({lambda_ * c.weights[k] * c.rates[k], 0,
                                       c.rates[k]});
                }
            },
            claims_);
        return out;
    }

    /// Smallest decay rate among density terms (integrability boundary for
    /// exponential penalties).
    double min_claim_rate() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& t : density_terms()) m = std::min(m, t.rate);
        return m;
    }

private:
    double p_, lambda_;
    ClaimLaw claims_;
    double sigma2_, q_;

    void validate() const {
        if (!(p_ > 0.0)) throw InvalidModel("premium rate p must be > 0");
        if (!(lambda_ >= 0.0)) throw InvalidModel("intensity lambda must be >= 0");
        if (!(sigma2_ >= 0.0)) throw InvalidModel("sigma2 must be >= 0");
        if (!(q_ > 0.0)) throw InvalidModel("discount q must be > 0");
        std::visit(
            [](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, ExponentialClaims>) {
                    if (!(c.mu > 0.0)) throw InvalidModel("claim rate mu must be > 0");
                } else if constexpr (std::is_same_v<T, ErlangClaims>) {
                    if (c.shape < 1) throw InvalidModel("Erlang shape must be >= 1");
                    if (!(c.mu > 0.0)) throw InvalidModel("claim rate mu must be > 0");
                } else {
                    if (c.weights.empty() || c.weights.size() != c.rates.size())
                        throw InvalidModel("hyperexp weights/rates size mismatch");
                    double s = 0.0;
                    for (double w : c.weights) {
                        if (!(w > 0.0)) throw InvalidModel("hyperexp weights must be > 0");
                        s += w;
                    }
                    if (std::abs(s - 1.0) > 1e-9)
                        throw InvalidModel("hyperexp weights must sum to 1");
                    for (size_t i = 0; i < c.rates.size(); ++i) {
                        if (!(c.rates[i] > 0.0))
                            throw InvalidModel("hyperexp rates must be > 0");
                        for (size_t j = i + 1; j < c.rates.size(); ++j)
                            if (std::abs(c.rates[i] - c.rates[j]) <=
                                1e-9 * std::max(c.rates[i], c.rates[j]))
                                throw InvalidModel("hyperexp rates must be distinct");
                    }
                }
            },
            claims_);
        double eta = p_ - lambda_ * claim_mean();
        if (!(eta > 0.0))
            throw InvalidModel("net profit eta = p - lambda E[C] must be > 0");
    }
};

/// Laplace exponent psi(theta) = sigma^2 theta^2/2 + p theta + lambda(L_C - 1).
inline double psi(const RiskModel& m, double theta) {
    return 0.5 * m.gaussian_sq() * theta * theta + m.premium_rate() * theta +
           m.intensity() * (m.claim_laplace(theta) - 1.0);
}

inline double psi_deriv(const RiskModel& m, double theta) {
    return m.gaussian_sq() * theta + m.premium_rate() +
           m.intensity() * m.claim_laplace_deriv(theta);
}

/// Net profit eta = psi'(0) = p - lambda E[C].
inline double net_profit(const RiskModel& m) {
    return m.premium_rate() - m.intensity() * m.claim_mean();
}

// ============================================================================
// Roots of the Cramer-Lundberg equation psi(s) = q
// ============================================================================

/// All real roots of psi(s) = q, sorted descending.  phi_q is the unique
/// strictly positive root Phi(q).
struct RootSet {
    std::vector<double> roots;
    double phi_q = 0.0;
};

namespace detail {

/// Dense polynomial with ascending coefficients.
using Poly = std::vector<double>;

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline Poly poly_add(Poly a, const Poly& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
}

inline Poly poly_scale(Poly a, double c) {
    for (auto& x : a) x *= c;
    return a;
}

inline Poly poly_pow_linear(double c0, int n) {
    // (c0 + s)^n
    Poly r{1.0};
    Poly lin{c0, 1.0};
    for (int i = 0; i < n; ++i) r = poly_mul(r, lin);
    return r;
}

/// Durand-Kerner iteration for all complex roots of a monic polynomial.
inline std::vector<std::complex<double>> durand_kerner(const Poly& monic) {
    int n = static_cast<int>(monic.size()) - 1;
    std::vector<std::complex<double>> z(n);
    // radius bound from coefficients
    double r = 0.0;
    for (int i = 0; i < n; ++i) r = std::max(r, std::abs(monic[i]));
    r = 1.0 + r;
    std::complex<double> seed(0.4, 0.9);
    std::complex<double> w(1.0, 0.0);
    for (int i = 0; i < n; ++i) {
        w *= seed;
        z[i] = w * (r / std::abs(w)) * (0.3 + 0.7 * (i + 1.0) / n);
    }
    auto eval = [&](std::complex<double> s) {
        std::complex<double> v(monic[n], 0.0);
        for (int i = n - 1; i >= 0; --i) v = v * s + monic[i];
        return v;
    };
    for (int iter = 0; iter < 500; ++iter) {
        double shift = 0.0;
        for (int i = 0; i < n; ++i) {
            std::complex<double> denom(1.0, 0.0);
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            std::complex<double> d = eval(z[i]) / denom;
            z[i] -= d;
            shift = std::max(shift, std::abs(d));
        }
        if (shift < 1e-14 * (1.0 + r)) break;
    }
    return z;
}

}  // namespace detail

/// Builds the polynomial obtained from psi(s) - q by clearing claim-law
/// denominators, solves it, Newton-polishes each root on psi(s) - q, and
/// validates realness and separation.
inline RootSet cl_roots(const RiskModel& m) {
    using detail::Poly;
    const double q = m.discount();

    // denominator D(s) and numerator contribution of lambda * L_C(s) * D(s)
    Poly denom{1.0};
    Poly num{0.0};
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, ExponentialClaims>) {
                denom = Poly{c.mu, 1.0};
                num = Poly{m.intensity() * c.mu};
            } else if constexpr (std::is_same_v<T, ErlangClaims>) {
                denom = detail::poly_pow_linear(c.mu, c.shape);
                num = Poly{m.intensity() * std::pow(c.mu, c.shape)};
            } else {
                for (double r : c.rates)
                    denom = detail::poly_mul(denom, Poly{r, 1.0});
                num = Poly{0.0};
                for (size_t k = 0; k < c.rates.size(); ++k) {
                    Poly part{m.intensity() * c.weights[k] * c.rates[k]};
                    for (size_t j = 0; j < c.rates.size(); ++j)
                        if (j != k) part = detail::poly_mul(part, Poly{c.rates[j], 1.0});
                    num = detail::poly_add(num, part);
                }
            }
        },
        m.claims());

    // (sigma^2/2 s^2 + p s - (lambda + q)) * D(s) + num(s); without claims the
    // exponent has no poles and nothing is cleared
    Poly drift{-(m.intensity() + q), m.premium_rate(), 0.5 * m.gaussian_sq()};
    while (drift.size() > 1 && drift.back() == 0.0) drift.pop_back();
    Poly full = m.intensity() == 0.0
                    ? drift
                    : detail::poly_add(detail::poly_mul(drift, denom), num);
    while (full.size() > 1 && std::abs(full.back()) < 1e-300) full.pop_back();
    int deg = static_cast<int>(full.size()) - 1;
    if (deg < 1) throw InvalidModel("degenerate Cramer-Lundberg polynomial");

    RootSet rs;
    if (deg == 1) {
        rs.roots = {-full[0] / full[1]};
    } else {
        Poly monic = detail::poly_scale(full, 1.0 / full.back());
        auto z = detail::durand_kerner(monic);
        double zmax = 0.0;
        for (auto& c : z) zmax = std::max(zmax, std::abs(c));
        for (auto& c : z) {
            if (std::abs(c.imag()) > 1e-7 * (1.0 + zmax))
                throw ComplexRoot(
                    "psi(s) = q has a complex root pair; the scale function is "
                    "not a real exponential sum for this model");
            rs.roots.push_back(c.real());
        }
    }

    // Newton polish on psi(s) - q directly
    for (double& s : rs.roots) {
        for (int it = 0; it < 40; ++it) {
            double f = psi(m, s) - q;
            double fp = psi_deriv(m, s);
            if (fp == 0.0 || !std::isfinite(fp)) break;
            double step = f / fp;
            s -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(s))) break;
        }
    }
    std::sort(rs.roots.begin(), rs.roots.end(), std::greater<double>());

    double zscale = 0.0;
    for (double s : rs.roots) zscale = std::max(zscale, std::abs(s));
    for (size_t i = 0; i + 1 < rs.roots.size(); ++i)
        if (std::abs(rs.roots[i] - rs.roots[i + 1]) <= 1e-8 * zscale)
            throw MultipleRoot("roots of psi(s) = q coincide within tolerance");

    int n_pos = 0;
    for (double s : rs.roots)
        if (s > 0.0) ++n_pos;
    if (n_pos != 1)
        throw InvalidModel("expected exactly one strictly positive root of psi = q");
    rs.phi_q = rs.roots.front();

    // cross-check Phi(q) by bisection on (0, upper)
    double hi = 1.0;
    while (psi(m, hi) <= q) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (psi(m, mid) < q ? lo : hi) = mid;
        if (hi - lo < 1e-14 * (1.0 + hi)) break;
    }
    if (std::abs(0.5 * (lo + hi) - rs.phi_q) > 1e-6 * (1.0 + rs.phi_q))
        throw InvalidModel("positive root disagrees with bisection cross-check");

    for (double s : rs.roots) {
        double resid = std::abs(psi(m, s) - q);
        if (resid > 1e-9 * std::max(1.0, q))
            throw InvalidModel("root polish failed: |psi(root) - q| = " +
                               std::to_string(resid));
    }
    return rs;
}

}  // namespace divband

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace divband {

// ============================================================================
// Exponential-polynomial algebra
//
// Functions of the form f(t) = sum_i c_i t^{k_i} e^{r_i t} are closed under
// differentiation, integration, products, argument shifts and convolution on
// [0, t].  Everything the library computes (scale functions, Gerber-Shiu
// functions, generator remainders, Levy-measure tail integrals) lives in this
// class, so no numerical quadrature is needed outside of test oracles.
// ============================================================================

/// phi_k(z) = int_0^1 s^k e^{z s} ds, the scaled kernel of
/// int_0^x y^k e^{d y} dy = x^{k+1} phi_k(d x).  Entire in z.
inline double phi_kernel(int k, double z) {
    // the alternating series cancels catastrophically beyond |z| ~ 15, and the
    // recursions are stable there, so the series radius stays small
    if (std::abs(z) < 15.0) {
        double term = 1.0;  // z^r / r!
        double sum = 1.0 / (k + 1);
        for (int r = 1; r < 200; ++r) {
            term *= z / r;
            double add = term / (k + r + 1);
            sum += add;
            if (std::abs(add) < 1e-20 * std::abs(sum)) break;
        }
        return sum;
    }
    if (z >= 15.0) {
        // phi_k = e^z g_k with g_0 = (1 - e^{-z})/z, g_k = (1 - k g_{k-1})/z
        double g = (1.0 - std::exp(-z)) / z;
        for (int j = 1; j <= k; ++j) g = (1.0 - j * g) / z;
        return std::exp(z) * g;
    }
    // z <= -15: upward recursion, e^z is negligible against phi ~ k!/|z|^{k+1}
    double ez = std::exp(z);
    double phi = (ez - 1.0) / z;
    for (int j = 1; j <= k; ++j) phi = (ez - j * phi) / z;
    return phi;
}

/// Same as phi_kernel but returns {g, e} with phi = g * exp(e), keeping the
/// exponential factored out so callers can fold it into their own exponent.
struct ScaledPhi {
    double factor;
    double exponent;
};
inline ScaledPhi phi_kernel_scaled(int k, double z) {
    if (z >= 15.0) {
        double g = (1.0 - std::exp(-z)) / z;
        for (int j = 1; j <= k; ++j) g = (1.0 - j * g) / z;
        return {g, z};
    }
    return {phi_kernel(k, z), 0.0};
}

/// One term c * t^pow * e^{rate t}.
struct ExpTerm {
    double coef = 0.0;
    int pow = 0;
    double rate = 0.0;
};

class ExpPoly {
public:
    ExpPoly() = default;
    explicit ExpPoly(std::vector<ExpTerm> terms) : terms_(std::move(terms)) {
        canonicalize();
    }

    static ExpPoly zero() { return ExpPoly{}; }
    static ExpPoly constant(double c) { return ExpPoly({{c, 0, 0.0}}); }
    /// c * t^k e^{r t}
    static ExpPoly term(double c, int k, double r) { return ExpPoly({{c, k, r}}); }

    const std::vector<ExpTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    double operator()(double t) const { return eval(t); }

    double eval(double t) const {
        double s = 0.0;
        for (const auto& tm : terms_) s += eval_term(tm, t);
        return s;
    }

    ExpPoly derivative() const {
        std::vector<ExpTerm> out;
        out.reserve(terms_.size() * 2);
        for (const auto& tm : terms_) {
            if (tm.pow > 0) out.push_back({tm.coef * tm.pow, tm.pow - 1, tm.rate});
            if (tm.rate != 0.0) out.push_back({tm.coef * tm.rate, tm.pow, tm.rate});
        }
        return ExpPoly(std::move(out));
    }

    /// Antiderivative with F(0) = 0.
    ExpPoly antiderivative() const {
        std::vector<ExpTerm> out;
        double c0 = 0.0;  // accumulates -P(0) so that F(0) = 0
        for (const auto& tm : terms_) {
            if (tm.rate == 0.0) {
                out.push_back({tm.coef / (tm.pow + 1), tm.pow + 1, 0.0});
                continue;
            }
            build_antideriv_term(tm, out);
            c0 -= antideriv_at_zero(tm);
        }
        if (c0 != 0.0) out.push_back({c0, 0, 0.0});
        return ExpPoly(std::move(out));
    }

    /// Definite integral over [a, b]; b may be +infinity when every term
    /// decays (all rates with nonzero coefficient negative).
    double integrate(double a, double b) const {
        double s = 0.0;
        for (const auto& tm : terms_) s += integrate_term(tm, a, b);
        return s;
    }

    ExpPoly operator+(const ExpPoly& o) const {
        std::vector<ExpTerm> out = terms_;
        out.insert(out.end(), o.terms_.begin(), o.terms_.end());
        return ExpPoly(std::move(out));
    }
    ExpPoly operator-(const ExpPoly& o) const { return *this + o.scaled(-1.0); }

    ExpPoly scaled(double c) const {
        std::vector<ExpTerm> out = terms_;
        for (auto& tm : out) tm.coef *= c;
        return ExpPoly(std::move(out));
    }

    ExpPoly operator*(const ExpPoly& o) const {
        std::vector<ExpTerm> out;
        out.reserve(terms_.size() * o.terms_.size());
        for (const auto& a : terms_)
            for (const auto& b : o.terms_)
                out.push_back({a.coef * b.coef, a.pow + b.pow, a.rate + b.rate});
        return ExpPoly(std::move(out));
    }

    /// f(t + s) as a polynomial in t.
    ExpPoly shifted(double s) const {
        std::vector<ExpTerm> out;
        for (const auto& tm : terms_) {
            double base = tm.coef * std::exp(tm.rate * s);
            // (t+s)^k = sum_j C(k,j) s^{k-j} t^j
            double c = base;
            for (int j = tm.pow; j >= 0; --j) {
                out.push_back({c * binom(tm.pow, j) * int_pow(s, tm.pow - j), j,
                               tm.rate});
            }
            (void)c;
        }
        return ExpPoly(std::move(out));
    }

    /// Laplace transform int_0^infty e^{-theta t} f(t) dt; requires
    /// theta > max rate.
    double laplace(double theta) const {
        double s = 0.0;
        for (const auto& tm : terms_) {
            double d = theta - tm.rate;
            s += tm.coef * factorial(tm.pow) / std::pow(d, tm.pow + 1);
        }
        return s;
    }

    double max_rate() const {
        double r = -std::numeric_limits<double>::infinity();
        for (const auto& tm : terms_) r = std::max(r, tm.rate);
        return r;
    }

    static double binom(int n, int k) {
        double r = 1.0;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    }
    static double factorial(int n) {
        double r = 1.0;
        for (int i = 2; i <= n; ++i) r *= i;
        return r;
    }

private:
    std::vector<ExpTerm> terms_;

    static double int_pow(double x, int k) {
        double r = 1.0;
        for (int i = 0; i < k; ++i) r *= x;
        return r;
    }

    static double eval_term(const ExpTerm& tm, double t) {
        double arg = tm.rate * t;
        if (tm.pow == 0) {
            if (arg < -745.0) return 0.0;
            return tm.coef * std::exp(arg);
        }
        // log-space assembly for large magnitudes to avoid intermediate
        // overflow of t^k
        double tp;
        if (t == 0.0) return 0.0;
        double lk = tm.pow * std::log(std::abs(t));
        if (lk + arg < -745.0) return 0.0;
        if (lk > 300.0 || arg > 300.0 || lk + arg > 300.0) {
            double sign = (tm.coef < 0 ? -1.0 : 1.0);
            if (t < 0 && (tm.pow % 2)) sign = -sign;
            return sign * std::exp(std::log(std::abs(tm.coef)) + lk + arg);
        }
        tp = int_pow(t, tm.pow);
        return tm.coef * tp * std::exp(arg);
    }

    static void build_antideriv_term(const ExpTerm& tm, std::vector<ExpTerm>& out) {
        // int t^k e^{rt} dt = e^{rt} * sum_{i=0}^{k} a_i t^i with
        // a_k = 1/r, a_{i} = -(i+1) a_{i+1} / r
        double a = 1.0 / tm.rate;
        out.push_back({tm.coef * a, tm.pow, tm.rate});
        for (int i = tm.pow - 1; i >= 0; --i) {
            a = -a * (i + 1) / tm.rate;
            out.push_back({tm.coef * a, i, tm.rate});
        }
    }

    static double antideriv_at_zero(const ExpTerm& tm) {
        if (tm.rate == 0.0) return 0.0;
        double a = 1.0 / tm.rate;
        for (int i = tm.pow - 1; i >= 0; --i) a = -a * (i + 1) / tm.rate;
        return tm.coef * a;  // value of the antiderivative terms at t = 0
    }

    static double integrate_term(const ExpTerm& tm, double a, double b) {
        if (tm.rate == 0.0) {
            double hi = int_pow(b, tm.pow + 1) / (tm.pow + 1);
            double lo = int_pow(a, tm.pow + 1) / (tm.pow + 1);
            return tm.coef * (hi - lo);
        }
        bool binf = std::isinf(b);
        if (binf && tm.rate >= 0.0 && tm.coef != 0.0)
            return std::numeric_limits<double>::infinity();
        // primitive e^{rt} P(t)
        auto prim = [&](double t) {
            double acc = 0.0;
            double c = 1.0 / tm.rate;
            acc += c * int_pow(t, tm.pow);
            for (int i = tm.pow - 1; i >= 0; --i) {
                c = -c * (i + 1) / tm.rate;
                acc += c * int_pow(t, i);
            }
            double arg = tm.rate * t;
            if (arg < -745.0) return 0.0;
            return acc * std::exp(arg);
        };
        double hi = binf ? 0.0 : prim(b);
        return tm.coef * (hi - prim(a));
    }

    void canonicalize() {
        std::vector<ExpTerm> keep;
        keep.reserve(terms_.size());
        for (const auto& tm : terms_)
            if (tm.coef != 0.0 && std::isfinite(tm.coef)) keep.push_back(tm);
        std::sort(keep.begin(), keep.end(), [](const ExpTerm& a, const ExpTerm& b) {
            if (a.rate != b.rate) return a.rate < b.rate;
            return a.pow < b.pow;
        });
        std::vector<ExpTerm> merged;
        for (const auto& tm : keep) {
            if (!merged.empty() && merged.back().pow == tm.pow &&
                same_rate(merged.back().rate, tm.rate)) {
                merged.back().coef += tm.coef;
            } else {
                merged.push_back(tm);
            }
        }
        std::vector<ExpTerm> out;
        for (const auto& tm : merged)
            if (tm.coef != 0.0 && std::abs(tm.coef) > 1e-300) out.push_back(tm);
        terms_ = std::move(out);
    }

    static bool same_rate(double a, double b) {
        return std::abs(a - b) <= 1e-13 * (1.0 + std::max(std::abs(a), std::abs(b)));
    }
};

/// int_0^x y^k e^{d y} dy as an ExpPoly in x.  `span` is the largest |x| the
/// result will be evaluated at; it selects between the exact antiderivative
/// form and a truncated power series when |d*span| is small enough that the
/// antiderivative form would cancel catastrophically.
inline ExpPoly integral_pow_exp(int k, double d, double span) {
    if (std::abs(d) * span < 0.75) {
        // series sum_{r>=0} d^r x^{k+1+r} / (r! (k+1+r)), truncated where the
        // tail is below 1e-19 relative on [0, span]
        std::vector<ExpTerm> out;
        double c = 1.0;  // d^r / r!
        for (int r = 0; r < 64; ++r) {
            out.push_back({c / (k + 1 + r), k + 1 + r, 0.0});
            c *= d / (r + 1);
            if (std::abs(c) * std::pow(span, r + 1) < 1e-19) break;
        }
        return ExpPoly(std::move(out));
    }
    std::vector<ExpTerm> out;
    long double a = 1.0L / d;
    std::vector<long double> coefs(k + 1);
    coefs[k] = a;
    for (int i = k - 1; i >= 0; --i) coefs[i] = -coefs[i + 1] * (i + 1) / d;
    for (int i = 0; i <= k; ++i)
        out.push_back({static_cast<double>(coefs[i]), i, d});
    out.push_back({static_cast<double>(-coefs[0]), 0, 0.0});
    return ExpPoly(std::move(out));
}

/// Convolution (f * g)(x) = int_0^x f(x-y) g(y) dy for f with polynomial
/// degree zero in every term (pure exponential sums, e.g. scale functions).
/// `span` bounds the evaluation range of the result.
inline ExpPoly convolve_expsum(const ExpPoly& f, const ExpPoly& g, double span) {
    ExpPoly acc;
    for (const auto& a : f.terms()) {
        // a.pow must be 0; callers pass exponential sums only
        for (const auto& b : g.terms()) {
            // int_0^x e^{za(x-y)} y^n e^{zb y} dy = e^{za x} * I(x),
            // I = integral_pow_exp(n, zb-za)
            ExpPoly inner = integral_pow_exp(b.pow, b.rate - a.rate, span);
            ExpPoly outer = ExpPoly::term(a.coef * b.coef, 0, a.rate) * inner;
            acc = acc + outer;
        }
    }
    return acc;
}

}  // namespace divband

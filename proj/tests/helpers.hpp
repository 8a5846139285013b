#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "divband/model.hpp"
#include "divband/penalty.hpp"

namespace testutil {

using namespace divband;

/// Erlang(2) benchmark of Azcue and Muler: p = 107/5, lambda = 10, mu = 1,
/// q = 1/10.
inline RiskModel azcue_muler() {
    return RiskModel(21.4, 10.0, ErlangClaims{2, 1.0}, 0.0, 0.1);
}

/// Small exponential-claims model used across the closed-form checks.
inline RiskModel exp_model(double p = 1.5, double lambda = 1.0, double mu = 1.0,
                           double q = 0.1) {
    return RiskModel(p, lambda, ExponentialClaims{mu}, 0.0, q);
}

inline RiskModel hyperexp_model() {
    return RiskModel(2.0, 1.0, HyperExponentialClaims{{0.4, 0.6}, {1.0, 3.0}},
                     0.0, 0.1);
}

/// Composite Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int n = 2000) {
    if (n % 2) ++n;
    double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Adaptive Simpson with absolute tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-10, int depth = 24) {
    std::function<double(double, double, double, double, double, double, int)>
        rec = [&](double lo, double hi, double flo, double fmid, double fhi,
                  double whole, int d) -> double {
        double mid = 0.5 * (lo + hi);
        double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
        double fl = f(lmid), fr = f(rmid);
        double left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid);
        double right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, fl, fmid, left, d - 1) +
               rec(mid, hi, fmid, fr, fhi, right, d - 1);
    };
    double mid = 0.5 * (a + b);
    double fa = f(a), fm = f(mid), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(a, b, fa, fm, fb, whole, depth);
}

/// Levy density as a plain callable (oracle-side evaluation).
inline std::function<double(double)> density_fn(const RiskModel& m) {
    auto terms = m.density_terms();
    return [terms](double z) {
        double s = 0.0;
        for (const auto& t : terms) s += t.beta * std::pow(z, t.pow) * std::exp(-t.rate * z);
        return s;
    };
}

/// Deterministic uniform draws for hand-rolled property tests.
class Gen {
public:
    explicit Gen(unsigned seed) : rng_(seed) {}
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng_);
    }
    int integer(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng_);
    }

private:
    std::mt19937 rng_;
};

}  // namespace testutil

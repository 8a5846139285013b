#pragma once

#include <cmath>
#include <variant>

#include "divband/errors.hpp"
#include "divband/exp_poly.hpp"
#include "divband/model.hpp"

namespace divband {

// ============================================================================
// Ruin penalties w : (-inf, 0] -> (-inf, 0], increasing
// ============================================================================

struct ZeroPenalty {};

/// w(x) = c x + c0 with slope c >= 0 and intercept c0 <= 0.
struct AffinePenalty {
    double c = 0.0;
    double c0 = 0.0;
};

/// w(x) = c e^{v x} with c <= 0 and exponent v <= 0; admissible for claim
/// laws with smallest rate mu_min when v > -mu_min.
struct ExponentialPenalty {
    double c = 0.0;
    double v = 0.0;
};

class Penalty {
public:
    using Kind = std::variant<ZeroPenalty, AffinePenalty, ExponentialPenalty>;

    Penalty() : kind_(ZeroPenalty{}) {}
    Penalty(Kind kind) : kind_(std::move(kind)) { validate(); }

    static Penalty zero() { return Penalty(ZeroPenalty{}); }
    static Penalty affine(double c, double c0) { return Penalty(AffinePenalty{c, c0}); }
    static Penalty exponential(double c, double v) {
        return Penalty(ExponentialPenalty{c, v});
    }

    const Kind& kind() const { return kind_; }
    bool is_zero() const { return std::holds_alternative<ZeroPenalty>(kind_); }

    /// w(x) for x <= 0 (evaluates the defining formula for any x).
    double value(double x) const {
        return std::visit(
            [&](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, ZeroPenalty>)
                    return 0.0;
                else if constexpr (std::is_same_v<T, AffinePenalty>)
                    return k.c * x + k.c0;
                else
                    return k.c * std::exp(k.v * x);
            },
            kind_);
    }

    double deriv(double x, int order = 1) const {
        return std::visit(
            [&](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, ZeroPenalty>)
                    return 0.0;
                else if constexpr (std::is_same_v<T, AffinePenalty>)
                    return order == 1 ? k.c : 0.0;
                else {
                    double f = k.c * std::exp(k.v * x);
                    for (int i = 0; i < order; ++i) f *= k.v;
                    return f;
                }
            },
            kind_);
    }

    /// Left derivative w'_-(0).
    double slope_at_zero() const { return deriv(0.0); }

    /// The penalty as an ExpPoly in x (valid formula on (-inf, 0]).
    ExpPoly to_poly() const {
        return std::visit(
            [](const auto& k) -> ExpPoly {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, ZeroPenalty>)
                    return ExpPoly::zero();
                else if constexpr (std::is_same_v<T, AffinePenalty>)
                    return ExpPoly({{k.c, 1, 0.0}, {k.c0, 0, 0.0}});
                else
                    return ExpPoly::term(k.c, 0, k.v);
            },
            kind_);
    }

    /// Checks the integrability condition against a claim law: exponential
    /// penalties need v > -mu_min so e^{-v z} is nu-integrable.
    void check_admissible(const RiskModel& m) const {
        if (const auto* e = std::get_if<ExponentialPenalty>(&kind_)) {
            double mu_min = m.min_claim_rate();
            if (!(e->v > -mu_min))
                throw DomainError(
                    "exponential penalty exponent v must exceed -mu_min for "
                    "integrability");
        }
    }

private:
    Kind kind_;

    void validate() const {
        if (const auto* a = std::get_if<AffinePenalty>(&kind_)) {
            if (!(a->c >= 0.0)) throw DomainError("affine penalty slope c must be >= 0");
            if (!(a->c0 <= 0.0))
                throw DomainError("affine penalty intercept c0 must be <= 0");
        } else if (const auto* e = std::get_if<ExponentialPenalty>(&kind_)) {
            if (!(e->c <= 0.0))
                throw DomainError("exponential penalty coefficient c must be <= 0");
            if (!(e->v <= 0.0))
                throw DomainError("exponential penalty exponent v must be <= 0");
        }
    }
};

}  // namespace divband

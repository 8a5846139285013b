#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "divband/errors.hpp"

namespace divband {

/// One dividend band: continuation interval [a, b_plus], with reserves cut to
/// b_minus when they reach b_plus (reflection when b_minus == b_plus and
/// K == 0).  `stopping` marks a band found through the no-dividend stopping
/// branch of the fixed-cost solver, whose influence constant is normalized
/// differently during assembly.
struct Band {
    double a = 0.0;
    double b_minus = 0.0;
    double b_plus = 0.0;
    bool stopping = false;
};

/// Candidate optimal band levels produced by the recursion, plus the final
/// generator-test diagnostics.
struct CandidateLevels {
    std::vector<Band> bands;
    bool converged = false;
    double generator_margin = 0.0;  // max J over the verification grid
    double worst_x = 0.0;           // location of the maximum
    int iterations = 0;

    /// a_1 = 0 <= b_1+ < a_2 <= b_2+ < ... and b_i- <= b_i+.
    void validate(double K) const {
        if (bands.empty()) throw DomainError("strategy must have at least one band");
        if (bands.front().a != 0.0)
            throw DomainError("first band must start at a_1 = 0");
        double prev_top = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < bands.size(); ++i) {
            const Band& b = bands[i];
            if (!(b.a <= b.b_plus))
                throw DomainError("band requires a <= b_plus");
            if (!(b.b_minus <= b.b_plus) || b.b_minus < 0.0)
                throw DomainError("band requires 0 <= b_minus <= b_plus");
            if (K > 0.0 && !b.stopping && !(b.b_minus < b.b_plus))
                throw DomainError("K > 0 requires b_minus < b_plus");
            if (K == 0.0 && b.b_minus != b.b_plus)
                throw DomainError("K = 0 bands reflect, requiring b_minus == b_plus");
            if (i > 0 && !(prev_top < b.a))
                throw DomainError("bands must satisfy b_i+ < a_{i+1}");
            prev_top = b.b_plus;
        }
    }
};

}  // namespace divband

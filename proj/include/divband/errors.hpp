#pragma once

#include <stdexcept>
#include <string>

namespace divband {

/// Base class for all library errors. The name of the concrete error is
/// prefixed to the message so CLI output can surface it directly.
class Error : public std::runtime_error {
public:
    Error(const std::string& name, const std::string& msg)
        : std::runtime_error(name + ": " + msg), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Model parameters violate an invariant (nonpositive rates, eta <= 0, ...).
struct InvalidModel : Error {
    explicit InvalidModel(const std::string& msg) : Error("InvalidModel", msg) {}
};

/// Two roots of the Cramer-Lundberg equation coincide within tolerance, so
/// the partial-fraction representation of the scale function is invalid.
struct MultipleRoot : Error {
    explicit MultipleRoot(const std::string& msg) : Error("MultipleRoot", msg) {}
};

/// The cleared polynomial has a complex-conjugate root pair; the scale
/// function is then not a sum of real exponentials and is not representable.
struct ComplexRoot : Error {
    explicit ComplexRoot(const std::string& msg) : Error("ComplexRoot", msg) {}
};

/// An argument lies outside the domain of the requested operation.
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error("DomainError", msg) {}
};

/// Assembled value function fails continuity at a knot beyond tolerance.
struct KnotMismatch : Error {
    explicit KnotMismatch(const std::string& msg) : Error("KnotMismatch", msg) {}
};

/// The two-band solver found no level at which a further band improves the
/// value, contradicting a failed generator test.
struct NoSecondBand : Error {
    explicit NoSecondBand(const std::string& msg) : Error("NoSecondBand", msg) {}
};

/// The band recursion did not terminate within the band cap.
struct IterationCapExceeded : Error {
    explicit IterationCapExceeded(const std::string& msg)
        : Error("IterationCapExceeded", msg) {}
};

/// Simulation requested for a model outside the simulator's class.
struct UnsupportedModel : Error {
    explicit UnsupportedModel(const std::string& msg)
        : Error("UnsupportedModel", msg) {}
};

/// Malformed input file or flag combination.
struct InputError : Error {
    explicit InputError(const std::string& msg) : Error("InputError", msg) {}
};

}  // namespace divband

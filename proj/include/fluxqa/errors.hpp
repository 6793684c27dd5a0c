#pragma once

// Error taxonomy for the flux-qubit annealing simulator. Every failure mode
// carries the pipeline stage it was raised in so the CLI can report
// "stage: message" and exit nonzero.

#include <stdexcept>
#include <string>

namespace fluxqa {

class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& msg)
        : std::runtime_error(stage + ": " + msg), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

#define FLUXQA_DEFINE_ERROR(NAME)                                 \
    class NAME : public Error {                                   \
    public:                                                       \
        NAME(const std::string& stage, const std::string& msg)    \
            : Error(stage, msg) {}                                \
    }

FLUXQA_DEFINE_ERROR(MissingTableError);      // persistent-current table required but absent
FLUXQA_DEFINE_ERROR(DivisionByZeroError);    // C-shunt bias rule with vanishing current
FLUXQA_DEFINE_ERROR(NonFiniteValueError);    // potential evaluated to NaN/inf on a mesh node
FLUXQA_DEFINE_ERROR(DimensionOverflowError); // two-qubit mesh exceeds configured cap
FLUXQA_DEFINE_ERROR(NoConvergenceError);     // eigensolver iteration budget exhausted
FLUXQA_DEFINE_ERROR(DegenerateSubspaceError);// tracked levels closer than threshold
FLUXQA_DEFINE_ERROR(AmbiguousOverlapError);  // gauge tracking lost between grid points
FLUXQA_DEFINE_ERROR(ZeroCurrentError);       // persistent-current basis undefined
FLUXQA_DEFINE_ERROR(UndefinedAngleError);    // single-qubit rotation with A = B = 0
FLUXQA_DEFINE_ERROR(ModelDegeneracyError);   // Ising model Hamiltonian nearly degenerate
FLUXQA_DEFINE_ERROR(StepFailureError);       // ODE step size underflow
FLUXQA_DEFINE_ERROR(MismatchedRunsError);    // fidelity between incompatible trajectories
FLUXQA_DEFINE_ERROR(ParseError);             // config file unreadable
FLUXQA_DEFINE_ERROR(ValidationError);        // config value rejected
FLUXQA_DEFINE_ERROR(BadDimensionError);      // Pauli decomposition of a non 2^n matrix
FLUXQA_DEFINE_ERROR(ZeroGapError);           // closed-form g^y with vanishing gap

#undef FLUXQA_DEFINE_ERROR

// AmbiguousOverlapError sites also need the offending interval so the sweep
// driver can bisect it; carried separately to keep the what() readable.
struct OverlapFailure {
    std::size_t interval = 0;  // between grid index `interval` and `interval+1`
    double overlap = 0.0;
};

class AmbiguousOverlapAt : public AmbiguousOverlapError {
public:
    AmbiguousOverlapAt(const std::string& stage, const std::string& msg, OverlapFailure where)
        : AmbiguousOverlapError(stage, msg), where_(where) {}
    const OverlapFailure& where() const noexcept { return where_; }

private:
    OverlapFailure where_;
};

}  // namespace fluxqa

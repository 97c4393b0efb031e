#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pluridyn {

using cplx = std::complex<double>;

// Default projective identification tolerance (configurable per call site).
inline constexpr double kEpsProj = 1e-10;

// ---- error taxonomy ------------------------------------------------------
// Every module throws a subclass of Error; the CLI maps them to exit codes
// and structured stderr lines.

struct Error : std::runtime_error {
    Error(std::string module_, std::string code_, const std::string& detail)
        : std::runtime_error(module_ + "/" + code_ + ": " + detail),
          module(std::move(module_)), code(std::move(code_)) {}
    std::string module;
    std::string code;
};

#define PLURIDYN_ERROR(NAME, MODULE)                                          \
    struct NAME : Error {                                                     \
        explicit NAME(const std::string& detail)                              \
            : Error(MODULE, #NAME, detail) {}                                 \
    }

PLURIDYN_ERROR(ZeroVector, "projective");
PLURIDYN_ERROR(PointInCenter, "projective");
PLURIDYN_ERROR(WrongDimension, "currents");
PLURIDYN_ERROR(DegenerateMap, "endomorphism");
PLURIDYN_ERROR(SolverFailure, "endomorphism");
PLURIDYN_ERROR(CriticalValue, "endomorphism");
PLURIDYN_ERROR(RefinementBudgetExceeded, "currents");
PLURIDYN_ERROR(ThetaOutOfDomain, "currents");
PLURIDYN_ERROR(DegenerateFit, "currents");
PLURIDYN_ERROR(TrappingViolated, "attractor");
PLURIDYN_ERROR(NonConvergence, "attractor");
PLURIDYN_ERROR(CenterOnCurve, "green");
PLURIDYN_ERROR(ResultantOverflow, "algebraic");
PLURIDYN_ERROR(PrecisionExhausted, "algebraic");
PLURIDYN_ERROR(CommonComponent, "algebraic");
PLURIDYN_ERROR(ParseError, "io");

#undef PLURIDYN_ERROR

// FNV-1a, used for content hashes embedded in reports and sidecars.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s) {
    return fnv1a(s.data(), s.size());
}

std::string hex64(std::uint64_t v);

} // namespace pluridyn

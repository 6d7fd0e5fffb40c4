#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pfscale::bench {

enum class Subject { FixedPointPF, ConstAdmittancePF, ImplicitJacobianSolve, YbusSolve, UpsilonSolve };

inline constexpr Subject kAllSubjects[] = {Subject::FixedPointPF, Subject::ConstAdmittancePF,
                                           Subject::ImplicitJacobianSolve, Subject::YbusSolve,
                                           Subject::UpsilonSolve};

/// Command-line spelling.
inline std::string_view to_string(Subject s) {
    switch (s) {
        case Subject::FixedPointPF:
            return "fixed-point";
        case Subject::ConstAdmittancePF:
            return "const-admittance";
        case Subject::ImplicitJacobianSolve:
            return "implicit-jacobian";
        case Subject::YbusSolve:
            return "ybus";
        case Subject::UpsilonSolve:
            return "upsilon";
    }
    return "?";
}

inline std::optional<Subject> parse_subject(std::string_view text) {
    for (const Subject s : kAllSubjects) {
        if (to_string(s) == text) {
            return s;
        }
    }
    return std::nullopt;
}

/// Subjects whose time is reported per iteration.
inline bool per_iteration(Subject s) { return s == Subject::FixedPointPF; }

/// One timed run. t_seconds covers the whole timed section (all iterations
/// for FixedPointPF); it is 0 on the single row emitted for a failed case.
struct BenchSample {
    std::string case_id;
    Subject subject = Subject::YbusSolve;
    std::int64_t n = 0;
    std::int64_t nnz = 0;
    int run_index = 0;
    double t_seconds = 0.0;
    int iterations = 1;
    bool failed = false;
};

}  // namespace pfscale::bench

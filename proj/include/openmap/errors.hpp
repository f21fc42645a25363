#ifndef OPENMAP_ERRORS_HPP
#define OPENMAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace openmap {

// Every failure mode the library reports. Errors tagged `input` come from bad
// arguments or configuration (CLI exit code 2); the rest are numerical
// failures (exit code 3).
enum class ErrorKind {
    DomainError,           // input
    BadConfig,             // input
    NoRoot,                // input (bracket has no sign change)
    NotMinimal,
    NotRepelling,
    NotEventuallyPeriodic,
    DegeneratePartition,
    BadDomain,
    CapTooSmall,
    NoChains,
    HoleTooSmall,
    NoConvergence,
    TooFewSurvivors,
    InsufficientHorizon,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

    bool is_input_error() const {
        return kind_ == ErrorKind::DomainError || kind_ == ErrorKind::BadConfig ||
               kind_ == ErrorKind::NoRoot;
    }

  private:
    ErrorKind kind_;

  public:
    static const char* kind_name(ErrorKind k) {
        switch (k) {
            case ErrorKind::DomainError: return "DomainError";
            case ErrorKind::BadConfig: return "BadConfig";
            case ErrorKind::NoRoot: return "NoRoot";
            case ErrorKind::NotMinimal: return "NotMinimal";
            case ErrorKind::NotRepelling: return "NotRepelling";
            case ErrorKind::NotEventuallyPeriodic: return "NotEventuallyPeriodic";
            case ErrorKind::DegeneratePartition: return "DegeneratePartition";
            case ErrorKind::BadDomain: return "BadDomain";
            case ErrorKind::CapTooSmall: return "CapTooSmall";
            case ErrorKind::NoChains: return "NoChains";
            case ErrorKind::HoleTooSmall: return "HoleTooSmall";
            case ErrorKind::NoConvergence: return "NoConvergence";
            case ErrorKind::TooFewSurvivors: return "TooFewSurvivors";
            case ErrorKind::InsufficientHorizon: return "InsufficientHorizon";
        }
        return "Unknown";
    }
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) {
    throw Error(kind, std::string(Error::kind_name(kind)) + ": " + msg);
}

}  // namespace openmap

#endif

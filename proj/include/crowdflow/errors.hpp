#pragma once

#include <stdexcept>
#include <string>

namespace crowdflow {

// Error categories map one-to-one onto CLI exit codes (see runner.hpp).
enum class ErrorCategory {
    Usage,      // bad command line
    Parse,      // malformed config text
    Config,     // well-formed but invalid configuration
    Io,         // missing or unwritable files
    Solver,     // iteration failed to converge / stability monitor tripped
    Numerical,  // NaN or Inf produced
};

inline const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Usage: return "usage";
        case ErrorCategory::Parse: return "parse";
        case ErrorCategory::Config: return "config";
        case ErrorCategory::Io: return "io";
        case ErrorCategory::Solver: return "solver";
        case ErrorCategory::Numerical: return "numerical";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& msg)
        : std::runtime_error(std::string(to_string(cat)) + " error: " + msg), cat_(cat) {}
    ErrorCategory category() const { return cat_; }

private:
    ErrorCategory cat_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& m) : Error(ErrorCategory::Usage, m) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error(ErrorCategory::Parse, m) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorCategory::Config, m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorCategory::Io, m) {}
};
struct SolverError : Error {
    explicit SolverError(const std::string& m) : Error(ErrorCategory::Solver, m) {}
};
struct NumericalError : Error {
    explicit NumericalError(const std::string& m) : Error(ErrorCategory::Numerical, m) {}
};

inline void ensure(bool cond, ErrorCategory cat, const std::string& msg) {
    if (!cond) throw Error(cat, msg);
}

}  // namespace crowdflow

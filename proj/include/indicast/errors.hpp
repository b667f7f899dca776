#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace indicast {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;

    /// Short machine-readable tag, used in result tables ("FAIL(<code>)").
    virtual std::string code() const { return "error"; }
};

#define INDICAST_DEFINE_ERROR(Name, Code)                          \
    class Name : public Error {                                    \
    public:                                                        \
        using Error::Error;                                        \
        std::string code() const override { return Code; }         \
    };

INDICAST_DEFINE_ERROR(ContractViolation, "contract")
INDICAST_DEFINE_ERROR(DegenerateRange, "degenerate_range")
INDICAST_DEFINE_ERROR(UndefinedCorrelation, "undefined_correlation")
INDICAST_DEFINE_ERROR(MissingValue, "missing_value")
INDICAST_DEFINE_ERROR(InsufficientData, "insufficient_data")
INDICAST_DEFINE_ERROR(UnknownId, "unknown_id")
INDICAST_DEFINE_ERROR(ParseError, "parse")
INDICAST_DEFINE_ERROR(IoError, "io")
INDICAST_DEFINE_ERROR(NotCached, "not_cached")
INDICAST_DEFINE_ERROR(NetworkError, "network")
INDICAST_DEFINE_ERROR(ConfigError, "config")
INDICAST_DEFINE_ERROR(SelectionFailure, "selection")

#undef INDICAST_DEFINE_ERROR

/// Raised when an iterative solver exhausts its budget. Carries the best
/// point it reached so callers can inspect or accept it.
class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, std::vector<double> best_point,
                       double best_value)
        : Error(what), best_point_(std::move(best_point)), best_value_(best_value) {}

    std::string code() const override { return "convergence"; }
    const std::vector<double>& best_point() const noexcept { return best_point_; }
    double best_value() const noexcept { return best_value_; }

private:
    std::vector<double> best_point_;
    double best_value_;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractViolation(message);
}

}  // namespace indicast

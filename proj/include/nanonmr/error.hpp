#pragma once

#include <stdexcept>
#include <string>

namespace nanonmr {

enum class ErrorKind {
    InvalidGeometry,
    Singularity,
    Domain,
    Accuracy,
    ScanResolution,
    UndefinedRatio,
    GridCoverage,
    FitFailure,
    ConfigSyntax,
    ConfigSemantic,
    ConfigUnits,
    Io,
    Series,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Raised when a quadrature does not reach its tolerance; carries the best
// value found so callers may still use it.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& message, double best, double error_estimate)
        : Error(ErrorKind::Accuracy, message), best_(best), estimate_(error_estimate) {}
    double best_value() const noexcept { return best_; }
    double error_estimate() const noexcept { return estimate_; }

private:
    double best_;
    double estimate_;
};

}  // namespace nanonmr

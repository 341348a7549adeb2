#pragma once

#include <stdexcept>
#include <string>

namespace mgeo {

/// Base class for all engine errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Chart point outside the declared domain box.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation produced a non-finite value (singular chart, pole hit, ...).
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Scalar-function domain violation (log/sqrt of nonpositive, divide by zero).
class EvalDomainError : public Error {
public:
    using Error::Error;
};

/// Induced metric fails the immersion check at a point.
class DegenerateMetricError : public Error {
public:
    using Error::Error;
};

/// Normal-space completion could not find enough independent directions.
class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

/// rho^2 below the umbilic threshold; Moebius invariants undefined here.
class UmbilicError : public Error {
public:
    using Error::Error;
};

/// Shape-operator family does not commute at tolerance (normal bundle not flat).
class NonCommutingError : public Error {
public:
    using Error::Error;
};

/// Two spectral clusters too close to separate at tolerance.
class ClusterAmbiguityError : public Error {
public:
    using Error::Error;
};

/// Two independent computation routes for the same tensor disagree.
class CrossCheckError : public Error {
public:
    using Error::Error;
};

/// Pairwise criterion and tensor verdicts disagree (tolerance miscalibration).
class VerdictDisagreementError : public Error {
public:
    using Error::Error;
};

/// Syntax error with byte offset and expectation set.
class ParseError : public Error {
public:
    ParseError(const std::string& what, size_t offset)
        : Error(what), offset_(offset) {}
    size_t offset() const { return offset_; }

private:
    size_t offset_;
};

/// Invalid run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace mgeo

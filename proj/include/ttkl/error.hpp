#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ttkl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergent : public Error {
public:
    using Error::Error;
};

class DomainMismatch : public Error {
public:
    using Error::Error;
};

class BlockMismatch : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class InvalidGeometry : public Error {
public:
    using Error::Error;
};

/// Every initial sample of the target evaluated to zero.
class AllZero : public Error {
public:
    using Error::Error;
};

class SingularCrossMatrix : public Error {
public:
    SingularCrossMatrix(std::size_t dimension, double condition)
        : Error("cross matrix of dimension " + std::to_string(dimension)
                + " is singular (condition estimate " + std::to_string(condition) + ")"),
          dimension_(dimension), condition_(condition) {}

    std::size_t dimension() const { return dimension_; }
    double condition() const { return condition_; }

private:
    std::size_t dimension_;
    double condition_;
};

class ZeroReference : public Error {
public:
    using Error::Error;
};

class QuadratureNotConverged : public Error {
public:
    using Error::Error;
};

class NoneRetained : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class StageFailed : public Error {
public:
    StageFailed(std::string stage, const std::string& what)
        : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

} // namespace ttkl

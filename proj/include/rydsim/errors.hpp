#pragma once

#include <stdexcept>
#include <string>

namespace rydsim {

// Exit-code taxonomy shared by the library and the CLI:
//   0 ok, 2 validation, 3 resource, 4 numeric/convergence.
class Error : public std::runtime_error {
public:
    Error(std::string msg, int exit_code)
        : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg, 2) {}
};

// Input shapes/lengths that do not match (basis vs state, config length, ...).
class ShapeError : public ValidationError {
public:
    explicit ShapeError(const std::string& msg) : ValidationError(msg) {}
};

class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& msg) : Error(msg, 3) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg, 4) {}
};

class ConvergenceError : public NumericError {
public:
    explicit ConvergenceError(const std::string& msg) : NumericError(msg) {}
};

class AccuracyError : public NumericError {
public:
    explicit AccuracyError(const std::string& msg) : NumericError(msg) {}
};

class SingularityError : public NumericError {
public:
    explicit SingularityError(const std::string& msg) : NumericError(msg) {}
};

class DegeneracyError : public NumericError {
public:
    explicit DegeneracyError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace rydsim

#pragma once

#include <stdexcept>
#include <string>

namespace rsf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad parameters or inputs. The CLI maps these to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    NumericalError(const std::string& what, long step = -1);
    long step() const noexcept { return step_; }
    // Same step, message prefixed with context such as a symbol or sample id.
    NumericalError annotated(const std::string& context) const;

private:
    struct Verbatim {};
    NumericalError(Verbatim, const std::string& msg, long step) : Error(msg), step_(step) {}
    long step_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rsf

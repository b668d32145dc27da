#pragma once

#include <stdexcept>
#include <string>

namespace critlab {

// Error taxonomy. The CLI maps categories to exit codes, so every throw site
// picks the category deliberately:
//   Config  - bad user input (descriptors, ranges, file formats)
//   Precondition - a documented operation precondition does not hold
//                  (non-coercive operator, inadmissible field, no bracket)
//   Numeric - a well-posed computation failed to converge or went singular
//   Resource - configured limits exceeded
enum class ErrorKind { Config, Precondition, Numeric, Resource };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& what) : Error(ErrorKind::Precondition, what) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};
struct ResourceError : Error {
    explicit ResourceError(const std::string& what) : Error(ErrorKind::Resource, what) {}
};

}  // namespace critlab

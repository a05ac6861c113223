#ifndef LSV_ERRORS_HPP
#define LSV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lsv {

// Base class for all errors raised by the library. The `module` tag names
// the subsystem that detected the problem so the CLI can report it.
class error : public std::runtime_error {
public:
    error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

// Invalid argument or configuration value.
class config_error : public error {
public:
    using error::error;
};

// A computation exceeded its configured resource cap (interval counts,
// return-time caps, ...). Distinct from config_error: the request was legal
// but too expensive under the current budget.
class budget_error : public error {
public:
    using error::error;
};

// A particle ensemble lost its last survivor before the requested time.
class extinction_error : public error {
public:
    using error::error;
};

// Surviving mass fell below the smallest representable magnitude; the
// system is in the exponential-escape regime and the representation is
// exhausted.
class underflow_error : public error {
public:
    using error::error;
};

// Internal numerical failure (root finder did not converge, etc.).
class numeric_error : public error {
public:
    using error::error;
};

} // namespace lsv

#endif

#pragma once

#include <stdexcept>
#include <string>

namespace ncricci {

// Every error carries the module it originated in so the CLI can report provenance.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

// Bad user input: malformed config, violated preconditions on supplied data.
class InputError : public Error {
public:
    using Error::Error;
};

// A numerical check exceeded its configured tolerance.
class ToleranceError : public Error {
public:
    using Error::Error;
};

}  // namespace ncricci

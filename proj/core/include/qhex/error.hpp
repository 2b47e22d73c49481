#ifndef QHEX_ERROR_HPP
#define QHEX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qhex {

// Domain/validation failures: bad inputs, broken invariants, format mismatches.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem and stream failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training blew up (non-finite or runaway loss).
class DivergedError : public std::runtime_error {
public:
    explicit DivergedError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace qhex

#endif

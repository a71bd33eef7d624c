// Error taxonomy shared across the library.
//
// input_error     - malformed arguments (non-finite numbers, bad config, ...)
// domain_error    - structurally valid input outside an operation's domain
//                   (e.g. concentration of a signed measure)
// resource_error  - the computation would exceed a hard resource cap
// numeric_error   - an internal accuracy check failed (e.g. quadrature
//                   refinement disagreement)

#pragma once

#include <stdexcept>
#include <string>

namespace cpsmooth {

class input_error : public std::invalid_argument {
public:
    explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

class domain_error : public std::domain_error {
public:
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cpsmooth

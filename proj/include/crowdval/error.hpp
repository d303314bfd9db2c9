#pragma once

#include <stdexcept>
#include <string>

namespace crowdval {

// Raised for invalid inputs or violated preconditions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised for unreadable files, malformed config, or bad flag values.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace crowdval

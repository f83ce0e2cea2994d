#pragma once

#include <stdexcept>
#include <string>

namespace bandit {

// Configuration problems: bad keys, invalid parameter ranges, malformed
// plans. The CLI maps these to exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical/domain failures at run time: invalid states, singular design
// matrices, empty samples. The CLI maps these to exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bandit

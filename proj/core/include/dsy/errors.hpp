#pragma once

#include <stdexcept>
#include <string>

namespace dsy {

// Invalid model/experiment configuration (CLI exit code 2).
class config_error : public std::invalid_argument {
 public:
  explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// A kernel lacks the optional capability (density, invariant density)
// required by the requested operation.
class capability_error : public std::logic_error {
 public:
  explicit capability_error(const std::string& what) : std::logic_error(what) {}
};

// A numerical routine failed to reach its target accuracy, detected a
// divergent integral, or did not converge (CLI exit code 3).
class numerical_failure : public std::runtime_error {
 public:
  explicit numerical_failure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dsy

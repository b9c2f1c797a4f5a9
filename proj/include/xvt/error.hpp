#pragma once

#include <stdexcept>
#include <string>

namespace xvt {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes.
struct invalid_input_error : std::runtime_error {
  explicit invalid_input_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct dimension_error : invalid_input_error {
  explicit dimension_error(const std::string& msg) : invalid_input_error(msg) {}
};

struct numerical_failure_error : std::runtime_error {
  explicit numerical_failure_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace xvt

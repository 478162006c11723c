#pragma once

#include <stdexcept>
#include <string>

namespace hypstab {

/// Raised when an iterative procedure produces a non-finite value. The CLI
/// maps it to exit code 1; everything else that escapes is a usage/IO error.
class NumericalAbort : public std::runtime_error {
 public:
  explicit NumericalAbort(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hypstab

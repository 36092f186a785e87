#pragma once

#include <stdexcept>
#include <string>

namespace surmr {

// All library failures surface as this exception; the CLI maps it to a
// nonzero exit code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace surmr

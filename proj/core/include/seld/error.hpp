#pragma once

#include <stdexcept>
#include <string>

namespace seld {

// Raised on any violated precondition or malformed input across the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seld

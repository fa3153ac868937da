#pragma once

#include <stdexcept>
#include <string>

namespace histolearn {

/// Raised by every library operation on a contract violation or a failed
/// computation. The CLI maps it to exit code 2.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace histolearn

#pragma once

#include <stdexcept>
#include <string>

namespace ivfts {

/// Raised for every contract violation or numerical failure inside the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace ivfts

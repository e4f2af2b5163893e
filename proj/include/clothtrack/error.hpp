#pragma once

#include <stdexcept>
#include <string>

namespace clothtrack {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kNonFinite,
  kIo,
  kConfig,
  kLostTracking,
  kUnstable,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

}  // namespace clothtrack

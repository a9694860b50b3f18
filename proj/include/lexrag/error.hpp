#pragma once

#include <stdexcept>
#include <string>

namespace lexrag {

/// Failure categories. Each maps to one stable CLI exit code.
enum class ErrorKind {
  Io,          // file missing, unreadable, unwritable
  Format,      // malformed file contents, bad magic, bad config
  Backend,     // embedding / generation provider failure
  Usage,       // caller broke a precondition
  Validation,  // data violates a domain invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace lexrag

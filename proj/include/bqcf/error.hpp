#pragma once

#include <stdexcept>
#include <string>

namespace bqcf {

// Codes are shared with the C API (see bqcf.h).
enum class Status : int {
  ok = 0,
  invalid_argument = 1,
  solver_failure = 2,
  config_error = 3,
  io_error = 4,
  check_failed = 5,
  internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& what) : std::runtime_error(what), status_(status) {}
  Status status() const noexcept { return status_; }

 private:
  Status status_;
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(Status::invalid_argument, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}

}  // namespace bqcf

#pragma once

#include <stdexcept>
#include <string>

namespace prophetsec {

// Error categories surfaced through the C API as status codes.
enum class errc {
  invalid_argument = 1,
  parse = 2,
  validation = 3,
  unattainable = 4,
  infeasible = 5,
  cap_exceeded = 6,
  io = 7,
  convergence = 8,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw error(code, msg); }

}  // namespace prophetsec

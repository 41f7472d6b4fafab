#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace stsp {

// Global numeric tolerances.  Every module compares against these; nothing
// defines a private epsilon.
constexpr double kEpsInt = 1e-6;    // integrality test on relaxation values
constexpr double kEpsFeas = 1e-7;   // row/bound feasibility
constexpr double kEpsOpt = 1e-7;    // reduced-cost optimality
constexpr double kEpsGap = 1e-6;    // relative incumbent/bound gap at proof of optimality
constexpr double kEpsCut = 1e-6;    // violation threshold for separated cuts

constexpr double kInf = 1e100;      // stands in for an absent bound

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Parse failures carry the 1-based input line that triggered them.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Reads STSP_LOG once ("error" | "info" | "debug", default "error").
LogLevel log_level();

// printf-style logging to stderr, filtered by STSP_LOG.
void log_msg(LogLevel level, const char* fmt, ...);

}  // namespace stsp

#ifndef STREAMFILTER_ERRORS_HPP_
#define STREAMFILTER_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace streamfilter {

/// Caller broke a precondition (dimension mismatch, bad index, empty input).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid hyperparameters or sampler/experiment settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. The message names the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Values that parse but violate a data invariant (e.g. negative counts).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All importance weights vanished.
class DegenerateWeights : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw ContractViolation(msg);
}

}  // namespace streamfilter

#endif  // STREAMFILTER_ERRORS_HPP_

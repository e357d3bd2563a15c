#pragma once

#include <stdexcept>
#include <string>

namespace dynvoter {

// Parameter outside an operation's precondition.
class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A series or continued fraction failed to converge within its cap.
class numerical_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tree height floor(delta * log_d n) is below one.
class degenerate_height : public invalid_parameter {
 public:
  using invalid_parameter::invalid_parameter;
};

// Voter trace does not reach the time requested by an estimator.
class insufficient_horizon : public invalid_parameter {
 public:
  using invalid_parameter::invalid_parameter;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw invalid_parameter(what);
}

}  // namespace detail
}  // namespace dynvoter

#pragma once

#include <stdexcept>
#include <string>

namespace greenberg {

// Input outside the mathematical domain of an operation (k <= 0, v <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed request: bad counts, empty ranges, inconsistent settings.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An orbit left (0, kj] where the caller needed it to stay in-domain.
class EscapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Plot spec and payload disagree on kind.
class SpecError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class RenderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace greenberg
